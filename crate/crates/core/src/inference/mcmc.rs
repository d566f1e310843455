//! Random-walk Metropolis-Hastings over a box of uniform priors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::criteria::LogLikMatrix;
use super::Target;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McmcConfig {
    pub chains: usize,
    /// Retained samples per chain.
    pub samples: usize,
    pub burnin: usize,
    pub lag: usize,
    pub seed: u64,
    /// Initial proposal sd as a fraction of each prior width.
    pub initial_scale: f64,
    pub adapt_interval: usize,
    pub target_acceptance: f64,
    pub threads: usize,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            chains: 4,
            samples: 1000,
            burnin: 7500,
            lag: 100,
            seed: 0,
            initial_scale: 0.05,
            adapt_interval: 100,
            target_acceptance: 0.234,
            threads: 0,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 || self.samples == 0 || self.lag == 0 {
            return Err(Error::Config("chains, samples and lag must be positive".into()));
        }
        if !(self.initial_scale > 0.0) || !(0.0..1.0).contains(&self.target_acceptance) || self.target_acceptance == 0.0 {
            return Err(Error::Config("invalid proposal scale or target acceptance".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub samples: Vec<Vec<f64>>,
    /// Acceptance rate after burn-in.
    pub acceptance_rate: f64,
    pub proposal_scales: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcRun {
    pub chains: Vec<Chain>,
    /// Rows ordered chain by chain, sample by sample.
    pub loglik: LogLikMatrix,
    pub warnings: Vec<String>,
}

impl McmcRun {
    pub fn pooled(&self) -> impl Iterator<Item = &Vec<f64>> + '_ {
        self.chains.iter().flat_map(|c| c.samples.iter())
    }

    pub fn posterior_mean(&self) -> Vec<f64> {
        let mut sum: Vec<f64> = Vec::new();
        let mut n = 0usize;
        for s in self.pooled() {
            if sum.is_empty() {
                sum = vec![0.0; s.len()];
            }
            for (a, b) in sum.iter_mut().zip(s) {
                *a += b;
            }
            n += 1;
        }
        sum.into_iter().map(|v| v / n as f64).collect()
    }

    /// Per-parameter effective sample size summed over chains.
    pub fn effective_sample_size(&self) -> Vec<f64> {
        let dim = self.chains.first().and_then(|c| c.samples.first()).map_or(0, Vec::len);
        (0..dim)
            .map(|d| {
                self.chains
                    .iter()
                    .map(|c| {
                        let xs: Vec<f64> = c.samples.iter().map(|s| s[d]).collect();
                        ess(&xs)
                    })
                    .sum()
            })
            .collect()
    }

    /// Gelman-Rubin potential scale reduction per parameter.
    pub fn r_hat(&self) -> Vec<f64> {
        let dim = self.chains.first().and_then(|c| c.samples.first()).map_or(0, Vec::len);
        (0..dim)
            .map(|d| {
                let chains: Vec<Vec<f64>> = self
                    .chains
                    .iter()
                    .map(|c| c.samples.iter().map(|s| s[d]).collect())
                    .collect();
                r_hat(&chains)
            })
            .collect()
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = if xs.len() > 1 {
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, v)
}

/// Effective sample size by the initial positive sequence estimator.
pub fn ess(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return n as f64;
    }
    let (m, _) = mean_var(xs);
    let c0 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return n as f64;
    }
    let acf = |lag: usize| xs[..n - lag].iter().zip(&xs[lag..]).map(|(a, b)| (a - m) * (b - m)).sum::<f64>() / n as f64 / c0;
    let mut tau = -1.0;
    let mut k = 0;
    while k + 1 < n {
        let pair = acf(k) + acf(k + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        k += 2;
    }
    (n as f64 / tau.max(1.0 / n as f64)).min(n as f64 * (n as f64).log10().max(1.0))
}

pub fn r_hat(chains: &[Vec<f64>]) -> f64 {
    let m = chains.len();
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    if m < 2 || n < 2 {
        return f64::NAN;
    }
    let stats: Vec<(f64, f64)> = chains.iter().map(|c| mean_var(&c[..n])).collect();
    let grand = stats.iter().map(|s| s.0).sum::<f64>() / m as f64;
    let b = n as f64 / (m as f64 - 1.0) * stats.iter().map(|s| (s.0 - grand).powi(2)).sum::<f64>();
    let w = stats.iter().map(|s| s.1).sum::<f64>() / m as f64;
    if w == 0.0 {
        return if b == 0.0 { 1.0 } else { f64::INFINITY };
    }
    let var = (n as f64 - 1.0) / n as f64 * w + b / n as f64;
    (var / w).sqrt()
}

/// Fold `x` back into `[lo, hi]` by reflection at the edges.
pub(crate) fn reflect(x: f64, lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    if w <= 0.0 {
        return lo;
    }
    let mut y = (x - lo).rem_euclid(2.0 * w);
    if y > w {
        y = 2.0 * w - y;
    }
    lo + y
}

fn run_chain<T: Target + ?Sized>(target: &T, cfg: &McmcConfig, chain: usize, init: Option<&[f64]>) -> Result<(Chain, Vec<f64>)> {
    let bounds = target.bounds();
    let dim = bounds.len();
    let n_data = target.n_data();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chain as u64);

    let draw_start = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect()
    };
    let mut x = match init {
        Some(p) => p.to_vec(),
        None => draw_start(&mut rng),
    };
    let mut fx = target.log_likelihood(&x);
    let mut tries = 0;
    while !(fx > f64::NEG_INFINITY) {
        tries += 1;
        if tries > 1000 {
            return Err(Error::InvalidModel(format!("chain {chain}: no starting point with finite likelihood")));
        }
        x = draw_start(&mut rng);
        fx = target.log_likelihood(&x);
    }

    let mut scales: Vec<f64> = bounds.iter().map(|(lo, hi)| cfg.initial_scale * (hi - lo)).collect();
    let mut proposal = vec![0.0; dim];
    let mut step = |x: &mut Vec<f64>, fx: &mut f64, scales: &[f64], rng: &mut ChaCha8Rng| -> bool {
        for d in 0..dim {
            let z: f64 = rng.sample(StandardNormal);
            let (lo, hi) = bounds[d];
            proposal[d] = reflect(x[d] + scales[d] * z, lo, hi);
        }
        let fy = target.log_likelihood(&proposal);
        let u: f64 = rng.random();
        if fy.is_finite() && u.ln() < fy - *fx {
            x.copy_from_slice(&proposal);
            *fx = fy;
            true
        } else {
            false
        }
    };

    let interval = cfg.adapt_interval.max(1);
    let mut window = 0usize;
    for t in 0..cfg.burnin {
        if step(&mut x, &mut fx, &scales, &mut rng) {
            window += 1;
        }
        if (t + 1) % interval == 0 {
            let rate = window as f64 / interval as f64;
            let factor = (rate - cfg.target_acceptance).exp();
            for (s, (lo, hi)) in scales.iter_mut().zip(bounds) {
                *s = (*s * factor).clamp(1e-8 * (hi - lo), hi - lo);
            }
            window = 0;
        }
    }

    let mut samples = Vec::with_capacity(cfg.samples);
    let mut ll = vec![0.0; cfg.samples * n_data];
    let mut accepted = 0usize;
    for k in 0..cfg.samples {
        for _ in 0..cfg.lag {
            if step(&mut x, &mut fx, &scales, &mut rng) {
                accepted += 1;
            }
        }
        if n_data > 0 {
            target.pointwise(&x, &mut ll[k * n_data..(k + 1) * n_data]);
        }
        samples.push(x.clone());
    }
    let acceptance_rate = accepted as f64 / (cfg.samples * cfg.lag) as f64;
    Ok((
        Chain {
            samples,
            acceptance_rate,
            proposal_scales: scales,
        },
        ll,
    ))
}

/// Run independent chains (one seeded stream each) and collect thinned
/// post-burn-in samples with their per-datum log-likelihoods.
pub fn mh_sample<T: Target + ?Sized>(target: &T, cfg: &McmcConfig, init: Option<&[f64]>) -> Result<McmcRun> {
    cfg.validate()?;
    let workers = super::map::worker_count(cfg.threads);
    let mut results: Vec<Option<Result<(Chain, Vec<f64>)>>> = (0..cfg.chains).map(|_| None).collect();
    for batch in (0..cfg.chains).collect::<Vec<_>>().chunks(workers) {
        std::thread::scope(|s| {
            let handles: Vec<_> = batch
                .iter()
                .map(|&c| (c, s.spawn(move || run_chain(target, cfg, c, init))))
                .collect();
            for (c, h) in handles {
                results[c] = Some(h.join().expect("chain worker panicked"));
            }
        });
    }

    let n_data = target.n_data();
    let mut chains = Vec::with_capacity(cfg.chains);
    let mut rows: Vec<f64> = Vec::with_capacity(cfg.chains * cfg.samples * n_data);
    let mut warnings = Vec::new();
    for (c, r) in results.into_iter().enumerate() {
        let (chain, ll) = r.expect("every chain ran")?;
        if !(0.05..=0.8).contains(&chain.acceptance_rate) {
            warnings.push(format!(
                "chain {c}: acceptance rate {:.3} outside [0.05, 0.8]",
                chain.acceptance_rate
            ));
        }
        rows.extend(ll);
        chains.push(chain);
    }
    let loglik = LogLikMatrix::from_sample_rows(cfg.chains * cfg.samples, n_data, &rows)?;
    Ok(McmcRun { chains, loglik, warnings })
}

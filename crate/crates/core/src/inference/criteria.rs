//! Predictive information criteria from a per-sample, per-datum
//! log-likelihood matrix.

use serde::{Deserialize, Serialize};

use super::model::log_sum_exp;
use crate::error::{Error, Result};

/// Log-likelihood of every datum under every posterior sample, stored
/// column by column (one contiguous column per datum).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLikMatrix {
    n_samples: usize,
    n_data: usize,
    values: Vec<f64>,
}

impl LogLikMatrix {
    /// From a flat datum-major array: `values[i * n_samples + s]`.
    pub fn from_columns(n_samples: usize, n_data: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_samples * n_data {
            return Err(Error::Validation(format!(
                "log-likelihood matrix has {} entries, expected {n_samples} x {n_data}",
                values.len()
            )));
        }
        Ok(Self {
            n_samples,
            n_data,
            values,
        })
    }

    /// From a flat sample-major array: `rows[s * n_data + i]`.
    pub fn from_sample_rows(n_samples: usize, n_data: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != n_samples * n_data {
            return Err(Error::Validation(format!(
                "log-likelihood rows have {} entries, expected {n_samples} x {n_data}",
                rows.len()
            )));
        }
        let mut values = vec![0.0; rows.len()];
        for s in 0..n_samples {
            for i in 0..n_data {
                values[i * n_samples + s] = rows[s * n_data + i];
            }
        }
        Ok(Self {
            n_samples,
            n_data,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_data = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_data) {
            return Err(Error::Validation("ragged log-likelihood rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_sample_rows(rows.len(), n_data, &flat)
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_samples..(i + 1) * self.n_samples]
    }

    pub fn get(&self, sample: usize, datum: usize) -> f64 {
        self.values[datum * self.n_samples + sample]
    }

    fn require(&self, min_samples: usize) -> Result<()> {
        if self.n_samples < min_samples || self.n_data == 0 {
            return Err(Error::Validation(format!(
                "need at least {min_samples} samples and one datum (got {} x {})",
                self.n_samples, self.n_data
            )));
        }
        if let Some(p) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLikelihood {
                index: p / self.n_samples,
                participant: String::new(),
            });
        }
        Ok(())
    }

    /// `log mean_s exp(ll[s, i])` per datum.
    pub fn lppd_pointwise(&self) -> Vec<f64> {
        let ln_s = (self.n_samples as f64).ln();
        (0..self.n_data).map(|i| log_sum_exp(self.column(i)) - ln_s).collect()
    }
}

fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    // Welford; exactly zero for a constant column
    let (mut mean, mut m2) = (0.0, 0.0);
    for (k, &x) in xs.iter().enumerate() {
        let d = x - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (x - mean);
    }
    m2 / (xs.len() - 1) as f64
}

fn deviance_se(pointwise: &[f64]) -> f64 {
    (pointwise.len() as f64 * variance(pointwise)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaicEstimate {
    /// On the deviance scale: `-2 * elpd`.
    pub waic: f64,
    pub se: f64,
    pub elpd: f64,
    pub lppd: f64,
    pub p_waic: f64,
    /// Per-datum deviance contributions `-2 * (lppd_i - p_i)`.
    pub pointwise: Vec<f64>,
}

pub fn waic(m: &LogLikMatrix) -> Result<WaicEstimate> {
    m.require(1)?;
    let lppd_i = m.lppd_pointwise();
    let p_i: Vec<f64> = (0..m.n_data).map(|i| variance(m.column(i))).collect();
    let pointwise: Vec<f64> = lppd_i.iter().zip(&p_i).map(|(l, p)| -2.0 * (l - p)).collect();
    let lppd: f64 = lppd_i.iter().sum();
    let p_waic: f64 = p_i.iter().sum();
    let elpd = lppd - p_waic;
    Ok(WaicEstimate {
        waic: -2.0 * elpd,
        se: deviance_se(&pointwise),
        elpd,
        lppd,
        p_waic,
        pointwise,
    })
}

/// Pareto-k above which an importance-sampling estimate is unreliable.
pub const PARETO_K_WARN: f64 = 0.7;
/// Smallest tail that is fitted with a generalized Pareto distribution.
pub const MIN_TAIL: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooEstimate {
    /// On the deviance scale: `-2 * elpd_loo`.
    pub looic: f64,
    pub se: f64,
    pub elpd: f64,
    pub p_loo: f64,
    pub pointwise: Vec<f64>,
    /// Fitted tail shape per datum; `None` where the tail was too short.
    pub pareto_k: Vec<Option<f64>>,
    /// Data smoothed by truncated importance sampling instead of a tail fit.
    pub truncated: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Generalized Pareto fit by the Zhang-Stephens empirical Bayes method.
/// `x` must be sorted ascending and positive. Returns `(k, sigma)`.
pub fn gpd_fit(x: &[f64]) -> (f64, f64) {
    const PRIOR_BS: f64 = 3.0;
    const PRIOR_K: f64 = 10.0;
    let n = x.len();
    let m = 30 + (n as f64).sqrt() as usize;
    let quartile = x[((n as f64 / 4.0 + 0.5) as usize).max(1) - 1];
    let b: Vec<f64> = (1..=m)
        .map(|j| (1.0 - (m as f64 / (j as f64 - 0.5)).sqrt()) / (PRIOR_BS * quartile) + 1.0 / x[n - 1])
        .collect();
    let k_of = |bj: f64| x.iter().map(|&xi| (-bj * xi).ln_1p()).sum::<f64>() / n as f64;
    let ks: Vec<f64> = b.iter().map(|&bj| k_of(bj)).collect();
    let len_scale: Vec<f64> = b
        .iter()
        .zip(&ks)
        .map(|(&bj, &kj)| n as f64 * ((-(bj / kj)).ln() - kj - 1.0))
        .collect();
    let mut weights: Vec<f64> = len_scale
        .iter()
        .map(|&li| 1.0 / len_scale.iter().map(|&lj| (lj - li).exp()).sum::<f64>())
        .collect();
    let mut b_kept = b.clone();
    let keep: Vec<bool> = weights.iter().map(|&w| w >= 10.0 * f64::EPSILON).collect();
    if keep.iter().any(|k| !k) {
        let mut i = 0;
        weights.retain(|_| {
            i += 1;
            keep[i - 1]
        });
        let mut i = 0;
        b_kept.retain(|_| {
            i += 1;
            keep[i - 1]
        });
    }
    let total: f64 = weights.iter().sum();
    let b_post: f64 = b_kept.iter().zip(&weights).map(|(b, w)| b * w / total).sum();
    let k_post = k_of(b_post);
    let sigma = -k_post / b_post;
    let k = (n as f64 * k_post + PRIOR_K * 0.5) / (n as f64 + PRIOR_K);
    (k, sigma)
}

/// Quantile function of the generalized Pareto distribution.
pub fn gpd_quantile(p: f64, k: f64, sigma: f64) -> f64 {
    if k.abs() < f64::EPSILON {
        -sigma * (-p).ln_1p()
    } else {
        sigma * (-k * (-p).ln_1p()).exp_m1() / k
    }
}

struct Smoothed {
    log_weights: Vec<f64>,
    k: Option<f64>,
}

/// Pareto-smoothed log importance weights for one datum's ratios.
fn psis_smooth(raw_log_ratios: &[f64]) -> Smoothed {
    let s = raw_log_ratios.len();
    let max = raw_log_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut lw: Vec<f64> = raw_log_ratios.iter().map(|v| v - max).collect();
    let tail_len = (0.2 * s as f64).ceil() as usize;

    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| lw[a].total_cmp(&lw[b]));
    let tail_fit = if tail_len < s {
        let cutoff = lw[order[s - tail_len - 1]];
        let tail: Vec<usize> = order[s - tail_len..].iter().copied().filter(|&j| lw[j] > cutoff).collect();
        (tail.len() >= MIN_TAIL).then_some((cutoff, tail))
    } else {
        None
    };

    match tail_fit {
        Some((cutoff, tail)) => {
            let exp_cut = cutoff.exp();
            let xs: Vec<f64> = tail.iter().map(|&j| lw[j].exp() - exp_cut).collect();
            let (k, sigma) = gpd_fit(&xs);
            if k.is_finite() && sigma > 0.0 {
                let m = tail.len() as f64;
                for (r, &j) in tail.iter().enumerate() {
                    let p = (r as f64 + 0.5) / m;
                    lw[j] = (gpd_quantile(p, k, sigma) + exp_cut).ln();
                }
            }
            for v in &mut lw {
                if *v > 0.0 {
                    *v = 0.0;
                }
            }
            Smoothed {
                log_weights: lw,
                k: Some(k),
            }
        }
        None => {
            // truncated importance sampling
            let log_cap = log_sum_exp(&lw) - (s as f64).ln() + 0.5 * (s as f64).ln();
            for v in &mut lw {
                if *v > log_cap {
                    *v = log_cap;
                }
            }
            Smoothed {
                log_weights: lw,
                k: None,
            }
        }
    }
}

pub fn psis_loo(m: &LogLikMatrix) -> Result<LooEstimate> {
    m.require(2)?;
    let lppd_i = m.lppd_pointwise();
    let mut elpd_i = Vec::with_capacity(m.n_data);
    let mut pareto_k = Vec::with_capacity(m.n_data);
    let mut truncated = Vec::new();
    let mut terms = vec![0.0; m.n_samples];
    for i in 0..m.n_data {
        let ll = m.column(i);
        let neg: Vec<f64> = ll.iter().map(|v| -v).collect();
        let sm = psis_smooth(&neg);
        for (t, (w, l)) in terms.iter_mut().zip(sm.log_weights.iter().zip(ll)) {
            *t = w + l;
        }
        elpd_i.push(log_sum_exp(&terms) - log_sum_exp(&sm.log_weights));
        if sm.k.is_none() {
            truncated.push(i);
        }
        pareto_k.push(sm.k);
    }
    let pointwise: Vec<f64> = elpd_i.iter().map(|e| -2.0 * e).collect();
    let elpd: f64 = elpd_i.iter().sum();
    let lppd: f64 = lppd_i.iter().sum();
    let mut warnings = Vec::new();
    let high = pareto_k.iter().filter(|k| k.is_some_and(|k| k > PARETO_K_WARN)).count();
    if high > 0 {
        warnings.push(format!("{high} of {} data have pareto k > {PARETO_K_WARN}", m.n_data));
    }
    if !truncated.is_empty() {
        warnings.push(format!(
            "{} data used truncated importance sampling (tail shorter than {MIN_TAIL} points)",
            truncated.len()
        ));
    }
    Ok(LooEstimate {
        looic: -2.0 * elpd,
        se: deviance_se(&pointwise),
        elpd,
        p_loo: lppd - elpd,
        pointwise,
        pareto_k,
        truncated,
        warnings,
    })
}

//! Maximum-likelihood search over a bounded box: a coarse grid scan, then
//! compass-search refinement from the best grid points.

use serde::{Deserialize, Serialize};

use super::Target;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    /// Total grid evaluations allowed for the coarse scan.
    pub grid_budget: usize,
    /// Number of best grid points refined locally.
    pub starts: usize,
    /// Initial compass step as a fraction of each box width.
    pub initial_step: f64,
    /// Refinement stops once every step is below this fraction of its width.
    pub tolerance: f64,
    pub max_evaluations: usize,
    pub threads: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid_budget: 20_000,
            starts: 4,
            initial_step: 0.1,
            tolerance: 1e-6,
            max_evaluations: 20_000,
            threads: 0,
        }
    }
}

impl SearchConfig {
    pub fn points_per_dim(&self, dim: usize) -> usize {
        if dim == 0 {
            return 1;
        }
        let mut k = (self.grid_budget.max(1) as f64).powf(1.0 / dim as f64).floor() as usize;
        // guard against powf rounding just below an exact root
        while (k + 1).checked_pow(dim as u32).is_some_and(|v| v <= self.grid_budget) {
            k += 1;
        }
        k.max(3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapFit {
    pub theta: Vec<f64>,
    pub log_likelihood: f64,
    pub grid_points_per_dim: usize,
    pub evaluations: usize,
}

pub(crate) fn worker_count(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get()).min(16)
    }
}

fn grid_axis(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 || lo == hi {
        return vec![0.5 * (lo + hi)];
    }
    (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
}

fn grid_point(axes: &[Vec<f64>], mut index: usize, out: &mut [f64]) {
    for (d, axis) in axes.iter().enumerate().rev() {
        out[d] = axis[index % axis.len()];
        index /= axis.len();
    }
}

fn score(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

fn compass<T: Target + ?Sized>(target: &T, start: Vec<f64>, start_value: f64, cfg: &SearchConfig, budget: usize) -> (Vec<f64>, f64, usize) {
    let bounds = target.bounds();
    let mut x = start;
    let mut fx = start_value;
    let mut steps: Vec<f64> = bounds.iter().map(|(lo, hi)| cfg.initial_step * (hi - lo)).collect();
    let mut evals = 0;
    let done = |steps: &[f64]| {
        steps
            .iter()
            .zip(bounds)
            .all(|(s, (lo, hi))| *s <= cfg.tolerance * (hi - lo).max(f64::MIN_POSITIVE))
    };
    while !done(&steps) && evals < budget {
        let mut improved = false;
        for d in 0..x.len() {
            let (lo, hi) = bounds[d];
            for dir in [1.0, -1.0] {
                let cand = (x[d] + dir * steps[d]).clamp(lo, hi);
                if cand == x[d] {
                    continue;
                }
                let mut y = x.clone();
                y[d] = cand;
                let fy = score(target.log_likelihood(&y));
                evals += 1;
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            for s in &mut steps {
                *s *= 0.5;
            }
        }
    }
    (x, fx, evals)
}

/// Best point found by a grid scan over the prior box followed by local
/// refinement. Deterministic for a given target and configuration.
pub fn map_fit<T: Target + ?Sized>(target: &T, cfg: &SearchConfig) -> MapFit {
    let bounds = target.bounds();
    let dim = bounds.len();
    let k = cfg.points_per_dim(dim);
    let axes: Vec<Vec<f64>> = bounds.iter().map(|&(lo, hi)| grid_axis(lo, hi, k)).collect();
    let total: usize = axes.iter().map(Vec::len).product();

    let workers = worker_count(cfg.threads).min(total.max(1));
    let chunk = total.div_ceil(workers);
    let mut values = vec![f64::NEG_INFINITY; total];
    std::thread::scope(|s| {
        for (c, slot) in values.chunks_mut(chunk).enumerate() {
            let axes = &axes;
            s.spawn(move || {
                let mut theta = vec![0.0; dim];
                for (j, v) in slot.iter_mut().enumerate() {
                    grid_point(axes, c * chunk + j, &mut theta);
                    *v = score(target.log_likelihood(&theta));
                }
            });
        }
    });

    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let starts = cfg.starts.max(1).min(total);
    let per_start = cfg.max_evaluations / starts;

    let refined: Vec<(Vec<f64>, f64, usize)> = std::thread::scope(|s| {
        let handles: Vec<_> = order[..starts]
            .iter()
            .map(|&idx| {
                let axes = &axes;
                let start_value = values[idx];
                s.spawn(move || {
                    let mut theta = vec![0.0; dim];
                    grid_point(axes, idx, &mut theta);
                    compass(target, theta, start_value, cfg, per_start)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("search worker panicked")).collect()
    });

    let mut evaluations = total;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (x, fx, n) in refined {
        evaluations += n;
        if best.as_ref().is_none_or(|(_, b)| fx > *b) {
            best = Some((x, fx));
        }
    }
    let (theta, log_likelihood) = best.unwrap_or_else(|| (Vec::new(), target.log_likelihood(&[])));
    MapFit {
        theta,
        log_likelihood,
        grid_points_per_dim: k,
        evaluations,
    }
}

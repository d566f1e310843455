//! Brute-force reference implementation over ordered tuples. Shares no code
//! with the library: every quantity is recomputed from the tuple list.

#![allow(dead_code)]

pub const TIE: f64 = 1e-9;

pub struct Oracle {
    pub values: Vec<f64>,
    pub mid: f64,
    pub n: usize,
    tuples: Vec<Vec<usize>>,
    truth: Vec<i8>,
    prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum G {
    Longer,
    Shorter,
}

impl Oracle {
    pub fn new(values: Vec<f64>, mid: f64, n: usize) -> Self {
        let k = values.len();
        let total = k.pow(n as u32);
        let mut tuples = Vec::with_capacity(total);
        for mut code in 0..total {
            let mut t = vec![0; n];
            for slot in t.iter_mut() {
                *slot = code % k;
                code /= k;
            }
            tuples.push(t);
        }
        let truth = tuples
            .iter()
            .map(|t| {
                let mean = t.iter().map(|&i| values[i]).sum::<f64>() / n as f64;
                if (mean - mid).abs() <= TIE {
                    0
                } else if mean > mid {
                    1
                } else {
                    -1
                }
            })
            .collect();
        Self {
            values,
            mid,
            n,
            tuples,
            truth,
            prob: 1.0 / total as f64,
        }
    }

    pub fn index(&self, u: f64) -> usize {
        self.values.iter().position(|&v| (v - u).abs() < 1e-12).expect("on grid")
    }

    fn hit(&self, t: usize, goal: G) -> bool {
        match goal {
            G::Longer => self.truth[t] == 1,
            G::Shorter => self.truth[t] == -1,
        }
    }

    /// Posterior `(longer, shorter)` given per-tuple likelihoods of `u`.
    fn posterior(&self, lik: impl Fn(usize) -> f64) -> (f64, f64) {
        let (mut den, mut l, mut s) = (0.0, 0.0, 0.0);
        for t in 0..self.tuples.len() {
            let m = self.prob * lik(t);
            den += m;
            if self.truth[t] == 1 {
                l += m;
            } else if self.truth[t] == -1 {
                s += m;
            }
        }
        (l / den, s / den)
    }

    /// A uniformly chosen slot shows `u`.
    pub fn literal(&self, u: f64) -> (f64, f64) {
        let ui = self.index(u);
        self.posterior(|t| self.tuples[t].iter().filter(|&&i| i == ui).count() as f64 / self.n as f64)
    }

    pub fn literal_goal(&self, goal: G) -> Vec<f64> {
        (0..self.values.len())
            .map(|i| {
                let (l, s) = self.literal(self.values[i]);
                if goal == G::Longer {
                    l
                } else {
                    s
                }
            })
            .collect()
    }

    /// Softmax over slots with log-weight `scale * util[value]`.
    pub fn speaker(&self, t: usize, ui: usize, util: &[f64], scale: f64) -> f64 {
        let tuple = &self.tuples[t];
        let logs: Vec<f64> = tuple
            .iter()
            .map(|&i| if scale == 0.0 { 0.0 } else { scale * util[i] })
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return tuple.iter().filter(|&&i| i == ui).count() as f64 / self.n as f64;
        }
        let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = w.iter().sum();
        tuple
            .iter()
            .zip(&w)
            .filter(|(i, _)| **i == ui)
            .map(|(_, w)| w)
            .sum::<f64>()
            / z
    }

    fn log_util(&self, goal: G) -> Vec<f64> {
        self.literal_goal(goal).iter().map(|p| p.ln()).collect()
    }

    pub fn pragmatic(&self, u: f64, goal: G, beta: f64) -> (f64, f64) {
        let ui = self.index(u);
        let util = self.log_util(goal);
        self.posterior(|t| self.speaker(t, ui, &util, beta))
    }

    /// Joint listener over `(world, beta)`: `(longer, shorter, E|beta|)`.
    pub fn joint(&self, u: f64, goal: G, betas: &[f64], weights: &[f64]) -> (f64, f64, f64) {
        let ui = self.index(u);
        let util = self.log_util(goal);
        let (mut den, mut l, mut s, mut b_abs) = (0.0, 0.0, 0.0, 0.0);
        for (&b, &pb) in betas.iter().zip(weights) {
            for t in 0..self.tuples.len() {
                let m = pb * self.prob * self.speaker(t, ui, &util, b);
                den += m;
                b_abs += m * b.abs();
                if self.truth[t] == 1 {
                    l += m;
                } else if self.truth[t] == -1 {
                    s += m;
                }
            }
        }
        (l / den, s / den, b_abs / den)
    }

    pub fn level2(&self, u: f64, goal: G, beta: f64, wc: f64, betas: &[f64], weights: &[f64]) -> (f64, f64) {
        let util: Vec<f64> = self
            .values
            .iter()
            .map(|&v| {
                let (l, s, c) = self.joint(v, goal, betas, weights);
                let p = if goal == G::Longer { l } else { s };
                p.ln() - wc * c
            })
            .collect();
        let ui = self.index(u);
        self.posterior(|t| self.speaker(t, ui, &util, beta.abs()))
    }

    /// Two reveals, each an independent pick by its contestant's speaker.
    pub fn sequential_pragmatic(&self, obs: &[(f64, G)], beta: f64) -> (f64, f64) {
        let utils: Vec<Vec<f64>> = obs.iter().map(|&(_, g)| self.log_util(g)).collect();
        let idx: Vec<usize> = obs.iter().map(|&(u, _)| self.index(u)).collect();
        self.posterior(|t| {
            idx.iter()
                .zip(&utils)
                .map(|(&ui, util)| self.speaker(t, ui, util, beta))
                .product()
        })
    }

    pub fn prior(&self) -> (f64, f64, f64) {
        let mut p = (0.0, 0.0, 0.0);
        for t in 0..self.tuples.len() {
            match self.truth[t] {
                1 => p.0 += self.prob,
                -1 => p.1 += self.prob,
                _ => p.2 += self.prob,
            }
        }
        p
    }

    pub fn distinct_multisets(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        for t in &self.tuples {
            let mut s = t.clone();
            s.sort_unstable();
            seen.insert(s);
        }
        seen.len()
    }

    pub fn goal_hit(&self, t: usize, goal: G) -> bool {
        self.hit(t, goal)
    }
}

pub fn uniform_betas(lo: f64, hi: f64, points: usize) -> (Vec<f64>, Vec<f64>) {
    let b = (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect();
    (b, vec![1.0 / points as f64; points])
}

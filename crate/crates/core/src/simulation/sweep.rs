//! Weak-evidence heatmap over (bias, evidence) and listener belief curves.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rsa::StickContest;
use crate::world::{Goal, LengthGrid, Truth, WorldPrior};

pub const DEFAULT_BETAS: [f64; 7] = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub betas: Vec<f64>,
    pub evidence: Vec<f64>,
    pub goal: Goal,
    pub grid: LengthGrid,
    pub n: u32,
}

impl Default for SweepConfig {
    /// Grid 1..10 so that evidence up to 10 is on the grid.
    fn default() -> Self {
        Self {
            betas: DEFAULT_BETAS.to_vec(),
            evidence: vec![6.0, 7.0, 8.0, 9.0, 10.0],
            goal: Goal::Longer,
            grid: LengthGrid::extended(),
            n: 5,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() || self.evidence.is_empty() {
            return Err(Error::Config("sweep needs at least one beta and one evidence value".into()));
        }
        if let Some(b) = self.betas.iter().find(|b| !b.is_finite()) {
            return Err(Error::Config(format!("beta {b} is not finite")));
        }
        for &u in &self.evidence {
            self.grid.require_index(u)?;
            if !self.grid.side_of(u).satisfies(self.goal) {
                return Err(Error::Config(format!(
                    "evidence {u} does not favour {} (midpoint {})",
                    self.goal,
                    self.grid.midpoint()
                )));
            }
        }
        Ok(())
    }

    pub fn prior(&self) -> Result<WorldPrior> {
        WorldPrior::new(self.grid.clone(), self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectHeatmap {
    pub betas: Vec<f64>,
    pub evidence: Vec<f64>,
    /// `effects[b][u]`; zero where no weak evidence effect occurs.
    pub effects: Vec<Vec<f64>>,
    pub prior: f64,
}

impl EffectHeatmap {
    /// Evidence values with a positive effect at each bias.
    pub fn regions(&self) -> Vec<Vec<f64>> {
        self.effects
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.evidence)
                    .filter(|(e, _)| **e > 0.0)
                    .map(|(_, u)| *u)
                    .collect()
            })
            .collect()
    }

    /// True when each bias's effect region contains the previous one.
    pub fn regions_nested(&self) -> bool {
        let regions = self.regions();
        regions
            .windows(2)
            .all(|w| w[0].iter().all(|u| w[1].contains(u)))
    }

    pub fn get(&self, beta: f64, u: f64) -> Option<f64> {
        let b = self.betas.iter().position(|&x| x == beta)?;
        let i = self.evidence.iter().position(|&x| x == u)?;
        Some(self.effects[b][i])
    }

    /// Wide CSV: one row per bias, one column per evidence value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("beta");
        for u in &self.evidence {
            write!(out, ",{u}").unwrap();
        }
        out.push('\n');
        for (b, row) in self.betas.iter().zip(&self.effects) {
            write!(out, "{b}").unwrap();
            for e in row {
                write!(out, ",{e}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

pub fn effect_heatmap(cfg: &SweepConfig) -> Result<EffectHeatmap> {
    cfg.validate()?;
    let engine = StickContest::new(&cfg.prior()?)?;
    effect_heatmap_with(&engine, cfg)
}

pub fn effect_heatmap_with(engine: &StickContest, cfg: &SweepConfig) -> Result<EffectHeatmap> {
    cfg.validate()?;
    let prior = engine.prior_marginals().of(cfg.goal);
    let indices: Vec<usize> = cfg
        .evidence
        .iter()
        .map(|&u| engine.grid().require_index(u))
        .collect::<Result<_>>()?;
    let mut effects = Vec::with_capacity(cfg.betas.len());
    for &beta in &cfg.betas {
        let all = engine.pragmatic_p_longer_all(cfg.goal, beta)?;
        let row = indices
            .iter()
            .map(|&i| {
                let p_goal = match cfg.goal {
                    Goal::Longer => all[i],
                    Goal::Shorter => engine.pragmatic_listener(engine.grid().value(i), cfg.goal, beta)?.p_shorter,
                };
                Ok((prior - p_goal).max(0.0))
            })
            .collect::<Result<Vec<_>>>()?;
        effects.push(row);
    }
    Ok(EffectHeatmap {
        betas: cfg.betas.clone(),
        evidence: cfg.evidence.clone(),
        effects,
        prior,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeliefCurves {
    pub beta: f64,
    pub offset: f64,
    pub evidence: Vec<f64>,
    /// Literal listener `p_longer + offset`.
    pub j0: Vec<f64>,
    /// Pragmatic listener `p_longer + offset`.
    pub j1: Vec<f64>,
    pub prior: f64,
}

impl BeliefCurves {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,j0,j1,prior\n");
        for ((u, a), b) in self.evidence.iter().zip(&self.j0).zip(&self.j1) {
            writeln!(out, "{u},{a},{b},{}", self.prior).unwrap();
        }
        out
    }
}

/// Literal and pragmatic belief in "longer" across `evidence`. The pragmatic
/// listener assumes the speaker argues for the side the evidence favours; at
/// the midpoint it averages over the two speakers.
pub fn belief_curves(engine: &StickContest, beta: f64, offset: f64, evidence: &[f64]) -> Result<BeliefCurves> {
    let mut j0 = Vec::with_capacity(evidence.len());
    let mut j1 = Vec::with_capacity(evidence.len());
    for &u in evidence {
        j0.push(engine.literal_listener(u)?.p_longer + offset);
        let p = match engine.grid().side_of(u) {
            Truth::Longer => engine.pragmatic_listener(u, Goal::Longer, beta)?.p_longer,
            Truth::Shorter => engine.pragmatic_listener(u, Goal::Shorter, beta)?.p_longer,
            Truth::Tie => {
                0.5 * (engine.pragmatic_listener(u, Goal::Longer, beta)?.p_longer
                    + engine.pragmatic_listener(u, Goal::Shorter, beta)?.p_longer)
            }
        };
        j1.push(p + offset);
    }
    Ok(BeliefCurves {
        beta,
        offset,
        evidence: evidence.to_vec(),
        j0,
        j1,
        prior: engine.prior_marginals().longer,
    })
}

/// Largest absolute second difference along a curve.
pub fn max_second_difference(ys: &[f64]) -> f64 {
    ys.windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]).abs())
        .fold(0.0, f64::max)
}

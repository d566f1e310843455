//! Property battery for the speaker/listener hierarchy, run over several
//! grids and sample sizes.

use std::fmt;

use serde::Serialize;

use super::sweep::{effect_heatmap_with, SweepConfig, DEFAULT_BETAS};
use crate::error::{Error, Result};
use crate::rsa::{SpeakerParams, StickContest};
use crate::world::{Goal, LengthGrid, StickSet, Truth, WorldPrior};

/// Utility whose ordering over lengths the monotonicity check inspects.
pub type UtilityFn = fn(&StickContest, f64, Goal) -> Result<f64>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub property: String,
    pub config: String,
    pub passed: bool,
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub results: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyResult> + '_ {
        self.results.iter().filter(|r| !r.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            write!(f, "{} {} [{}]", if r.passed { "PASS" } else { "FAIL" }, r.property, r.config)?;
            if let Some(c) = &r.counterexample {
                write!(f, ": {c}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BatteryEntry {
    pub grid: LengthGrid,
    pub n: u32,
}

impl BatteryEntry {
    fn label(&self) -> String {
        let v = self.grid.values();
        format!(
            "grid {}..{} ({} values), midpoint {}, n={}",
            v[0],
            v[v.len() - 1],
            v.len(),
            self.grid.midpoint(),
            self.n
        )
    }
}

#[derive(Debug, Clone)]
pub struct TheoremSuite {
    pub battery: Vec<BatteryEntry>,
    pub betas: Vec<f64>,
    pub utility: UtilityFn,
    pub tolerance: f64,
}

fn default_utility(e: &StickContest, u: f64, goal: Goal) -> Result<f64> {
    e.persuasive_utility(u, goal)
}

impl Default for TheoremSuite {
    fn default() -> Self {
        let entry = |grid: LengthGrid, n| BatteryEntry { grid, n };
        Self {
            battery: vec![
                entry(LengthGrid::experiment(), 5),
                entry(LengthGrid::integers(1, 5, 3.0).expect("valid grid"), 5),
                entry(LengthGrid::normalized(), 5),
                entry(LengthGrid::integers(1, 3, 2.0).expect("valid grid"), 2),
                entry(LengthGrid::extended(), 5),
            ],
            betas: DEFAULT_BETAS.to_vec(),
            utility: default_utility,
            tolerance: 1e-12,
        }
    }
}

struct Check<'a> {
    out: &'a mut Vec<PropertyResult>,
    config: String,
}

impl Check<'_> {
    fn record(&mut self, property: &str, counterexample: Option<String>) {
        self.out.push(PropertyResult {
            property: property.to_string(),
            config: self.config.clone(),
            passed: counterexample.is_none(),
            counterexample,
        });
    }
}

impl TheoremSuite {
    pub fn run(&self) -> Result<SuiteReport> {
        let mut results = Vec::new();
        for entry in &self.battery {
            let engine = StickContest::new(&WorldPrior::new(entry.grid.clone(), entry.n)?)?;
            let mut check = Check {
                out: &mut results,
                config: entry.label(),
            };
            check.record("reduction", self.reduction(&engine)?);
            check.record("monotonicity", self.monotonicity(&engine)?);
            check.record("argmax-invariance", self.argmax_invariance(&engine)?);
            check.record("normalization", self.normalization(&engine)?);
            check.record("effect-region", self.effect_regions(&engine)?);
        }
        Ok(SuiteReport { results })
    }

    fn reduction(&self, e: &StickContest) -> Result<Option<String>> {
        let lit = e.literal_p_longer_all();
        for goal in [Goal::Longer, Goal::Shorter] {
            for (i, &u) in e.grid().values().iter().enumerate() {
                let p = e.pragmatic_listener(u, goal, 0.0)?.p_longer;
                if (p - lit[i]).abs() >= self.tolerance {
                    return Ok(Some(format!("u={u}, goal {goal}: J1(beta=0)={p} vs J0={}", lit[i])));
                }
            }
        }
        Ok(None)
    }

    fn monotonicity(&self, e: &StickContest) -> Result<Option<String>> {
        let values = e.grid().values();
        for goal in [Goal::Longer, Goal::Shorter] {
            let utils: Vec<f64> = values.iter().map(|&u| (self.utility)(e, u, goal)).collect::<Result<_>>()?;
            for i in 1..values.len() {
                let (lo, hi) = (utils[i - 1], utils[i]);
                let ordered = match goal {
                    Goal::Longer => hi > lo,
                    Goal::Shorter => lo > hi,
                };
                if !ordered {
                    return Ok(Some(format!(
                        "goal {goal}: utility({})={lo} vs utility({})={hi}",
                        values[i - 1],
                        values[i]
                    )));
                }
            }
        }
        Ok(None)
    }

    fn sample_worlds(e: &StickContest) -> Vec<StickSet> {
        let worlds = &e.table().worlds;
        let step = (worlds.len() / 25).max(1);
        worlds.iter().step_by(step).map(|w| w.sticks.clone()).collect()
    }

    fn argmax_invariance(&self, e: &StickContest) -> Result<Option<String>> {
        for w in Self::sample_worlds(e) {
            for goal in [Goal::Longer, Goal::Shorter] {
                for beta in [0.5, 2.0, -1.0] {
                    // worlds where no stick can support the goal have no speaker
                    let base = match e.speaker_choice_dist(&w, goal, &SpeakerParams::level1(beta)) {
                        Err(Error::DegenerateSpeaker) => continue,
                        r => r?,
                    };
                    for c in [0.25, 3.0, 10.0] {
                        let params = SpeakerParams {
                            alpha: 1.0 / c,
                            beta: c * beta,
                            ..SpeakerParams::level1(beta)
                        };
                        let other = e.speaker_choice_dist(&w, goal, &params)?;
                        for ((u, p), (_, q)) in base.iter().zip(&other) {
                            if (p - q).abs() > 1e-10 {
                                return Ok(Some(format!(
                                    "world {:?}, goal {goal}, beta={beta}, c={c}: P({u}) {p} vs {q}",
                                    w.lengths(e.grid())
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    fn normalization(&self, e: &StickContest) -> Result<Option<String>> {
        for w in Self::sample_worlds(e) {
            for beta in [0.0, 2.0, 100.0] {
                let d = match e.speaker_choice_dist(&w, Goal::Longer, &SpeakerParams::level1(beta)) {
                    Err(Error::DegenerateSpeaker) => continue,
                    r => r?,
                };
                let total: f64 = d.iter().map(|(_, p)| p).sum();
                if (total - 1.0).abs() > 1e-10 {
                    return Ok(Some(format!("speaker distribution sums to {total}")));
                }
            }
        }
        for &u in e.grid().values() {
            let b = e.pragmatic_listener(u, Goal::Longer, 2.0)?;
            let total: f64 = b.probabilities().iter().sum();
            if (total - 1.0).abs() > 1e-10 || (b.p_longer + b.p_shorter + b.p_tie - 1.0).abs() > 1e-10 {
                return Ok(Some(format!("listener posterior at u={u} sums to {total}")));
            }
        }
        Ok(None)
    }

    fn effect_regions(&self, e: &StickContest) -> Result<Option<String>> {
        let grid = e.grid();
        let evidence: Vec<f64> = grid
            .values()
            .iter()
            .copied()
            .filter(|&u| grid.side_of(u) == Truth::Longer)
            .collect();
        if evidence.is_empty() {
            return Ok(None);
        }
        let cfg = SweepConfig {
            betas: self.betas.clone(),
            evidence,
            goal: Goal::Longer,
            grid: grid.clone(),
            n: e.n(),
        };
        let h = effect_heatmap_with(e, &cfg)?;
        if h.effects[0].iter().any(|&x| x != 0.0) && h.betas[0] == 0.0 {
            return Ok(Some("beta=0 row is not zero".into()));
        }
        let regions = h.regions();
        for k in 1..regions.len() {
            if let Some(u) = regions[k - 1].iter().find(|u| !regions[k].contains(u)) {
                return Ok(Some(format!(
                    "u={u} shows an effect at beta={} but not at beta={}",
                    h.betas[k - 1],
                    h.betas[k]
                )));
            }
        }
        Ok(None)
    }
}

pub fn theorem_suite() -> Result<SuiteReport> {
    TheoremSuite::default().run()
}

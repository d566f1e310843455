//! Belief trajectories over several reveals, one per contestant.

use serde::{Deserialize, Serialize};

use super::{choice_prob, BeliefState, SpeakerParams, StickContest};
use crate::error::{Error, Result};
use crate::world::Goal;

/// Which speaker model the listener inverts for every reveal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ListenerKind {
    Literal,
    Pragmatic { beta: f64 },
    Level2 { beta: f64, cost_weight: f64 },
}

/// Whether a later contestant may reveal a stick that was already shown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SecondPick {
    /// Each contestant picks from all five sticks.
    #[default]
    Independent,
    /// Later contestants pick from the sticks not yet revealed.
    Exclusive,
}

impl std::str::FromStr for SecondPick {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(SecondPick::Independent),
            "exclusive" => Ok(SecondPick::Exclusive),
            other => Err(Error::Validation(format!("unknown second-pick mode {other:?}"))),
        }
    }
}

/// A revealed stick and the goal of the contestant who revealed it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub u: f64,
    pub goal: Goal,
}

impl StickContest {
    fn kind_log_weights(&self, kind: ListenerKind, goal: Goal) -> Result<Vec<f64>> {
        Ok(match kind {
            ListenerKind::Literal => vec![0.0; self.grid().len()],
            ListenerKind::Pragmatic { beta } => {
                SpeakerParams::level1(beta).validate()?;
                self.level1_log_weights(goal, beta)
            }
            ListenerKind::Level2 { beta, cost_weight } => {
                let params = SpeakerParams::level2(beta, cost_weight);
                params.validate()?;
                let inputs = self.default_level2_inputs(goal)?;
                self.level2_log_weights(inputs, &params)
            }
        })
    }

    /// Posterior after each observation in turn. Each reveal's likelihood is
    /// the chosen speaker model for that contestant's goal; under
    /// [`SecondPick::Exclusive`] later reveals exclude sticks already shown.
    pub fn sequential_update(
        &self,
        observations: &[Observation],
        kind: ListenerKind,
        pick: SecondPick,
    ) -> Result<Vec<BeliefState>> {
        let mut steps = Vec::with_capacity(observations.len());
        let mut indices = Vec::with_capacity(observations.len());
        let mut weights: Vec<Vec<f64>> = Vec::with_capacity(observations.len());
        for obs in observations {
            indices.push(self.grid().require_index(obs.u)?);
            weights.push(self.kind_log_weights(kind, obs.goal)?);
        }
        let mut mass: Vec<f64> = self.table.worlds.iter().map(|w| w.prob).collect();
        for k in 0..observations.len() {
            for (j, w) in self.table.worlds.iter().enumerate() {
                if mass[j] == 0.0 {
                    continue;
                }
                let s = match pick {
                    SecondPick::Independent => choice_prob(&w.present, indices[k], &weights[k]),
                    SecondPick::Exclusive => {
                        let mut rest = w.sticks.clone();
                        let mut ok = true;
                        for &prev in &indices[..k] {
                            match rest.without_one(prev) {
                                Some(r) => rest = r,
                                None => ok = false,
                            }
                        }
                        if ok {
                            let present: Vec<_> = rest.present().collect();
                            if present.is_empty() {
                                Some(0.0)
                            } else {
                                choice_prob(&present, indices[k], &weights[k])
                            }
                        } else {
                            Some(0.0)
                        }
                    }
                }
                .ok_or(Error::DegenerateSpeaker)?;
                mass[j] *= s;
            }
            let label = observations[..=k]
                .iter()
                .map(|o| format!("{} ({})", o.u, o.goal))
                .collect::<Vec<_>>()
                .join(", ");
            steps.push(BeliefState::from_weights(self.table.clone(), mass.clone(), &label)?);
        }
        Ok(steps)
    }
}

//! Joint `(world, bias)` inference and the level-2 speaker who pays a cost
//! for appearing biased to that listener.

use serde::Serialize;

use super::{choice_prob, scaled, BeliefState, BetaPrior, SpeakerParams, StickContest};
use crate::error::{Error, Result};
use crate::world::{Goal, StickSet};

/// Posterior of a listener that infers both the world and the speaker's bias.
#[derive(Debug, Clone)]
pub struct JointBelief {
    /// `joint[k][j]`: probability of bias `beta_support[k]` and world `j`.
    pub joint: Vec<Vec<f64>>,
    pub beta_support: Vec<f64>,
    pub beta_marginal: Vec<f64>,
    pub world: BeliefState,
}

impl JointBelief {
    pub fn posterior_mean_beta(&self) -> f64 {
        self.beta_support
            .iter()
            .zip(&self.beta_marginal)
            .map(|(b, p)| b * p)
            .sum()
    }

    /// Expected `|beta|` under the bias marginal.
    pub fn expected_abs_beta(&self) -> f64 {
        self.beta_support
            .iter()
            .zip(&self.beta_marginal)
            .map(|(b, p)| b.abs() * p)
            .sum()
    }
}

/// What the level-2 speaker needs from the joint listener, per grid length:
/// `ln P_L1(goal | u)` and the perceived-bias cost `E[|beta| | u]`.
#[derive(Debug, Clone, Serialize)]
pub struct Level2Inputs {
    pub log_goal: Vec<f64>,
    pub cost: Vec<f64>,
}

impl StickContest {
    pub fn joint_listener(&self, u: f64, goal: Goal, beta_prior: &BetaPrior) -> Result<JointBelief> {
        let ui = self.grid().require_index(u)?;
        let worlds = &self.table.worlds;
        let mut joint = Vec::with_capacity(beta_prior.support().len());
        let mut total = 0.0;
        for (&b, &pb) in beta_prior.support().iter().zip(beta_prior.weights()) {
            let lw = self.level1_log_weights(goal, b);
            let mut row = Vec::with_capacity(worlds.len());
            for w in worlds {
                let s = choice_prob(&w.present, ui, &lw).ok_or(Error::DegenerateSpeaker)?;
                let m = pb * w.prob * s;
                total += m;
                row.push(m);
            }
            joint.push(row);
        }
        if !(total > 0.0) {
            return Err(Error::EmptySupport(format!("u = {u}")));
        }
        let mut world_weights = vec![0.0; worlds.len()];
        let mut beta_marginal = Vec::with_capacity(joint.len());
        for row in &mut joint {
            let mut mass = 0.0;
            for (j, m) in row.iter_mut().enumerate() {
                *m /= total;
                mass += *m;
                world_weights[j] += *m;
            }
            beta_marginal.push(mass);
        }
        let world = BeliefState::from_weights(self.table.clone(), world_weights, &format!("u = {u}"))?;
        Ok(JointBelief {
            joint,
            beta_support: beta_prior.support().to_vec(),
            beta_marginal,
            world,
        })
    }

    /// `E[|beta|]` under the joint listener's bias posterior after `u`.
    pub fn perceived_bias_cost(&self, u: f64, goal: Goal, beta_prior: &BetaPrior) -> Result<f64> {
        Ok(self.joint_listener(u, goal, beta_prior)?.expected_abs_beta())
    }

    /// Joint-listener belief in `goal` and perceived-bias cost for every grid
    /// length, computed in one sweep over `(beta, world)`.
    pub fn level2_inputs(&self, goal: Goal, beta_prior: &BetaPrior) -> Result<Level2Inputs> {
        let k = self.grid().len();
        let mut den = vec![0.0; k];
        let mut hit = vec![0.0; k];
        let mut abs_beta = vec![0.0; k];
        for (&b, &pb) in beta_prior.support().iter().zip(beta_prior.weights()) {
            let lw = self.level1_log_weights(goal, b);
            for w in &self.table.worlds {
                for &(v, _) in &w.present {
                    let s = choice_prob(&w.present, v, &lw).ok_or(Error::DegenerateSpeaker)?;
                    let m = pb * w.prob * s;
                    den[v] += m;
                    abs_beta[v] += m * b.abs();
                    if w.truth.satisfies(goal) {
                        hit[v] += m;
                    }
                }
            }
        }
        let mut log_goal = Vec::with_capacity(k);
        let mut cost = Vec::with_capacity(k);
        for v in 0..k {
            if den[v] > 0.0 {
                log_goal.push((hit[v] / den[v]).ln());
                cost.push(abs_beta[v] / den[v]);
            } else {
                log_goal.push(f64::NEG_INFINITY);
                cost.push(0.0);
            }
        }
        Ok(Level2Inputs { log_goal, cost })
    }

    /// Cached inputs for the engine's default bias prior.
    pub fn default_level2_inputs(&self, goal: Goal) -> Result<&Level2Inputs> {
        let cell = &self.level2_cache[goal.index()];
        if let Some(v) = cell.get() {
            return Ok(v);
        }
        let computed = self.level2_inputs(goal, &self.default_beta_prior)?;
        Ok(cell.get_or_init(|| computed))
    }

    /// Level-2 log-weights: `alpha * |beta| * (ln P_L1(goal|u) - w_c * C(u))`.
    pub(crate) fn level2_log_weights(&self, inputs: &Level2Inputs, params: &SpeakerParams) -> Vec<f64> {
        let scale = params.alpha * params.beta.abs();
        inputs
            .log_goal
            .iter()
            .zip(&inputs.cost)
            .map(|(&lg, &c)| scaled(scale, lg - params.cost_weight * c))
            .collect()
    }

    /// Distribution over the lengths in `w` revealed by a speaker who reasons
    /// about the joint listener and dislikes looking biased.
    pub fn level2_speaker(
        &self,
        w: &StickSet,
        goal: Goal,
        params: &SpeakerParams,
        beta_prior: &BetaPrior,
    ) -> Result<Vec<(f64, f64)>> {
        params.validate()?;
        if params.level != 2 {
            return Err(Error::InvalidParameter("level2_speaker needs level = 2".into()));
        }
        let inputs = self.level2_inputs(goal, beta_prior)?;
        let lw = self.level2_log_weights(&inputs, params);
        self.choice_dist(w, &lw)
    }

    /// Listener who inverts the level-2 speaker (default bias prior) with a
    /// known bias and cost weight.
    pub fn level2_listener(&self, u: f64, goal: Goal, beta: f64, cost_weight: f64) -> Result<BeliefState> {
        let params = SpeakerParams::level2(beta, cost_weight);
        params.validate()?;
        let ui = self.grid().require_index(u)?;
        let inputs = self.default_level2_inputs(goal)?;
        let lw = self.level2_log_weights(inputs, &params);
        self.speaker_posterior(ui, &lw, &format!("u = {u}"))
    }

    /// As [`StickContest::level2_listener`] with an explicit bias prior for the
    /// inner joint listener.
    pub fn level2_listener_with(
        &self,
        u: f64,
        goal: Goal,
        params: &SpeakerParams,
        beta_prior: &BetaPrior,
    ) -> Result<BeliefState> {
        params.validate()?;
        let ui = self.grid().require_index(u)?;
        let inputs = self.level2_inputs(goal, beta_prior)?;
        let lw = self.level2_log_weights(&inputs, params);
        self.speaker_posterior(ui, &lw, &format!("u = {u}"))
    }

    /// `p_longer` of the level-2 listener at every grid length.
    pub fn level2_p_longer_all(&self, goal: Goal, beta: f64, cost_weight: f64) -> Result<Vec<f64>> {
        let inputs = self.default_level2_inputs(goal)?;
        let lw = self.level2_log_weights(inputs, &SpeakerParams::level2(beta, cost_weight));
        Ok(self
            .goal_probabilities_all(&lw)?
            .into_iter()
            .map(|m| m.map_or(f64::NAN, |(l, _)| l))
            .collect())
    }
}

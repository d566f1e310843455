//! Recursive listener/speaker models for the Stick Contest.
//!
//! Every listener here is Bayes' rule over the enumerated worlds with some
//! speaker model as the likelihood. The speaker always reveals one of the
//! sticks actually in the set, picking a slot with probability proportional
//! to `exp(weight(u))`, so a length present `c` times is chosen with
//! probability proportional to `c * exp(weight(u))`. The literal listener is
//! the special case of zero weights, i.e. a uniformly random slot, which is
//! why the pragmatic listener at `beta = 0` coincides with it exactly.

mod level2;
mod sequential;

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::{
    Goal, LengthGrid, PropositionPrior, StickSet, Truth, WorldPrior, WorldTable,
};

pub use level2::{JointBelief, Level2Inputs};
pub use sequential::{ListenerKind, Observation, SecondPick};

/// Softmax speaker parameters.
///
/// At level 1 the persuasive utility is scaled by `alpha * beta`; only the
/// product matters. At level 2 the utility is scaled by `alpha * |beta|` and
/// includes the perceived-bias cost weighted by `cost_weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeakerParams {
    pub alpha: f64,
    pub beta: f64,
    pub cost_weight: f64,
    pub level: u8,
}

impl SpeakerParams {
    pub fn level1(beta: f64) -> Self {
        Self {
            alpha: 1.0,
            beta,
            cost_weight: 0.0,
            level: 1,
        }
    }

    pub fn level2(beta: f64, cost_weight: f64) -> Self {
        Self {
            alpha: 1.0,
            beta,
            cost_weight,
            level: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        if !self.beta.is_finite() {
            return Err(Error::InvalidParameter("beta must be finite".into()));
        }
        if !(self.cost_weight >= 0.0) || !self.cost_weight.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cost weight must be finite and >= 0, got {}",
                self.cost_weight
            )));
        }
        if !matches!(self.level, 1 | 2) {
            return Err(Error::InvalidParameter(format!(
                "recursion level must be 1 or 2, got {}",
                self.level
            )));
        }
        Ok(())
    }
}

/// Discrete prior over the speaker bias used by the joint listener.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    support: Vec<f64>,
    weights: Vec<f64>,
}

impl BetaPrior {
    pub fn new(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != weights.len() {
            return Err(Error::InvalidParameter(
                "beta prior needs matching non-empty support and weights".into(),
            ));
        }
        if support.iter().any(|b| !b.is_finite()) || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidParameter(
                "beta prior support must be finite and weights non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "beta prior weights sum to {total}, not 1"
            )));
        }
        Ok(Self { support, weights })
    }

    /// `points` evenly spaced values on `[lo, hi]` with equal weight.
    pub fn uniform(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if points == 0 || !(hi >= lo) {
            return Err(Error::InvalidParameter("empty beta grid".into()));
        }
        let support: Vec<f64> = if points == 1 {
            vec![lo]
        } else {
            (0..points)
                .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
                .collect()
        };
        let weights = vec![1.0 / points as f64; points];
        Self::new(support, weights)
    }

    pub fn point(beta: f64) -> Self {
        Self {
            support: vec![beta],
            weights: vec![1.0],
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl Default for BetaPrior {
    /// 101 equally weighted points on `[0, 10]`.
    fn default() -> Self {
        Self::uniform(0.0, 10.0, 101).expect("static prior")
    }
}

/// A listener's posterior over worlds.
#[derive(Debug, Clone)]
pub struct BeliefState {
    table: Arc<WorldTable>,
    posterior: Vec<f64>,
    pub p_longer: f64,
    pub p_shorter: f64,
    pub p_tie: f64,
}

impl BeliefState {
    fn from_weights(table: Arc<WorldTable>, mut weights: Vec<f64>, what: &str) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::EmptySupport(what.to_string()));
        }
        let (mut longer, mut shorter, mut tie) = (0.0, 0.0, 0.0);
        for (w, p) in table.worlds.iter().zip(weights.iter_mut()) {
            *p /= total;
            match w.truth {
                Truth::Longer => longer += *p,
                Truth::Shorter => shorter += *p,
                Truth::Tie => tie += *p,
            }
        }
        Ok(Self {
            table,
            posterior: weights,
            p_longer: longer,
            p_shorter: shorter,
            p_tie: tie,
        })
    }

    pub fn p(&self, goal: Goal) -> f64 {
        match goal {
            Goal::Longer => self.p_longer,
            Goal::Shorter => self.p_shorter,
        }
    }

    /// Posterior probabilities aligned with the engine's world table.
    pub fn probabilities(&self) -> &[f64] {
        &self.posterior
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StickSet, f64)> + '_ {
        self.table
            .worlds
            .iter()
            .zip(&self.posterior)
            .map(|(w, &p)| (&w.sticks, p))
    }

    pub fn probability_of(&self, sticks: &StickSet) -> f64 {
        self.iter()
            .find(|(s, _)| *s == sticks)
            .map_or(0.0, |(_, p)| p)
    }
}

/// `c * x` with `0 * inf = 0`.
pub(crate) fn scaled(c: f64, x: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * x
    }
}

/// Probability that a softmax speaker holding `present` reveals `target`,
/// given per-grid-index log-weights. When every present length has weight
/// `-inf` the speaker picks a slot uniformly, the limit of smoothing each
/// utility by a vanishing constant.
pub(crate) fn choice_prob(present: &[(usize, u32)], target: usize, log_weights: &[f64]) -> Option<f64> {
    let mut target_count = 0u32;
    let mut max = f64::NEG_INFINITY;
    for &(v, c) in present {
        if v == target {
            target_count = c;
        }
        max = max.max(log_weights[v]);
    }
    if target_count == 0 {
        return Some(0.0);
    }
    if max == f64::NEG_INFINITY {
        let n: u32 = present.iter().map(|(_, c)| c).sum();
        return Some(f64::from(target_count) / f64::from(n));
    }
    if max == f64::INFINITY {
        let top: u32 = present
            .iter()
            .filter(|(v, _)| log_weights[*v] == f64::INFINITY)
            .map(|(_, c)| c)
            .sum();
        return Some(if log_weights[target] == f64::INFINITY {
            f64::from(target_count) / f64::from(top)
        } else {
            0.0
        });
    }
    let z: f64 = present
        .iter()
        .map(|&(v, c)| f64::from(c) * (log_weights[v] - max).exp())
        .sum();
    Some(f64::from(target_count) * (log_weights[target] - max).exp() / z)
}

/// Exact inference engine over one enumerated world prior.
#[derive(Debug)]
pub struct StickContest {
    table: Arc<WorldTable>,
    prior_marginals: PropositionPrior,
    /// `ln P_L0(goal | u)` per goal and grid index.
    log_literal: [Vec<f64>; 2],
    default_beta_prior: BetaPrior,
    level2_cache: [OnceLock<Level2Inputs>; 2],
}

impl StickContest {
    pub fn new(prior: &WorldPrior) -> Result<Self> {
        Self::with_beta_prior(prior, BetaPrior::default())
    }

    /// Engine whose level-2 speaker reasons about a joint listener with the
    /// given bias prior.
    pub fn with_beta_prior(prior: &WorldPrior, beta_prior: BetaPrior) -> Result<Self> {
        let table = prior.table()?.into_shared();
        let mut marg = PropositionPrior {
            longer: 0.0,
            shorter: 0.0,
            tie: 0.0,
        };
        for w in &table.worlds {
            match w.truth {
                Truth::Longer => marg.longer += w.prob,
                Truth::Shorter => marg.shorter += w.prob,
                Truth::Tie => marg.tie += w.prob,
            }
        }
        let mut engine = Self {
            table,
            prior_marginals: marg,
            log_literal: [Vec::new(), Vec::new()],
            default_beta_prior: beta_prior,
            level2_cache: [OnceLock::new(), OnceLock::new()],
        };
        let zeros = vec![0.0; engine.grid().len()];
        let literal = engine.goal_probabilities_all(&zeros)?;
        for goal in [Goal::Longer, Goal::Shorter] {
            engine.log_literal[goal.index()] = literal
                .iter()
                .map(|m| m.map_or(f64::NEG_INFINITY, |(l, s)| pick(goal, l, s).ln()))
                .collect();
        }
        Ok(engine)
    }

    pub fn table(&self) -> &Arc<WorldTable> {
        &self.table
    }

    pub fn grid(&self) -> &LengthGrid {
        &self.table.grid
    }

    pub fn n(&self) -> u32 {
        self.table.n
    }

    pub fn prior_marginals(&self) -> PropositionPrior {
        self.prior_marginals
    }

    pub fn default_beta_prior(&self) -> &BetaPrior {
        &self.default_beta_prior
    }

    /// Listener posterior when a speaker with per-length `log_weights` revealed `u`.
    pub(crate) fn speaker_posterior(&self, ui: usize, log_weights: &[f64], what: &str) -> Result<BeliefState> {
        let mut weights = Vec::with_capacity(self.table.len());
        for w in &self.table.worlds {
            let s = choice_prob(&w.present, ui, log_weights).ok_or(Error::DegenerateSpeaker)?;
            weights.push(w.prob * s);
        }
        BeliefState::from_weights(self.table.clone(), weights, what)
    }

    /// `(P(longer | u), P(shorter | u))` for every grid length in one pass;
    /// `None` for lengths no world can produce.
    pub(crate) fn goal_probabilities_all(&self, log_weights: &[f64]) -> Result<Vec<Option<(f64, f64)>>> {
        let k = self.grid().len();
        let mut den = vec![0.0; k];
        let mut longer = vec![0.0; k];
        let mut shorter = vec![0.0; k];
        for w in &self.table.worlds {
            let mut max = f64::NEG_INFINITY;
            for &(v, _) in &w.present {
                max = max.max(log_weights[v]);
            }
            if max.is_infinite() {
                for &(v, _) in &w.present {
                    let s = choice_prob(&w.present, v, log_weights).expect("target is present");
                    accumulate(w.truth, w.prob * s, v, &mut den, &mut longer, &mut shorter);
                }
                continue;
            }
            let z: f64 = w
                .present
                .iter()
                .map(|&(v, c)| f64::from(c) * (log_weights[v] - max).exp())
                .sum();
            for &(v, c) in &w.present {
                let s = f64::from(c) * (log_weights[v] - max).exp() / z;
                accumulate(w.truth, w.prob * s, v, &mut den, &mut longer, &mut shorter);
            }
        }
        Ok((0..k)
            .map(|v| (den[v] > 0.0).then(|| (longer[v] / den[v], shorter[v] / den[v])))
            .collect())
    }

    fn index(&self, u: f64) -> Result<usize> {
        self.grid().require_index(u)
    }

    /// Level-1 speaker log-weights for every grid length.
    pub(crate) fn level1_log_weights(&self, goal: Goal, scale: f64) -> Vec<f64> {
        self.log_literal[goal.index()]
            .iter()
            .map(|&x| scaled(scale, x))
            .collect()
    }

    /// Posterior of a listener who takes the revealed stick at face value.
    pub fn literal_listener(&self, u: f64) -> Result<BeliefState> {
        let ui = self.index(u)?;
        let zeros = vec![0.0; self.grid().len()];
        self.speaker_posterior(ui, &zeros, &format!("u = {u}"))
    }

    /// `ln P_L0(goal | u)`; `-inf` when the literal listener rules the goal out.
    pub fn persuasive_utility(&self, u: f64, goal: Goal) -> Result<f64> {
        let ui = self.index(u)?;
        Ok(self.log_literal[goal.index()][ui])
    }

    /// Distribution over the lengths in `w` that a level-1 persuasive speaker
    /// reveals, as `(length, probability)` pairs in ascending length.
    pub fn speaker_choice_dist(
        &self,
        w: &StickSet,
        goal: Goal,
        params: &SpeakerParams,
    ) -> Result<Vec<(f64, f64)>> {
        params.validate()?;
        if params.level != 1 {
            return Err(Error::InvalidParameter(
                "speaker_choice_dist is the level-1 speaker; use level2_speaker".into(),
            ));
        }
        let lw = self.level1_log_weights(goal, params.alpha * params.beta);
        self.choice_dist(w, &lw)
    }

    pub(crate) fn choice_dist(&self, w: &StickSet, log_weights: &[f64]) -> Result<Vec<(f64, f64)>> {
        if w.counts().len() != self.grid().len() {
            return Err(Error::Validation("stick set built on a different grid".into()));
        }
        let present: Vec<_> = w.present().collect();
        if present.is_empty() {
            return Err(Error::Validation("empty stick set".into()));
        }
        if present.iter().all(|&(v, _)| log_weights[v] == f64::NEG_INFINITY) {
            return Err(Error::DegenerateSpeaker);
        }
        present
            .iter()
            .map(|&(v, _)| {
                choice_prob(&present, v, log_weights)
                    .map(|p| (self.grid().value(v), p))
                    .ok_or(Error::DegenerateSpeaker)
            })
            .collect()
    }

    /// Listener who knows the speaker wants `goal` with bias `beta`.
    pub fn pragmatic_listener(&self, u: f64, goal: Goal, beta: f64) -> Result<BeliefState> {
        if !beta.is_finite() {
            return Err(Error::InvalidParameter("beta must be finite".into()));
        }
        let ui = self.index(u)?;
        let lw = self.level1_log_weights(goal, beta);
        self.speaker_posterior(ui, &lw, &format!("u = {u}"))
    }

    /// Signed change `prior(goal) - posterior(goal)` after the pragmatic
    /// listener sees `u`.
    pub fn belief_shift(&self, u: f64, goal: Goal, beta: f64) -> Result<f64> {
        let post = self.pragmatic_listener(u, goal, beta)?;
        Ok(self.prior_marginals.of(goal) - post.p(goal))
    }

    /// Size of the weak evidence effect: how far belief in `goal` drops after
    /// evidence favouring `goal`, or zero if it does not drop.
    pub fn effect_size(&self, u: f64, goal: Goal, beta: f64) -> Result<f64> {
        let side = self.grid().side_of(u);
        if !side.satisfies(goal) {
            return Err(Error::InvalidParameter(format!(
                "evidence {u} does not favour {goal}"
            )));
        }
        Ok(self.belief_shift(u, goal, beta)?.max(0.0))
    }

    /// `p_longer` of the literal listener at every grid length.
    pub fn literal_p_longer_all(&self) -> Vec<f64> {
        self.log_literal[Goal::Longer.index()]
            .iter()
            .map(|x| x.exp())
            .collect()
    }

    /// `p_longer` of the pragmatic listener at every grid length.
    pub fn pragmatic_p_longer_all(&self, goal: Goal, beta: f64) -> Result<Vec<f64>> {
        let lw = self.level1_log_weights(goal, beta);
        Ok(self
            .goal_probabilities_all(&lw)?
            .into_iter()
            .map(|m| m.map_or(f64::NAN, |(l, _)| l))
            .collect())
    }
}

fn pick(goal: Goal, longer: f64, shorter: f64) -> f64 {
    match goal {
        Goal::Longer => longer,
        Goal::Shorter => shorter,
    }
}

fn accumulate(truth: Truth, mass: f64, v: usize, den: &mut [f64], longer: &mut [f64], shorter: &mut [f64]) {
    den[v] += mass;
    match truth {
        Truth::Longer => longer[v] += mass,
        Truth::Shorter => shorter[v] += mass,
        Truth::Tie => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine() -> StickContest {
        StickContest::new(&WorldPrior::experiment()).unwrap()
    }

    fn set(ls: &[f64]) -> StickSet {
        StickSet::from_lengths(&LengthGrid::experiment(), ls).unwrap()
    }

    #[test]
    fn literal_listener_symmetric_at_midpoint() {
        let b = engine().literal_listener(5.0).unwrap();
        assert!((b.p_longer - b.p_shorter).abs() < 1e-12);
        let total: f64 = b.probabilities().iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn literal_listener_raises_belief_above_midpoint() {
        let e = engine();
        let b = e.literal_listener(6.0).unwrap();
        assert!(b.p_longer > e.prior_marginals().longer);
    }

    #[test]
    fn off_grid_evidence_rejected() {
        assert!(matches!(engine().literal_listener(10.0), Err(Error::NotOnGrid(_))));
    }

    #[test]
    fn zero_bias_speaker_is_uniform_over_slots() {
        let e = engine();
        let w = set(&[2., 4., 8., 8., 9.]);
        let d = e
            .speaker_choice_dist(&w, Goal::Longer, &SpeakerParams::level1(0.0))
            .unwrap();
        assert_eq!(d, vec![(2.0, 0.2), (4.0, 0.2), (8.0, 0.4), (9.0, 0.2)]);
    }

    #[test]
    fn large_bias_speaker_picks_strongest() {
        let e = engine();
        let d = e
            .speaker_choice_dist(&set(&[2., 4., 7., 8., 9.]), Goal::Longer, &SpeakerParams::level1(1e4))
            .unwrap();
        assert_eq!(d.last().unwrap().0, 9.0);
        assert!(d.last().unwrap().1 > 1.0 - 1e-12);
    }

    #[test]
    fn negative_bias_flips_preference() {
        let e = engine();
        let d = e
            .speaker_choice_dist(&set(&[2., 4., 7., 8., 9.]), Goal::Longer, &SpeakerParams::level1(-3.0))
            .unwrap();
        assert!(d.windows(2).all(|p| p[0].1 > p[1].1));
    }

    #[test]
    fn level2_params_rejected_by_level1_speaker() {
        let e = engine();
        let r = e.speaker_choice_dist(&set(&[1., 2., 3., 4., 5.]), Goal::Longer, &SpeakerParams::level2(1.0, 0.0));
        assert!(r.is_err());
    }

    #[test]
    fn degenerate_speaker_is_an_error() {
        let grid = LengthGrid::new(vec![6.0, 7.0], 5.0).unwrap();
        let e = StickContest::new(&WorldPrior::new(grid.clone(), 2).unwrap()).unwrap();
        assert_eq!(e.persuasive_utility(6.0, Goal::Shorter).unwrap(), f64::NEG_INFINITY);
        let w = StickSet::from_lengths(&grid, &[6.0, 7.0]).unwrap();
        let r = e.speaker_choice_dist(&w, Goal::Shorter, &SpeakerParams::level1(1.0));
        assert!(matches!(r, Err(Error::DegenerateSpeaker)));
        // zero bias never consults the utility
        assert!(e.speaker_choice_dist(&w, Goal::Shorter, &SpeakerParams::level1(0.0)).is_ok());
    }

    #[test]
    fn effect_size_requires_favourable_evidence() {
        let e = engine();
        assert!(e.effect_size(4.0, Goal::Longer, 2.0).is_err());
        assert!(e.effect_size(5.0, Goal::Longer, 2.0).is_err());
        assert_eq!(e.effect_size(6.0, Goal::Longer, 0.0).unwrap(), 0.0);
        assert!(e.effect_size(6.0, Goal::Longer, 2.0).unwrap() > 0.0);
        assert!(e.effect_size(4.0, Goal::Shorter, 2.0).unwrap() > 0.0);
    }

    #[test]
    fn fast_path_matches_single_listener() {
        let e = engine();
        let all = e.pragmatic_p_longer_all(Goal::Shorter, 2.5).unwrap();
        for (i, &u) in e.grid().values().iter().enumerate() {
            let b = e.pragmatic_listener(u, Goal::Shorter, 2.5).unwrap();
            assert!((b.p_longer - all[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_prior_validation() {
        assert!(BetaPrior::new(vec![1.0], vec![0.5]).is_err());
        assert!(BetaPrior::new(vec![], vec![]).is_err());
        let p = BetaPrior::default();
        assert_eq!(p.support().len(), 101);
        assert_eq!(p.support()[100], 10.0);
    }
}

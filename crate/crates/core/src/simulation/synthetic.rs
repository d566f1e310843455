//! Synthetic participants drawn from the speaker-dependent listener mixture.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::data::{ContestantOrder, ExampleSet, RawRecord, ResponseRecord, SpeakerGroup};
use crate::inference::model::RESPONSE_SD;
use crate::rsa::{ListenerKind, Observation, SecondPick, StickContest};
use crate::world::{Goal, Truth};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticConfig {
    pub n_participants: usize,
    /// Proportions of the strongest, second-strongest and weaker groups.
    pub group_proportions: [f64; 3],
    pub beta: f64,
    pub offset: f64,
    /// Probability of a pragmatic (rather than literal) judge, per group.
    pub p_z: [f64; 3],
    /// Sampling weights for evidence 1..=k steps from the midpoint.
    pub distance_weights: Vec<f64>,
    pub long_first_fraction: f64,
    /// Also simulate the second contestant's reveal and judgment.
    pub second_judgment: bool,
    pub second_pick: SecondPick,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_participants: 500,
            group_proportions: [0.67, 0.165, 0.165],
            beta: 2.26,
            offset: -0.11,
            p_z: [0.99, 0.1, 0.1],
            distance_weights: vec![0.4, 0.2, 0.2, 0.2],
            long_first_fraction: 0.5,
            second_judgment: true,
            second_pick: SecondPick::Independent,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.group_proportions.iter().sum();
        if (total - 1.0).abs() > 1e-9 || self.group_proportions.iter().any(|p| *p < 0.0) {
            return Err(Error::Config(format!("group proportions must sum to 1 (got {total})")));
        }
        if self.p_z.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config("p_z values must lie in [0, 1]".into()));
        }
        if self.distance_weights.is_empty() || self.distance_weights.iter().any(|w| *w < 0.0) || self.distance_weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config("distance weights must be non-negative with a positive sum".into()));
        }
        if !(0.0..=1.0).contains(&self.long_first_fraction) {
            return Err(Error::Config("long_first_fraction must lie in [0, 1]".into()));
        }
        if !self.beta.is_finite() || !self.offset.is_finite() {
            return Err(Error::Config("beta and offset must be finite".into()));
        }
        Ok(())
    }
}

fn pick_weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Grid lengths favouring `goal`, nearest the midpoint first.
fn favourable(engine: &StickContest, goal: Goal) -> Vec<f64> {
    let grid = engine.grid();
    let mut v: Vec<f64> = grid
        .values()
        .iter()
        .copied()
        .filter(|&u| grid.side_of(u) != Truth::Tie && grid.side_of(u).satisfies(goal))
        .collect();
    if goal == Goal::Shorter {
        v.reverse();
    }
    v
}

fn respond(rng: &mut ChaCha8Rng, mu: f64, offset: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    (mu + offset + RESPONSE_SD * z).clamp(0.0, 1.0) * 100.0
}

/// Participants drawn independently; participant `i` uses its own stream of
/// the seeded generator so records do not depend on generation order.
pub fn generate_synthetic(engine: &StickContest, example: &ExampleSet, cfg: &SyntheticConfig) -> Result<Vec<ResponseRecord>> {
    cfg.validate()?;
    let near = [favourable(engine, Goal::Longer), favourable(engine, Goal::Shorter)];
    if near.iter().any(|v| v.len() < cfg.distance_weights.len()) {
        return Err(Error::Config(format!(
            "grid has fewer than {} lengths on each side of the midpoint",
            cfg.distance_weights.len()
        )));
    }
    let width = cfg.n_participants.to_string().len();
    let mut records = Vec::with_capacity(cfg.n_participants);
    for i in 0..cfg.n_participants {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);

        let group = SpeakerGroup::ALL[pick_weighted(&mut rng, &cfg.group_proportions)];
        let order = if rng.random::<f64>() < cfg.long_first_fraction {
            ContestantOrder::LongFirst
        } else {
            ContestantOrder::ShortFirst
        };
        let goal = order.goal();
        let ranked = example.ranked(goal);
        let speaker_choice = match group {
            SpeakerGroup::Strongest => ranked[0],
            SpeakerGroup::SecondStrongest => ranked[1],
            SpeakerGroup::Weaker => ranked[2 + rng.random_range(0..ranked.len() - 2)],
        };
        let d = pick_weighted(&mut rng, &cfg.distance_weights);
        let evidence_1 = near[goal.index()][d];
        let pragmatic = rng.random::<f64>() < cfg.p_z[group.index()];
        let kind = if pragmatic {
            ListenerKind::Pragmatic { beta: cfg.beta }
        } else {
            ListenerKind::Literal
        };
        let first = Observation { u: evidence_1, goal };
        let mu1 = engine.sequential_update(&[first], kind, cfg.second_pick)?[0].p_longer;
        let response_1 = respond(&mut rng, mu1, cfg.offset);

        let (evidence_2, response_2) = if cfg.second_judgment {
            let other = goal.opposite();
            let d2 = rng.random_range(0..cfg.distance_weights.len());
            let u2 = near[other.index()][d2];
            let obs = [first, Observation { u: u2, goal: other }];
            let mu2 = match engine.sequential_update(&obs, kind, cfg.second_pick) {
                Ok(steps) => steps[1].p_longer,
                Err(Error::EmptySupport(_)) => mu1,
                Err(e) => return Err(e),
            };
            (Some(u2), Some(respond(&mut rng, mu2, cfg.offset)))
        } else {
            (None, None)
        };

        let raw = RawRecord {
            participant_id: format!("s{:0width$}", i + 1),
            contestant_order: order,
            speaker_choice,
            evidence_1,
            response_1,
            evidence_2,
            response_2,
        };
        records.push(ResponseRecord::validated(raw, engine.grid(), example)?);
    }
    Ok(records)
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::{Goal, LengthGrid, Truth};

/// Which contestant presented the first piece of evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContestantOrder {
    LongFirst,
    ShortFirst,
}

impl ContestantOrder {
    /// Goal of the first contestant.
    pub fn goal(self) -> Goal {
        match self {
            ContestantOrder::LongFirst => Goal::Longer,
            ContestantOrder::ShortFirst => Goal::Shorter,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ContestantOrder::LongFirst => "long_first",
            ContestantOrder::ShortFirst => "short_first",
        }
    }
}

impl fmt::Display for ContestantOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ContestantOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "long_first" => Ok(ContestantOrder::LongFirst),
            "short_first" => Ok(ContestantOrder::ShortFirst),
            other => Err(Error::Validation(format!("unknown contestant order {other:?}"))),
        }
    }
}

/// Speaker-phase expectation: which stick the participant thought the first
/// contestant would show.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeakerGroup {
    Strongest,
    SecondStrongest,
    Weaker,
}

impl SpeakerGroup {
    pub const ALL: [SpeakerGroup; 3] = [
        SpeakerGroup::Strongest,
        SpeakerGroup::SecondStrongest,
        SpeakerGroup::Weaker,
    ];

    pub fn index(self) -> usize {
        match self {
            SpeakerGroup::Strongest => 0,
            SpeakerGroup::SecondStrongest => 1,
            SpeakerGroup::Weaker => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpeakerGroup::Strongest => "strongest",
            SpeakerGroup::SecondStrongest => "second",
            SpeakerGroup::Weaker => "weaker",
        }
    }
}

/// The stick set shown in the speaker-expectation phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleSet(pub Vec<f64>);

impl Default for ExampleSet {
    fn default() -> Self {
        Self(vec![2.0, 4.0, 7.0, 8.0, 9.0])
    }
}

impl ExampleSet {
    pub fn normalized() -> Self {
        Self(vec![0.2, 0.4, 0.7, 0.8, 0.9])
    }

    /// Example sticks ordered from most to least favourable to `goal`.
    pub fn ranked(&self, goal: Goal) -> Vec<f64> {
        let mut v = self.0.clone();
        v.sort_by(|a, b| a.total_cmp(b));
        if goal == Goal::Longer {
            v.reverse();
        }
        v
    }

    fn contains(&self, x: f64) -> bool {
        self.0.iter().any(|v| (v - x).abs() <= 1e-9 * v.abs().max(1.0))
    }
}

pub fn classify_speaker_group(order: ContestantOrder, choice: f64, example: &ExampleSet) -> Result<SpeakerGroup> {
    if !example.contains(choice) {
        return Err(Error::Validation(format!(
            "speaker choice {choice} is not in the example set"
        )));
    }
    let ranked = example.ranked(order.goal());
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(1.0);
    Ok(if same(choice, ranked[0]) {
        SpeakerGroup::Strongest
    } else if ranked.len() > 1 && same(choice, ranked[1]) {
        SpeakerGroup::SecondStrongest
    } else {
        SpeakerGroup::Weaker
    })
}

/// Slider position on `[0, 100]` to a probability.
pub fn normalize_response(slider: f64) -> Result<f64> {
    if !(0.0..=100.0).contains(&slider) {
        return Err(Error::Validation(format!("response out of range: {slider}")));
    }
    Ok(slider / 100.0)
}

/// One participant's speaker-phase choice and listener-phase judgments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub participant_id: String,
    pub contestant_order: ContestantOrder,
    pub speaker_choice: f64,
    pub speaker_group: SpeakerGroup,
    pub evidence_1: f64,
    pub response_1: f64,
    pub evidence_2: Option<f64>,
    pub response_2: Option<f64>,
}

/// Raw fields of a record before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub participant_id: String,
    pub contestant_order: ContestantOrder,
    pub speaker_choice: f64,
    pub evidence_1: f64,
    pub response_1: f64,
    pub evidence_2: Option<f64>,
    pub response_2: Option<f64>,
}

impl ResponseRecord {
    /// Validate raw fields against the grid and derive the speaker group.
    pub fn validated(raw: RawRecord, grid: &LengthGrid, example: &ExampleSet) -> Result<Self> {
        if raw.participant_id.is_empty() {
            return Err(Error::Validation("missing participant id".into()));
        }
        grid.require_index(raw.evidence_1)
            .map_err(|_| Error::Validation(format!("evidence {} not on the grid", raw.evidence_1)))?;
        let goal = raw.contestant_order.goal();
        if !grid.side_of(raw.evidence_1).satisfies(goal) {
            return Err(Error::Validation(format!(
                "evidence {} does not favour the first contestant ({goal})",
                raw.evidence_1
            )));
        }
        normalize_response(raw.response_1)?;
        if raw.evidence_2.is_some() != raw.response_2.is_some() {
            return Err(Error::Validation(
                "second evidence and second response must both be present or both empty".into(),
            ));
        }
        if let Some(e2) = raw.evidence_2 {
            grid.require_index(e2)
                .map_err(|_| Error::Validation(format!("evidence {e2} not on the grid")))?;
        }
        if let Some(r2) = raw.response_2 {
            normalize_response(r2)?;
        }
        let speaker_group = classify_speaker_group(raw.contestant_order, raw.speaker_choice, example)?;
        Ok(Self {
            participant_id: raw.participant_id,
            contestant_order: raw.contestant_order,
            speaker_choice: raw.speaker_choice,
            speaker_group,
            evidence_1: raw.evidence_1,
            response_1: raw.response_1,
            evidence_2: raw.evidence_2,
            response_2: raw.response_2,
        })
    }

    pub fn goal(&self) -> Goal {
        self.contestant_order.goal()
    }

    /// First response on the unit scale.
    pub fn y(&self) -> f64 {
        self.response_1 / 100.0
    }

    /// Distance of the first evidence from the midpoint, in grid steps.
    pub fn strength_cell(&self, grid: &LengthGrid) -> Option<usize> {
        let i = grid.index_of(self.evidence_1)?;
        let mid = grid.values().iter().position(|v| grid.side_of(*v) != Truth::Shorter)?;
        Some(if i >= mid { i - mid } else { mid - i })
    }
}

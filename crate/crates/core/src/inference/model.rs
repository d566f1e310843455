//! Response models: what each model family predicts for a first judgment and
//! the Gaussian response likelihood around that prediction.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::data::{ResponseRecord, SpeakerGroup};
use super::Target;
use crate::baselines::{adjust_update, evidence_strength, AdjustParams, StrengthMap};
use crate::error::{Error, Result};
use crate::rsa::StickContest;
use crate::world::Goal;

/// Fixed standard deviation of the response model.
pub const RESPONSE_SD: f64 = 0.3;

pub const BETA_BOUNDS: (f64, f64) = (0.0, 10.0);
pub const OFFSET_BOUNDS: (f64, f64) = (-0.5, 0.5);
pub const WEIGHT_BOUNDS: (f64, f64) = (0.0, 1.0);
pub const GROWTH_BOUNDS: (f64, f64) = (0.0, 10.0);
pub const REFERENCE_BOUNDS: (f64, f64) = (-1.0, 1.0);
pub const COST_WEIGHT_BOUNDS: (f64, f64) = (0.0, 5.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Rsa,
    Aa,
    Mas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Homogeneous,
    Heterogeneous,
    SpeakerDependent,
}

/// Depth of the listener used to predict a judgment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    J0,
    J1,
    J2,
}

macro_rules! parse_enum {
    ($ty:ty, $what:literal, { $($s:literal => $v:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($s => Ok($v),)+
                    other => Err(Error::InvalidModel(format!(concat!("unknown ", $what, " {:?}"), other))),
                }
            }
        }
    };
}

parse_enum!(Family, "model family", { "rsa" => Family::Rsa, "aa" => Family::Aa, "mas" => Family::Mas });
parse_enum!(Variant, "variant", {
    "homogeneous" => Variant::Homogeneous,
    "heterogeneous" => Variant::Heterogeneous,
    "speaker-dependent" => Variant::SpeakerDependent,
});
parse_enum!(Level, "level", { "j0" => Level::J0, "j1" => Level::J1, "j2" => Level::J2 });

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Rsa => "rsa",
            Family::Aa => "aa",
            Family::Mas => "mas",
        })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Homogeneous => "homogeneous",
            Variant::Heterogeneous => "heterogeneous",
            Variant::SpeakerDependent => "speaker-dependent",
        })
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Parse a comma-separated level list such as `J0,J1`.
pub fn parse_levels(s: &str) -> Result<Vec<Level>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}

/// A mixture component of a response model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    Listener(Level),
    Aa,
    Mas,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub variant: Variant,
    /// Listener levels mixed by RSA models; empty for AA/MAS.
    pub levels: Vec<Level>,
}

impl ModelSpec {
    pub fn new(family: Family, variant: Variant, mut levels: Vec<Level>) -> Result<Self> {
        levels.sort();
        levels.dedup();
        match family {
            Family::Rsa => {
                if levels.is_empty() {
                    levels = match variant {
                        Variant::Homogeneous => vec![Level::J1],
                        _ => vec![Level::J0, Level::J1],
                    };
                }
                match variant {
                    Variant::Homogeneous if levels.len() != 1 => {
                        return Err(Error::InvalidModel(
                            "a homogeneous model uses exactly one listener level".into(),
                        ))
                    }
                    Variant::Heterogeneous | Variant::SpeakerDependent if levels.len() < 2 => {
                        return Err(Error::InvalidModel(
                            "mixture variants need at least two listener levels".into(),
                        ))
                    }
                    _ => {}
                }
            }
            Family::Aa | Family::Mas => {
                if variant == Variant::SpeakerDependent {
                    return Err(Error::InvalidModel(
                        "the speaker-dependent variant is only defined for RSA models".into(),
                    ));
                }
                levels.clear();
            }
        }
        Ok(Self {
            family,
            variant,
            levels,
        })
    }

    pub fn rsa(variant: Variant, levels: Vec<Level>) -> Result<Self> {
        Self::new(Family::Rsa, variant, levels)
    }

    /// Mixture components in stick-breaking order (lowest first).
    pub fn components(&self) -> Vec<Component> {
        match (self.family, self.variant) {
            (Family::Rsa, _) => self.levels.iter().map(|&l| Component::Listener(l)).collect(),
            (_, Variant::Heterogeneous) => vec![Component::Aa, Component::Mas],
            (Family::Aa, _) => vec![Component::Aa],
            (Family::Mas, _) => vec![Component::Mas],
        }
    }

    pub fn label(&self) -> String {
        match self.family {
            Family::Rsa => {
                let levels: Vec<String> = self.levels.iter().map(Level::to_string).collect();
                format!("rsa/{}[{}]", self.variant, levels.join(","))
            }
            _ if self.variant == Variant::Heterogeneous => "aa+mas/heterogeneous".to_string(),
            f => format!("{f}/{}", self.variant),
        }
    }

    fn weight_groups(&self) -> usize {
        match self.variant {
            Variant::Homogeneous => 0,
            Variant::Heterogeneous => 1,
            Variant::SpeakerDependent => 3,
        }
    }
}

/// Named parameter values in a model's layout order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "BTreeMap<String, f64>", try_from = "BTreeMap<String, f64>")]
pub struct ParamVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

impl ParamVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }
}

impl From<ParamVector> for BTreeMap<String, f64> {
    fn from(p: ParamVector) -> Self {
        p.names.into_iter().zip(p.values).collect()
    }
}

impl TryFrom<BTreeMap<String, f64>> for ParamVector {
    type Error = std::convert::Infallible;

    fn try_from(map: BTreeMap<String, f64>) -> std::result::Result<Self, Self::Error> {
        let (names, values) = map.into_iter().unzip();
        Ok(Self { names, values })
    }
}

/// Parameter names, prior boxes and where each role lives in the vector.
#[derive(Debug, Clone)]
pub struct ParamLayout {
    pub names: Vec<String>,
    pub bounds: Vec<(f64, f64)>,
    beta: Option<usize>,
    cost_weight: Option<usize>,
    growth: Option<usize>,
    reference: Option<usize>,
    offset: usize,
    /// Stick-breaking weight indices per group, top component first.
    weights: Vec<Vec<usize>>,
}

impl ParamLayout {
    fn for_spec(spec: &ModelSpec) -> Self {
        let mut names = Vec::new();
        let mut bounds = Vec::new();
        let mut push = |name: String, b: (f64, f64)| {
            names.push(name);
            bounds.push(b);
            names.len() - 1
        };
        let components = spec.components();
        let has = |c: Component| components.contains(&c);
        let (mut beta, mut cost_weight, mut growth, mut reference) = (None, None, None, None);
        if spec.family == Family::Rsa {
            if has(Component::Listener(Level::J1)) || has(Component::Listener(Level::J2)) {
                beta = Some(push("beta".into(), BETA_BOUNDS));
            }
            if has(Component::Listener(Level::J2)) {
                cost_weight = Some(push("w_c".into(), COST_WEIGHT_BOUNDS));
            }
        } else {
            growth = Some(push("B".into(), GROWTH_BOUNDS));
            if has(Component::Mas) {
                reference = Some(push("R".into(), REFERENCE_BOUNDS));
            }
        }
        let offset = push("offset".into(), OFFSET_BOUNDS);

        let k = components.len();
        let labels: Vec<String> = components
            .iter()
            .map(|c| match c {
                Component::Listener(l) => l.to_string().to_ascii_lowercase(),
                Component::Aa => "aa".into(),
                Component::Mas => "mas".into(),
            })
            .collect();
        let mut weights = Vec::new();
        for g in 0..spec.weight_groups() {
            let suffix = if spec.variant == Variant::SpeakerDependent {
                format!("[{}]", SpeakerGroup::ALL[g].as_str())
            } else {
                String::new()
            };
            let idx = (1..k)
                .rev()
                .map(|c| {
                    let base = if k == 2 {
                        "p_z".to_string()
                    } else {
                        format!("p_z_{}", labels[c])
                    };
                    push(format!("{base}{suffix}"), WEIGHT_BOUNDS)
                })
                .collect();
            weights.push(idx);
        }
        Self {
            names,
            bounds,
            beta,
            cost_weight,
            growth,
            reference,
            offset,
            weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn vector(&self, values: Vec<f64>) -> ParamVector {
        ParamVector {
            names: self.names.clone(),
            values,
        }
    }

    /// Build a vector from `(name, value)` pairs; every name must be given.
    pub fn from_pairs(&self, pairs: &[(&str, f64)]) -> Result<Vec<f64>> {
        let mut out = vec![f64::NAN; self.dim()];
        for (name, v) in pairs {
            let i = self
                .index_of(name)
                .ok_or_else(|| Error::InvalidParameter(format!("model has no parameter {name:?}")))?;
            out[i] = *v;
        }
        if let Some(i) = out.iter().position(|v| v.is_nan()) {
            return Err(Error::InvalidParameter(format!("missing parameter {:?}", self.names[i])));
        }
        Ok(out)
    }

    pub fn in_support(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(&self.bounds)
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

/// Parameters a single component needs to predict a mean response.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComponentParams {
    pub beta: f64,
    pub cost_weight: f64,
    pub growth: f64,
    pub reference: f64,
}

/// Predicted belief in "longer" for first evidence `u` shown by a contestant
/// with `goal`, before the response offset.
pub fn predict_response(
    engine: &StickContest,
    component: Component,
    params: &ComponentParams,
    goal: Goal,
    u: f64,
) -> Result<f64> {
    match component {
        Component::Listener(Level::J0) => Ok(engine.literal_listener(u)?.p_longer),
        Component::Listener(Level::J1) => Ok(engine.pragmatic_listener(u, goal, params.beta)?.p_longer),
        Component::Listener(Level::J2) => {
            Ok(engine.level2_listener(u, goal, params.beta, params.cost_weight)?.p_longer)
        }
        Component::Aa | Component::Mas => {
            let map = StrengthMap::new(params.growth, engine.grid().midpoint())?;
            let adjust = if component == Component::Aa {
                AdjustParams::aa()
            } else {
                AdjustParams::mas(params.reference)
            };
            Ok(adjust_update(adjust.initial_belief, evidence_strength(u, &map), &adjust))
        }
    }
}

pub(crate) fn log_normal_pdf(y: f64, mean: f64, sd: f64) -> f64 {
    let z = (y - mean) / sd;
    -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone)]
struct Datum {
    y: f64,
    u: f64,
    goal: Goal,
    grid_index: usize,
    group: usize,
    participant: String,
}

/// A model bound to a dataset, ready for likelihood evaluation.
#[derive(Debug, Clone)]
pub struct CompiledModel {
    spec: ModelSpec,
    layout: ParamLayout,
    components: Vec<Component>,
    engine: Arc<StickContest>,
    data: Vec<Datum>,
    fingerprint: String,
}

impl CompiledModel {
    pub fn new(spec: ModelSpec, engine: Arc<StickContest>, records: &[ResponseRecord]) -> Result<Self> {
        let layout = ParamLayout::for_spec(&spec);
        let components = spec.components();
        let data = records
            .iter()
            .map(|r| {
                Ok(Datum {
                    y: r.y(),
                    u: r.evidence_1,
                    goal: r.goal(),
                    grid_index: engine.grid().require_index(r.evidence_1)?,
                    group: r.speaker_group.index(),
                    participant: r.participant_id.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec,
            layout,
            components,
            engine,
            data,
            fingerprint: data_fingerprint(records),
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn engine(&self) -> &Arc<StickContest> {
        &self.engine
    }

    pub fn n_data(&self) -> usize {
        self.data.len()
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn component_params(&self, theta: &[f64]) -> ComponentParams {
        let get = |i: Option<usize>| i.map_or(0.0, |i| theta[i]);
        ComponentParams {
            beta: get(self.layout.beta),
            cost_weight: get(self.layout.cost_weight),
            growth: get(self.layout.growth),
            reference: get(self.layout.reference),
        }
    }

    /// Component weights for a speaker group, in component order.
    pub fn mixture_weights(&self, theta: &[f64], group: usize) -> Vec<f64> {
        let k = self.components.len();
        if self.layout.weights.is_empty() {
            return vec![1.0];
        }
        let idx = &self.layout.weights[group.min(self.layout.weights.len() - 1)];
        let mut weights = vec![0.0; k];
        let mut remaining = 1.0;
        for (slot, &pi) in idx.iter().enumerate() {
            let c = k - 1 - slot;
            weights[c] = remaining * theta[pi];
            remaining -= weights[c];
        }
        weights[0] = remaining;
        weights
    }

    /// Mean prediction per component, per goal, per grid index.
    fn component_tables(&self, theta: &[f64]) -> Result<Vec<[Vec<f64>; 2]>> {
        let p = self.component_params(theta);
        let grid_len = self.engine.grid().len();
        self.components
            .iter()
            .map(|&c| {
                let mut out = [vec![f64::NAN; grid_len], vec![f64::NAN; grid_len]];
                for goal in [Goal::Longer, Goal::Shorter] {
                    out[goal.index()] = match c {
                        Component::Listener(Level::J0) => self.engine.literal_p_longer_all(),
                        Component::Listener(Level::J1) => self.engine.pragmatic_p_longer_all(goal, p.beta)?,
                        Component::Listener(Level::J2) => {
                            self.engine.level2_p_longer_all(goal, p.beta, p.cost_weight)?
                        }
                        Component::Aa | Component::Mas => self
                            .engine
                            .grid()
                            .values()
                            .iter()
                            .map(|&u| predict_response(&self.engine, c, &p, goal, u))
                            .collect::<Result<Vec<_>>>()?,
                    };
                }
                Ok(out)
            })
            .collect()
    }

    /// Per-datum log-likelihood written into `out`; returns the total.
    pub fn pointwise_log_likelihood(&self, theta: &[f64], out: &mut [f64]) -> Result<f64> {
        if theta.len() != self.layout.dim() {
            return Err(Error::InvalidParameter(format!(
                "expected {} parameters, got {}",
                self.layout.dim(),
                theta.len()
            )));
        }
        let tables = self.component_tables(theta)?;
        let offset = theta[self.layout.offset];
        let groups = self.layout.weights.len().max(1);
        let log_weights: Vec<Vec<f64>> = (0..groups)
            .map(|g| self.mixture_weights(theta, g).into_iter().map(f64::ln).collect())
            .collect();
        let mut terms = vec![0.0; self.components.len()];
        let mut total = 0.0;
        for (i, d) in self.data.iter().enumerate() {
            let lw = &log_weights[d.group.min(groups - 1)];
            for (c, table) in tables.iter().enumerate() {
                terms[c] = if lw[c] == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    let mu = table[d.goal.index()][d.grid_index];
                    lw[c] + log_normal_pdf(d.y, mu + offset, RESPONSE_SD)
                };
            }
            let ll = log_sum_exp(&terms);
            if !ll.is_finite() {
                return Err(Error::NonFiniteLikelihood {
                    index: i,
                    participant: d.participant.clone(),
                });
            }
            out[i] = ll;
            total += ll;
        }
        Ok(total)
    }

    pub fn log_likelihood(&self, theta: &[f64]) -> Result<f64> {
        let mut out = vec![0.0; self.data.len()];
        self.pointwise_log_likelihood(theta, &mut out)
    }

    /// Mixture-mean prediction (before offset) for one record's cell.
    pub fn predicted_mean(&self, theta: &[f64], record: &ResponseRecord) -> Result<f64> {
        let p = self.component_params(theta);
        let w = self.mixture_weights(theta, record.speaker_group.index());
        let mut mean = 0.0;
        for (c, &comp) in self.components.iter().enumerate() {
            if w[c] > 0.0 {
                mean += w[c] * predict_response(&self.engine, comp, &p, record.goal(), record.evidence_1)?;
            }
        }
        Ok(mean)
    }

    /// Check the dataset's support cells are usable before a long run.
    pub fn check(&self) -> Result<()> {
        let mid: Vec<f64> = self.layout.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
        self.log_likelihood(&mid).map(|_| ())
    }

    pub fn data_evidence(&self) -> impl Iterator<Item = (f64, Goal)> + '_ {
        self.data.iter().map(|d| (d.u, d.goal))
    }
}

impl Target for CompiledModel {
    fn bounds(&self) -> &[(f64, f64)] {
        &self.layout.bounds
    }

    fn log_likelihood(&self, theta: &[f64]) -> f64 {
        CompiledModel::log_likelihood(self, theta).unwrap_or(f64::NEG_INFINITY)
    }

    fn pointwise(&self, theta: &[f64], out: &mut [f64]) -> f64 {
        self.pointwise_log_likelihood(theta, out)
            .unwrap_or(f64::NEG_INFINITY)
    }

    fn n_data(&self) -> usize {
        self.data.len()
    }
}

/// SHA-256 over the canonical text form of the records.
pub fn data_fingerprint(records: &[ResponseRecord]) -> String {
    let mut h = Sha256::new();
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:?}"));
    for r in records {
        let line = format!(
            "{}|{}|{:?}|{:?}|{:?}|{}|{}\n",
            r.participant_id,
            r.contestant_order,
            r.speaker_choice,
            r.evidence_1,
            r.response_1,
            opt(r.evidence_2),
            opt(r.response_2)
        );
        h.update(line.as_bytes());
    }
    hex::encode(h.finalize())
}

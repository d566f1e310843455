//! The TOML run configuration. Unknown keys are rejected and every field
//! has a default, so `RunConfig::default()` is the full documented config.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::data::ExampleSet;
use crate::inference::map::SearchConfig;
use crate::inference::mcmc::McmcConfig;
use crate::inference::model::{parse_levels, Family, ModelSpec, Variant};
use crate::rsa::{BetaPrior, SecondPick, StickContest};
use crate::simulation::{SweepConfig, SyntheticConfig};
use crate::world::{Goal, LengthGrid, WorldPrior, DEFAULT_ENUMERATION_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridPreset {
    /// Lengths 1..9, midpoint 5.
    Experiment,
    /// Lengths 1..10, midpoint 5.
    Extended,
    /// Lengths 0.1..0.9, midpoint 0.5.
    Normalized,
    /// `values` and `midpoint` as given.
    Custom,
}

pub fn resolve_grid(preset: GridPreset, values: &[f64], midpoint: Option<f64>) -> Result<LengthGrid> {
    match preset {
        GridPreset::Experiment => Ok(LengthGrid::experiment()),
        GridPreset::Extended => Ok(LengthGrid::extended()),
        GridPreset::Normalized => Ok(LengthGrid::normalized()),
        GridPreset::Custom => {
            let mid = midpoint.ok_or_else(|| Error::Config("a custom grid needs a midpoint".into()))?;
            LengthGrid::new(values.to_vec(), mid)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BetaPriorConfig {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for BetaPriorConfig {
    fn default() -> Self {
        Self {
            lo: 0.0,
            hi: 10.0,
            points: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldConfig {
    pub grid: GridPreset,
    /// Lengths of a custom grid.
    pub values: Vec<f64>,
    /// Midpoint of a custom grid.
    pub midpoint: Option<f64>,
    pub n: u32,
    pub enumeration_cap: u64,
    /// Bias prior of the joint listener inside the level-2 speaker.
    pub beta_prior: BetaPriorConfig,
    pub second_pick: SecondPick,
    /// Speaker-phase stick set; empty means the grid's default.
    pub example_set: Vec<f64>,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            grid: GridPreset::Experiment,
            values: Vec::new(),
            midpoint: None,
            n: 5,
            enumeration_cap: DEFAULT_ENUMERATION_CAP as u64,
            beta_prior: BetaPriorConfig::default(),
            second_pick: SecondPick::Independent,
            example_set: Vec::new(),
        }
    }
}

impl WorldConfig {
    pub fn length_grid(&self) -> Result<LengthGrid> {
        resolve_grid(self.grid, &self.values, self.midpoint)
    }

    pub fn prior(&self) -> Result<WorldPrior> {
        Ok(WorldPrior::new(self.length_grid()?, self.n)?.with_cap(u128::from(self.enumeration_cap)))
    }

    pub fn engine(&self) -> Result<StickContest> {
        let b = &self.beta_prior;
        StickContest::with_beta_prior(&self.prior()?, BetaPrior::uniform(b.lo, b.hi, b.points)?)
    }

    pub fn example(&self) -> ExampleSet {
        if !self.example_set.is_empty() {
            ExampleSet(self.example_set.clone())
        } else if self.grid == GridPreset::Normalized {
            ExampleSet::normalized()
        } else {
            ExampleSet::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub family: Family,
    pub variant: Variant,
    /// Listener levels such as `["J0", "J1"]`; empty means the variant's default.
    pub levels: Vec<String>,
    pub map: SearchConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            family: Family::Rsa,
            variant: Variant::SpeakerDependent,
            levels: vec!["J0".into(), "J1".into()],
            map: SearchConfig::default(),
        }
    }
}

impl ModelConfig {
    pub fn spec(&self) -> Result<ModelSpec> {
        ModelSpec::new(self.family, self.variant, parse_levels(&self.levels.join(","))?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub betas: Vec<f64>,
    pub evidence: Vec<f64>,
    pub goal: Goal,
    pub grid: GridPreset,
    pub values: Vec<f64>,
    pub midpoint: Option<f64>,
    pub n: u32,
}

impl Default for SweepSection {
    fn default() -> Self {
        let d = SweepConfig::default();
        Self {
            betas: d.betas,
            evidence: d.evidence,
            goal: d.goal,
            grid: GridPreset::Extended,
            values: Vec::new(),
            midpoint: None,
            n: d.n,
        }
    }
}

impl SweepSection {
    pub fn sweep(&self) -> Result<SweepConfig> {
        let cfg = SweepConfig {
            betas: self.betas.clone(),
            evidence: self.evidence.clone(),
            goal: self.goal,
            grid: resolve_grid(self.grid, &self.values, self.midpoint)?,
            n: self.n,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Prefix CSV outputs with a provenance comment line.
    pub provenance_header: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            provenance_header: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub world: WorldConfig,
    pub model: ModelConfig,
    pub mcmc: McmcConfig,
    pub sweep: SweepSection,
    pub synthetic: SyntheticConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&super::read_to_string(path)?)
            .map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
                other => other,
            })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hash of the canonical serialization and the package version.
    pub fn hash(&self) -> String {
        super::config_hash(&self.to_toml())
    }

    pub fn validate(&self) -> Result<()> {
        self.world.length_grid()?;
        self.model.spec()?;
        self.mcmc.validate()?;
        self.synthetic.validate()?;
        resolve_grid(self.sweep.grid, &self.sweep.values, self.sweep.midpoint)?;
        Ok(())
    }

    /// The defaults as a commented TOML document.
    pub fn default_document() -> String {
        let body = Self::default().to_toml();
        let mut out = String::from(
            "# persuasion run configuration; every key is shown with its default.\n\
             # world.grid: experiment | extended | normalized | custom (custom uses values and midpoint)\n\
             # world.example_set: empty means the grid's default speaker-phase set\n\
             # world.second_pick: independent | exclusive\n\
             # model.family: rsa | aa | mas; model.variant: homogeneous | heterogeneous | speaker-dependent\n\
             # mcmc.samples is per chain; threads = 0 uses every core\n\n",
        );
        out.push_str(&body);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let text = RunConfig::default_document();
        let cfg = RunConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert!(text.contains("[mcmc]"));
        assert!(text.contains("burnin = 7500"));
    }

    #[test]
    fn partial_documents_fill_defaults() {
        let cfg = RunConfig::from_toml("[mcmc]\nchains = 2\n[sweep]\nbetas = [0.0, 1.0]\n").unwrap();
        assert_eq!(cfg.mcmc.chains, 2);
        assert_eq!(cfg.mcmc.samples, 1000);
        assert_eq!(cfg.sweep.betas, vec![0.0, 1.0]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("[world]\ngird = \"experiment\"\n").is_err());
        assert!(RunConfig::from_toml("[extra]\n").is_err());
    }

    #[test]
    fn custom_grid() {
        let cfg = RunConfig::from_toml("[world]\ngrid = \"custom\"\nvalues = [1.0, 2.0, 3.0]\nmidpoint = 2.0\nn = 2\n").unwrap();
        assert_eq!(cfg.world.prior().unwrap().table().unwrap().worlds.len(), 6);
        assert!(RunConfig::from_toml("[world]\ngrid = \"custom\"\nvalues = [1.0]\n").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.mcmc.lag = 99;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), RunConfig::default().hash());
    }
}

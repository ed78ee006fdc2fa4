use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::audio::FramingConfig;
use crate::autoencoder::AutoencoderConfig;
use crate::error::{Error, Result};
use crate::selection::ForestConfig;
use crate::svm::{SvmConfig, SvmGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    ContentOnly,
    Selected,
    SelectedPlusBottleneck,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::ContentOnly, Stage::Selected, Stage::SelectedPlusBottleneck];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::ContentOnly => "content_only",
            Stage::Selected => "selected",
            Stage::SelectedPlusBottleneck => "selected_plus_bottleneck",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown stage {s:?}")))
    }
}

/// Everything one experiment needs. Every field has a default, so a config
/// file only lists what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Class-per-directory WAV corpus or a feature CSV.
    pub dataset: Option<PathBuf>,
    pub n_repetitions: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub stratified: bool,
    pub stages: Vec<Stage>,
    /// One seed per repetition; empty means `1..=n_repetitions`.
    pub seeds: Vec<u64>,
    /// Fit min-max scaling on train and test together instead of train only.
    pub scale_on_full_dataset: bool,
    pub framing: FramingConfig,
    pub forest: ForestConfig,
    pub autoencoder: AutoencoderConfig,
    pub svm: SvmConfig,
    pub grid: SvmGrid,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            n_repetitions: 10,
            train_size: 900,
            test_size: 100,
            stratified: true,
            stages: Stage::ALL.to_vec(),
            seeds: Vec::new(),
            scale_on_full_dataset: false,
            framing: FramingConfig::standard(),
            forest: ForestConfig::default(),
            autoencoder: AutoencoderConfig::default(),
            svm: SvmConfig::default(),
            grid: SvmGrid::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(reason) => Error::Config(format!("{}: {reason}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Invariant(e.to_string()))
    }

    pub fn repetition_seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            (1..=self.n_repetitions as u64).collect()
        } else {
            self.seeds[..self.n_repetitions].to_vec()
        }
    }

    /// Stages in pipeline order, deduplicated.
    pub fn ordered_stages(&self) -> Vec<Stage> {
        let mut s = self.stages.clone();
        s.sort();
        s.dedup();
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_repetitions == 0 {
            return Err(Error::Config("n_repetitions must be at least 1".into()));
        }
        if !self.seeds.is_empty() && self.seeds.len() < self.n_repetitions {
            return Err(Error::Config(format!(
                "{} seeds for {} repetitions",
                self.seeds.len(),
                self.n_repetitions
            )));
        }
        if self.train_size == 0 || self.test_size == 0 {
            return Err(Error::Config("train_size and test_size must be positive".into()));
        }
        if self.stages.is_empty() {
            return Err(Error::Config("no stages requested".into()));
        }
        self.framing.validate()?;
        self.svm.validate()?;
        self.grid.validate()?;
        if self.autoencoder.hidden.is_empty() {
            return Err(Error::Config("autoencoder needs hidden layers".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_toml_gives_defaults() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.repetition_seeds(), (1..=10).collect::<Vec<u64>>());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig {
            n_repetitions: 2,
            seeds: vec![7, 8],
            stages: vec![Stage::Selected],
            ..Default::default()
        };
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_nested_override() {
        let cfg = ExperimentConfig::from_toml("[forest]\nn_trees = 50\n[svm.kernel]\nkind = \"linear\"\n").unwrap();
        assert_eq!(cfg.forest.n_trees, 50);
        assert_eq!(cfg.forest.min_samples_split, 2);
        assert_eq!(cfg.svm.kernel, crate::svm::KernelSpec::Linear);
    }

    #[test]
    fn invalid_configs() {
        assert!(ExperimentConfig::from_toml("n_repetitions = 0").is_err());
        assert!(ExperimentConfig::from_toml("seeds = [1]\nn_repetitions = 2").is_err());
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml("stages = [\"nope\"]").is_err());
    }

    #[test]
    fn stage_names() {
        for s in Stage::ALL {
            assert_eq!(s.as_str().parse::<Stage>().unwrap(), s);
        }
    }
}

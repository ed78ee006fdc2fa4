//! Named, ordered feature components of per-track vectors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Statistic {
    /// Mean of the texture-window means.
    Mean,
    /// Mean of the texture-window standard deviations.
    Sd,
    DeltaMean,
    DeltaSd,
    /// Autoencoder bottleneck activation.
    Code,
}

impl Statistic {
    pub fn token(self) -> &'static str {
        match self {
            Statistic::Mean => "M",
            Statistic::Sd => "SD",
            Statistic::DeltaMean => "dM",
            Statistic::DeltaSd => "dSD",
            Statistic::Code => "code",
        }
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "M" => Statistic::Mean,
            "SD" => Statistic::Sd,
            "dM" => Statistic::DeltaMean,
            "dSD" => Statistic::DeltaSd,
            "code" => Statistic::Code,
            other => return Err(Error::SchemaMismatch(format!("unknown statistic {other:?}"))),
        })
    }
}

/// One component: `family.statistic.index`, e.g. `mfcc.dSD.12`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Component {
    pub family: String,
    pub statistic: Statistic,
    pub index: usize,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.family, self.statistic.token(), self.index)
    }
}

impl FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::SchemaMismatch(format!("malformed component name {s:?}"));
        let mut parts = s.rsplitn(3, '.');
        let index = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let statistic = parts.next().ok_or_else(bad)?.parse()?;
        let family = parts.next().filter(|f| !f.is_empty()).ok_or_else(bad)?;
        Ok(Component {
            family: family.to_string(),
            statistic,
            index,
        })
    }
}

/// Feature families of the content vector: name, width, and whether the
/// derivative statistics are present.
pub const CONTENT_FAMILIES: [(&str, usize, bool); 18] = [
    ("compactness", 1, true),
    ("energy", 1, true),
    ("entropy_of_energy", 1, false),
    ("folew", 1, true),
    ("rms", 1, true),
    ("zero_crossing", 1, true),
    ("strongest_beat", 1, true),
    ("strength_of_strongest_beat", 1, true),
    ("beat_sum", 1, true),
    ("mfcc", 26, true),
    ("chroma", 12, false),
    ("chroma_sd", 1, false),
    ("lpc", 10, true),
    ("spectral_centroid", 1, true),
    ("spectral_flux", 1, true),
    ("spectral_rolloff", 1, true),
    ("spectral_spread", 1, true),
    ("spectral_variability", 1, true),
];

/// Length of the content-based vector before selection.
pub const CONTENT_DIM: usize = 224;

/// Family name used for appended autoencoder codes.
pub const BOTTLENECK_FAMILY: &str = "bottleneck";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub components: Vec<Component>,
}

impl FeatureSchema {
    /// The 224-component content schema. Within each family the order is
    /// all means, all SDs, then (where present) all ΔM and all ΔSD.
    pub fn content() -> Self {
        let mut components = Vec::with_capacity(CONTENT_DIM);
        for (family, width, has_delta) in CONTENT_FAMILIES {
            let stats: &[Statistic] = if has_delta {
                &[Statistic::Mean, Statistic::Sd, Statistic::DeltaMean, Statistic::DeltaSd]
            } else {
                &[Statistic::Mean, Statistic::Sd]
            };
            for &statistic in stats {
                for index in 0..width {
                    components.push(Component {
                        family: family.to_string(),
                        statistic,
                        index,
                    });
                }
            }
        }
        Self { components }
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let components = names
            .iter()
            .map(|n| n.as_ref().parse())
            .collect::<Result<Vec<Component>>>()?;
        let schema = Self { components };
        schema.check_unique()?;
        Ok(schema)
    }

    pub fn check_unique(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for c in &self.components {
            if !seen.insert(c) {
                return Err(Error::SchemaMismatch(format!("duplicate component {c}")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.components.iter().map(|c| c.to_string()).collect()
    }

    pub fn position(&self, family: &str, statistic: Statistic, index: usize) -> Option<usize> {
        self.components
            .iter()
            .position(|c| c.family == family && c.statistic == statistic && c.index == index)
    }

    /// Components where `mask` is true, order preserved.
    pub fn project(&self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.len() {
            return Err(Error::SchemaMismatch(format!(
                "mask of length {} for schema of length {}",
                mask.len(),
                self.len()
            )));
        }
        Ok(Self {
            components: self
                .components
                .iter()
                .zip(mask)
                .filter(|(_, &keep)| keep)
                .map(|(c, _)| c.clone())
                .collect(),
        })
    }

    /// This schema followed by `n` bottleneck code components.
    pub fn with_bottleneck(&self, n: usize) -> Self {
        let mut components = self.components.clone();
        components.extend((0..n).map(|index| Component {
            family: BOTTLENECK_FAMILY.to_string(),
            statistic: Statistic::Code,
            index,
        }));
        Self { components }
    }
}

/// A per-track vector ordered by some [`FeatureSchema`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub track_id: String,
    pub label: Option<String>,
}

//! Seeded synthetic data: labeled content-feature datasets with a known set
//! of informative components, and small WAV corpora in the
//! one-directory-per-class layout.

use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::audio::{write_wav, AudioClip, CANONICAL_SAMPLE_RATE};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::schema::FeatureSchema;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticFeatures {
    pub n_classes: usize,
    pub per_class: usize,
    pub n_informative: usize,
    /// Spread of class means on informative components, in units of the
    /// within-class standard deviation.
    pub separation: f64,
    pub seed: u64,
}

impl Default for SyntheticFeatures {
    fn default() -> Self {
        Self {
            n_classes: 3,
            per_class: 100,
            n_informative: 30,
            separation: 1.0,
            seed: 0,
        }
    }
}

/// A dataset over the 224-component content schema plus the positions of
/// its informative components (sorted). All other components are i.i.d.
/// uniform noise independent of the label.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub data: LabeledDataset,
    pub informative: Vec<usize>,
}

impl SyntheticDataset {
    pub fn noise_components(&self) -> Vec<usize> {
        (0..self.data.dim())
            .filter(|i| self.informative.binary_search(i).is_err())
            .collect()
    }
}

pub fn synthetic_features(spec: &SyntheticFeatures) -> Result<SyntheticDataset> {
    let schema = FeatureSchema::content();
    let dim = schema.len();
    if spec.n_classes < 2 || spec.per_class == 0 || spec.n_informative > dim {
        return Err(Error::Config(format!(
            "synthetic dataset needs >= 2 classes, >= 1 sample each and <= {dim} informative components"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut informative = sample(&mut rng, dim, spec.n_informative).into_vec();
    informative.sort_unstable();

    // class means uniform on 0.5 ± separation·sd
    let sd = 0.05;
    let unit = Normal::new(0.0, sd).expect("positive sd");
    let means: Vec<Vec<f64>> = (0..spec.n_classes)
        .map(|_| {
            (0..spec.n_informative)
                .map(|_| 0.5 + spec.separation * sd * (rng.gen::<f64>() - 0.5) * 2.0)
                .collect()
        })
        .collect();

    let classes: Vec<String> = (0..spec.n_classes).map(|c| format!("class{c:02}")).collect();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut track_ids = Vec::new();
    for i in 0..spec.per_class {
        for (c, class_means) in means.iter().enumerate() {
            let mut row: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
            for (k, &pos) in informative.iter().enumerate() {
                row[pos] = class_means[k] + unit.sample(&mut rng);
            }
            features.push(row);
            labels.push(c);
            track_ids.push(format!("{}/{i:04}", classes[c]));
        }
    }
    Ok(SyntheticDataset {
        data: LabeledDataset::new(schema, features, labels, classes, track_ids)?,
        informative,
    })
}

/// Per-class audio recipe: a tonal chord, a click pulse and a noise floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipRecipe {
    pub bpm: f64,
    pub root_hz: f64,
    pub noise: f64,
}

/// Recipe for class `c`: tempo, register and noise level all move with
/// the class index.
pub fn class_recipe(c: usize) -> ClipRecipe {
    ClipRecipe {
        bpm: 70.0 + 25.0 * c as f64,
        root_hz: 130.81 * 2f64.powf(c as f64 * 5.0 / 12.0),
        noise: 0.02 + 0.03 * (c % 3) as f64,
    }
}

pub fn synth_clip(recipe: &ClipRecipe, seconds: f64, seed: u64) -> Vec<f64> {
    let sr = CANONICAL_SAMPLE_RATE as f64;
    let n = (seconds * sr).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let detune = 1.0 + rng.gen_range(-0.01..0.01);
    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let period = (60.0 / recipe.bpm * sr).round() as usize;
    let click_len = (0.01 * sr) as usize;
    let ratios = [1.0, 1.259_921, 1.498_307];
    (0..n)
        .map(|i| {
            let t = i as f64 / sr;
            let tone: f64 = ratios
                .iter()
                .map(|r| (std::f64::consts::TAU * recipe.root_hz * detune * r * t + phase).sin())
                .sum::<f64>()
                * 0.15;
            let k = i % period;
            let click = if k < click_len {
                0.5 * (1.0 - k as f64 / click_len as f64) * if k.is_multiple_of(2) { 1.0 } else { -1.0 }
            } else {
                0.0
            };
            let noise = recipe.noise * rng.gen_range(-1.0..1.0);
            (tone + click + noise).clamp(-1.0, 1.0)
        })
        .collect()
}

/// Writes `per_class` clips for each of `n_classes` classes as
/// `root/classNN/classNN.IIIII.wav`.
pub fn write_wav_corpus(root: &Path, n_classes: usize, per_class: usize, seconds: f64, seed: u64) -> Result<()> {
    for c in 0..n_classes {
        let name = format!("class{c:02}");
        let dir = root.join(&name);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let recipe = class_recipe(c);
        for i in 0..per_class {
            let clip_seed = crate::seed::derive_seed(seed, (c * per_class + i) as u64);
            let samples = synth_clip(&recipe, seconds, clip_seed);
            let clip = AudioClip::new(samples, CANONICAL_SAMPLE_RATE, format!("{name}.{i:05}"))?;
            write_wav(dir.join(format!("{name}.{i:05}.wav")), &clip)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_shape() {
        let s = synthetic_features(&SyntheticFeatures::default()).unwrap();
        assert_eq!(s.data.len(), 300);
        assert_eq!(s.data.dim(), 224);
        assert_eq!(s.informative.len(), 30);
        assert_eq!(s.noise_components().len(), 194);
        assert_eq!(s.data.class_counts(), vec![100; 3]);
    }

    #[test]
    fn deterministic() {
        let spec = SyntheticFeatures {
            seed: 9,
            ..Default::default()
        };
        assert_eq!(synthetic_features(&spec).unwrap(), synthetic_features(&spec).unwrap());
    }

    #[test]
    fn clip_in_range() {
        let s = synth_clip(&class_recipe(2), 0.5, 1);
        assert_eq!(s.len(), 11025);
        assert!(s.iter().all(|v| v.abs() <= 1.0));
    }
}

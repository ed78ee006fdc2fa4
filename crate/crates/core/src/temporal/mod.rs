//! Early temporal integration with the MeanVar model.
//!
//! Each short-time series is summarized per texture window by its mean and
//! population standard deviation; the per-track value is the average of
//! those window statistics. The same is done for the first-order
//! differences of the series. Fraction of low-energy windows and beat
//! histogram descriptors are medium-time series and are summarized by
//! [`medium_series_stats`].

pub mod beat;

use crate::audio::{frame_signal, AudioClip, FramingConfig};
use crate::dsp::{family_offset, ShortTimeExtractor, ShortTimeMatrix};
use crate::error::{Error, Result};
use crate::schema::{FeatureSchema, FeatureVector, CONTENT_DIM, CONTENT_FAMILIES};

pub use beat::{beat_features, beat_features_with, BeatFeatures};

/// Per-window (mean, sd) of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumTimeMatrix {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl MediumTimeMatrix {
    pub fn n_windows(&self) -> usize {
        self.means.len()
    }
}

/// Mean about the first value, so a constant series returns that value
/// exactly.
pub(crate) fn mean(values: &[f64]) -> f64 {
    let k = values[0];
    k + values.iter().map(|v| v - k).sum::<f64>() / values.len() as f64
}

pub(crate) fn population_sd(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

pub fn derivative_series(s: &[f64]) -> Result<Vec<f64>> {
    if s.len() < 2 {
        return Err(Error::TooShort {
            len: s.len(),
            needed: 2,
        });
    }
    Ok(s.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Number of windows of `window` items advancing by `hop` over `n` items.
pub fn window_count(n: usize, window: usize, hop: usize) -> usize {
    crate::audio::frame_count(n, window, hop)
}

pub fn meanvar_windows(s: &[f64], window_frames: usize, window_hop: usize) -> Result<MediumTimeMatrix> {
    if window_frames == 0 || window_hop == 0 {
        return Err(Error::DegenerateConfig("empty texture window".into()));
    }
    if s.len() < window_frames {
        return Err(Error::TooShort {
            len: s.len(),
            needed: window_frames,
        });
    }
    let (means, sds) = (0..window_count(s.len(), window_frames, window_hop))
        .map(|w| {
            let slice = &s[w * window_hop..w * window_hop + window_frames];
            (mean(slice), population_sd(slice))
        })
        .unzip();
    Ok(MediumTimeMatrix { means, sds })
}

/// Row means of the medium-time matrix: `(mean of means, mean of sds)`.
pub fn integrate_feature(m: &MediumTimeMatrix) -> (f64, f64) {
    (mean(&m.means), mean(&m.sds))
}

/// Per texture window, the fraction of frames whose RMS is strictly below
/// the window's mean RMS.
pub fn folew(rms: &[f64], window_frames: usize, window_hop: usize) -> Result<Vec<f64>> {
    let m = meanvar_windows(rms, window_frames, window_hop)?;
    Ok(m.means
        .iter()
        .enumerate()
        .map(|(w, &mu)| {
            let slice = &rms[w * window_hop..w * window_hop + window_frames];
            slice.iter().filter(|&&v| v < mu).count() as f64 / window_frames as f64
        })
        .collect())
}

/// Summary of a medium-time series (one value per window): mean and
/// population SD of the values and of their first differences. A single
/// window has zero derivative statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SeriesStats {
    pub mean: f64,
    pub sd: f64,
    pub delta_mean: f64,
    pub delta_sd: f64,
}

impl SeriesStats {
    pub fn as_array(&self) -> [f64; 4] {
        [self.mean, self.sd, self.delta_mean, self.delta_sd]
    }
}

pub fn medium_series_stats(series: &[f64]) -> SeriesStats {
    if series.is_empty() {
        return SeriesStats::default();
    }
    let (delta_mean, delta_sd) = match derivative_series(series) {
        Ok(d) => (mean(&d), population_sd(&d)),
        Err(_) => (0.0, 0.0),
    };
    SeriesStats {
        mean: mean(series),
        sd: population_sd(series),
        delta_mean,
        delta_sd,
    }
}

/// The four MeanVar statistics of one short-time series.
pub fn short_time_stats(s: &[f64], cfg: &FramingConfig) -> Result<[f64; 4]> {
    let (m, sd) = integrate_feature(&meanvar_windows(s, cfg.window_frames, cfg.window_hop_frames)?);
    let d = derivative_series(s)?;
    let (dm, dsd) = integrate_feature(&meanvar_windows(&d, cfg.window_frames, cfg.window_hop_frames)?);
    Ok([m, sd, dm, dsd])
}

/// Assembles the content vector from the short-time matrix, FoLEW and beat
/// statistics, in [`FeatureSchema::content`] order.
pub fn assemble_content_vector(short: &ShortTimeMatrix, beat: &BeatFeatures, cfg: &FramingConfig) -> Result<Vec<f64>> {
    let rms_col = family_offset("rms").expect("rms column");
    let rms = short.column(rms_col);
    let folew_stats = medium_series_stats(&folew(&rms, cfg.window_frames, cfg.window_hop_frames)?);

    let mut out = Vec::with_capacity(CONTENT_DIM);
    for (family, width, has_delta) in CONTENT_FAMILIES {
        let n_stats = if has_delta { 4 } else { 2 };
        let per_index: Vec<[f64; 4]> = match family {
            "folew" => vec![folew_stats.as_array()],
            "strongest_beat" => vec![beat.strongest_beat.as_array()],
            "strength_of_strongest_beat" => vec![beat.strength_of_strongest_beat.as_array()],
            "beat_sum" => vec![beat.beat_sum.as_array()],
            _ => {
                let offset =
                    family_offset(family).ok_or_else(|| Error::Invariant(format!("no short-time family {family}")))?;
                (0..width)
                    .map(|i| short_time_stats(&short.column(offset + i), cfg))
                    .collect::<Result<_>>()?
            }
        };
        for stat in 0..n_stats {
            out.extend(per_index.iter().map(|s| s[stat]));
        }
    }
    if out.len() != CONTENT_DIM {
        return Err(Error::Invariant(format!("content vector has {} components", out.len())));
    }
    if let Some(i) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::Invariant(format!(
            "non-finite component {}",
            FeatureSchema::content().components[i]
        )));
    }
    Ok(out)
}

/// Full per-track chain: framing, short-time extraction, MeanVar over values
/// and derivatives, FoLEW and beat features.
pub fn build_feature_vector(clip: &AudioClip, cfg: &FramingConfig) -> Result<FeatureVector> {
    let series = frame_signal(clip, cfg)?;
    let needed = cfg.window_frames + 1;
    if series.n_frames() < needed {
        return Err(Error::TooShort {
            len: series.n_frames(),
            needed,
        });
    }
    let short = ShortTimeExtractor::new(cfg.frame_len_samples, clip.sample_rate).extract(&series)?;
    let beat = beat_features_with(clip, cfg)?;
    Ok(FeatureVector {
        values: assemble_content_vector(&short, &beat, cfg)?,
        track_id: clip.source_id.clone(),
        label: clip.label.clone(),
    })
}

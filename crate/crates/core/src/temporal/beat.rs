//! Beat histogram from an onset-strength envelope.
//!
//! The envelope is the half-wave-rectified spectral flux at the analysis
//! frame rate. Each beat window's mean-removed envelope is autocorrelated
//! over lags spanning 40–200 BPM; the non-negative part of that
//! autocorrelation is the window's beat histogram.

use crate::audio::{frame_signal, AudioClip, FramingConfig};
use crate::dsp::spectral::rectified_flux;
use crate::dsp::SpectrumAnalyzer;
use crate::error::{Error, Result};

use super::{medium_series_stats, SeriesStats};

pub const MIN_BPM: f64 = 40.0;
pub const MAX_BPM: f64 = 200.0;
/// Shortest clip accepted for beat analysis.
pub const MIN_CLIP_SECONDS: f64 = 2.0;
/// Span of one beat histogram. Texture windows (1 s) cannot hold a 40 BPM
/// period, so histograms use their own longer window and advance by the
/// texture-window hop.
pub const BEAT_WINDOW_SECONDS: f64 = 3.0;

/// Summary of one beat histogram.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BeatHistogramSummary {
    pub beat_sum: f64,
    /// Tempo of the strongest periodicity, BPM; 0 when the histogram is empty.
    pub strongest_beat: f64,
    /// Peak height divided by `beat_sum`.
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeatFeatures {
    pub windows: Vec<BeatHistogramSummary>,
    pub beat_sum: SeriesStats,
    pub strongest_beat: SeriesStats,
    pub strength_of_strongest_beat: SeriesStats,
}

impl BeatFeatures {
    /// Mean strongest beat over all histogram windows, BPM.
    pub fn tempo(&self) -> f64 {
        self.strongest_beat.mean
    }
}

/// Onset strength per analysis frame; the first frame is 0.
pub fn onset_envelope(frames: &[Vec<f64>], analyzer: &SpectrumAnalyzer) -> Vec<f64> {
    let spectra: Vec<_> = frames.iter().map(|f| analyzer.analyze(f)).collect();
    std::iter::once(0.0)
        .chain(spectra.windows(2).map(|w| rectified_flux(&w[0], &w[1])))
        .take(frames.len())
        .collect()
}

/// Beat histogram over lags `lag_min..=lag_max` (frames).
pub fn beat_histogram(envelope: &[f64], lag_min: usize, lag_max: usize) -> Vec<f64> {
    let n = envelope.len();
    if n == 0 {
        return vec![0.0; lag_max + 1 - lag_min];
    }
    let mean = envelope.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = envelope.iter().map(|v| v - mean).collect();
    (lag_min..=lag_max)
        .map(|lag| {
            if lag >= n {
                return 0.0;
            }
            let r = centered[lag..].iter().zip(&centered).map(|(a, b)| a * b).sum::<f64>() / n as f64;
            r.max(0.0)
        })
        .collect()
}

/// Reads beat sum, strongest beat and its strength off a histogram whose
/// first entry corresponds to `lag_min` frames.
pub fn summarize_histogram(hist: &[f64], lag_min: usize, frame_rate: f64) -> BeatHistogramSummary {
    let beat_sum: f64 = hist.iter().sum();
    if beat_sum <= 0.0 {
        return BeatHistogramSummary::default();
    }
    let (peak_i, &peak) = hist
        .iter()
        .enumerate()
        .fold((0, &hist[0]), |best, cur| if cur.1 > best.1 { cur } else { best });
    // parabolic refinement of the peak lag
    let mut offset = 0.0;
    if peak_i > 0 && peak_i + 1 < hist.len() {
        let (l, c, r) = (hist[peak_i - 1], peak, hist[peak_i + 1]);
        let denom = l - 2.0 * c + r;
        if denom < 0.0 {
            offset = (0.5 * (l - r) / denom).clamp(-0.5, 0.5);
        }
    }
    let lag = (lag_min + peak_i) as f64 + offset;
    BeatHistogramSummary {
        beat_sum,
        strongest_beat: (60.0 * frame_rate / lag).clamp(MIN_BPM, MAX_BPM),
        strength: peak / beat_sum,
    }
}

/// Beat features using the standard framing for the clip's sample rate.
pub fn beat_features(clip: &AudioClip) -> Result<BeatFeatures> {
    let cfg = crate::audio::make_framing(clip.sample_rate, 50.0, 0.5, 1.0, 0.5)?;
    beat_features_with(clip, &cfg)
}

pub fn beat_features_with(clip: &AudioClip, cfg: &FramingConfig) -> Result<BeatFeatures> {
    if clip.duration_secs() < MIN_CLIP_SECONDS {
        return Err(Error::ClipTooShort {
            seconds: clip.duration_secs(),
            needed: MIN_CLIP_SECONDS,
        });
    }
    let series = frame_signal(clip, cfg)?;
    let analyzer = SpectrumAnalyzer::new(cfg.frame_len_samples, clip.sample_rate);
    let envelope = onset_envelope(&series.frames, &analyzer);
    let frame_rate = cfg.frame_rate(clip.sample_rate);

    let lag_min = (60.0 * frame_rate / MAX_BPM).ceil().max(1.0) as usize;
    let lag_max = (60.0 * frame_rate / MIN_BPM).floor() as usize;
    if lag_max < lag_min {
        return Err(Error::DegenerateConfig(format!(
            "frame rate {frame_rate:.2} Hz cannot resolve 40-200 BPM"
        )));
    }
    let span = ((BEAT_WINDOW_SECONDS * frame_rate).round() as usize).min(envelope.len());
    let hop = cfg.window_hop_frames;
    let n_windows = (envelope.len() - span) / hop + 1;
    let windows: Vec<BeatHistogramSummary> = (0..n_windows)
        .map(|w| {
            let slice = &envelope[w * hop..w * hop + span];
            summarize_histogram(&beat_histogram(slice, lag_min, lag_max), lag_min, frame_rate)
        })
        .collect();

    let series_of = |f: fn(&BeatHistogramSummary) -> f64| -> Vec<f64> { windows.iter().map(f).collect() };
    Ok(BeatFeatures {
        beat_sum: medium_series_stats(&series_of(|w| w.beat_sum)),
        strongest_beat: medium_series_stats(&series_of(|w| w.strongest_beat)),
        strength_of_strongest_beat: medium_series_stats(&series_of(|w| w.strength)),
        windows,
    })
}

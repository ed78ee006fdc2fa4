//! Audio ingestion: WAV loading, canonicalization to 22050 Hz mono, and
//! segmentation into analysis frames.

use std::path::Path;

use crate::error::{Error, Result};

/// Sample rate every clip is converted to before analysis.
pub const CANONICAL_SAMPLE_RATE: u32 = 22050;

/// A mono PCM signal with amplitudes in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub label: Option<String>,
    pub source_id: String,
}

impl AudioClip {
    /// Builds a clip after checking that samples are nonempty, finite and
    /// within `[-1, 1]`.
    pub fn new(samples: Vec<f64>, sample_rate: u32, source_id: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyAudio);
        }
        if sample_rate == 0 {
            return Err(Error::DegenerateConfig("sample rate must be positive".into()));
        }
        if let Some((index, &value)) = samples
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || v.abs() > 1.0)
        {
            return Err(Error::InvalidSample { index, value });
        }
        Ok(Self {
            samples,
            sample_rate,
            label: None,
            source_id: source_id.into(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Returns the clip resampled to [`CANONICAL_SAMPLE_RATE`].
    pub fn canonicalize(self) -> Self {
        if self.sample_rate == CANONICAL_SAMPLE_RATE {
            return self;
        }
        let samples = resample_linear(&self.samples, self.sample_rate, CANONICAL_SAMPLE_RATE);
        Self {
            samples,
            sample_rate: CANONICAL_SAMPLE_RATE,
            ..self
        }
    }
}

/// Linear-interpolation resampler.
pub fn resample_linear(samples: &[f64], from_hz: u32, to_hz: u32) -> Vec<f64> {
    if from_hz == to_hz || samples.len() < 2 {
        return samples.to_vec();
    }
    let ratio = from_hz as f64 / to_hz as f64;
    let out_len = ((samples.len() as f64) / ratio).floor().max(1.0) as usize;
    let last = samples.len() - 1;
    (0..out_len)
        .map(|i| {
            let pos = i as f64 * ratio;
            let left = (pos.floor() as usize).min(last);
            let right = (left + 1).min(last);
            let frac = pos - left as f64;
            samples[left] * (1.0 - frac) + samples[right] * frac
        })
        .collect()
}

/// Loads a PCM WAV file (8 or 16 bit, mono or stereo) as a canonical clip.
///
/// Stereo is averaged to mono, integer samples are scaled by `1/2^(bits-1)`,
/// and other sample rates are linearly resampled to 22050 Hz.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let unreadable = |reason: String| Error::UnreadableFile {
        path: path.to_path_buf(),
        reason,
    };
    let mut reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::Unsupported => Error::UnsupportedEncoding(format!("{}", path.display())),
        other => unreadable(other.to_string()),
    })?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int {
        return Err(Error::UnsupportedEncoding(format!(
            "{}: floating-point samples",
            path.display()
        )));
    }
    if !matches!(spec.bits_per_sample, 8 | 16) {
        return Err(Error::UnsupportedEncoding(format!(
            "{}: {}-bit samples",
            path.display(),
            spec.bits_per_sample
        )));
    }
    if !matches!(spec.channels, 1 | 2) {
        return Err(Error::UnsupportedEncoding(format!(
            "{}: {} channels",
            path.display(),
            spec.channels
        )));
    }
    let scale = 1.0 / f64::from(1u32 << (spec.bits_per_sample - 1));
    let interleaved: Vec<f64> = match spec.bits_per_sample {
        8 => reader
            .samples::<i8>()
            .map(|s| s.map(|v| f64::from(v) * scale))
            .collect::<std::result::Result<_, _>>(),
        _ => reader
            .samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) * scale))
            .collect::<std::result::Result<_, _>>(),
    }
    .map_err(|e| unreadable(e.to_string()))?;

    let channels = spec.channels as usize;
    let mono: Vec<f64> = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(channels)
            .map(|c| c.iter().sum::<f64>() / channels as f64)
            .collect()
    };
    if mono.is_empty() {
        return Err(Error::EmptyAudio);
    }
    let source_id = path.to_string_lossy().into_owned();
    Ok(AudioClip::new(mono, spec.sample_rate, source_id)?.canonicalize())
}

/// Writes a clip as 16-bit mono PCM. Samples are rounded to the nearest
/// quantization step.
pub fn write_wav(path: impl AsRef<Path>, clip: &AudioClip) -> Result<()> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let to_err = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::format(path, other),
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(to_err)?;
    for &s in &clip.samples {
        let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(q).map_err(to_err)?;
    }
    writer.finalize().map_err(to_err)
}

/// Frame and texture-window geometry, all in counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FramingConfig {
    pub frame_len_samples: usize,
    pub hop_samples: usize,
    pub window_frames: usize,
    pub window_hop_frames: usize,
}

impl FramingConfig {
    /// 50 ms frames and 1 s texture windows, both with 50% overlap, at
    /// 22050 Hz: `(1102, 551, 40, 20)`.
    pub fn standard() -> Self {
        make_framing(CANONICAL_SAMPLE_RATE, 50.0, 0.5, 1.0, 0.5).expect("standard framing is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_len_samples == 0 || self.hop_samples == 0 || self.hop_samples > self.frame_len_samples {
            return Err(Error::DegenerateConfig(format!(
                "need 0 < hop ({}) <= frame length ({})",
                self.hop_samples, self.frame_len_samples
            )));
        }
        if self.window_frames == 0 || self.window_hop_frames == 0 || self.window_hop_frames > self.window_frames {
            return Err(Error::DegenerateConfig(format!(
                "need 0 < window hop ({}) <= window length ({})",
                self.window_hop_frames, self.window_frames
            )));
        }
        Ok(())
    }

    /// Analysis frames per second.
    pub fn frame_rate(&self, sample_rate: u32) -> f64 {
        sample_rate as f64 / self.hop_samples as f64
    }
}

impl Default for FramingConfig {
    fn default() -> Self {
        Self::standard()
    }
}

/// Derives sample and frame counts from durations and overlap fractions.
pub fn make_framing(
    sample_rate: u32,
    frame_ms: f64,
    frame_overlap: f64,
    window_s: f64,
    window_overlap: f64,
) -> Result<FramingConfig> {
    if !(frame_ms > 0.0 && window_s > 0.0) {
        return Err(Error::DegenerateConfig("durations must be positive".into()));
    }
    for overlap in [frame_overlap, window_overlap] {
        if !(0.0..1.0).contains(&overlap) {
            return Err(Error::DegenerateConfig(format!("overlap {overlap} outside [0, 1)")));
        }
    }
    let frame_len = (frame_ms * sample_rate as f64 / 1000.0).floor() as usize;
    let hop = (frame_len as f64 * (1.0 - frame_overlap)).floor() as usize;
    if frame_len == 0 || hop == 0 {
        return Err(Error::DegenerateConfig(format!(
            "{frame_ms} ms at {sample_rate} Hz yields frame length {frame_len}, hop {hop}"
        )));
    }
    let hop_seconds = hop as f64 / sample_rate as f64;
    let window_frames = (window_s / hop_seconds).round() as usize;
    let window_hop = (window_frames as f64 * (1.0 - window_overlap)).floor() as usize;
    let cfg = FramingConfig {
        frame_len_samples: frame_len,
        hop_samples: hop,
        window_frames,
        window_hop_frames: window_hop,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Number of full frames of length `frame_len` at stride `hop` in `n` samples.
pub fn frame_count(n: usize, frame_len: usize, hop: usize) -> usize {
    if n < frame_len || hop == 0 {
        0
    } else {
        (n - frame_len) / hop + 1
    }
}

/// Fixed-length analysis frames in signal order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSeries {
    pub frames: Vec<Vec<f64>>,
    pub frame_len: usize,
    pub hop: usize,
    pub sample_rate: u32,
}

impl FrameSeries {
    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    /// Absolute sample index of `offset` within frame `frame`.
    pub fn sample_index(&self, frame: usize, offset: usize) -> usize {
        frame * self.hop + offset
    }
}

/// Cuts the clip into frames at hop intervals, dropping any trailing
/// partial frame.
pub fn frame_signal(clip: &AudioClip, cfg: &FramingConfig) -> Result<FrameSeries> {
    cfg.validate()?;
    let n = clip.samples.len();
    let len = cfg.frame_len_samples;
    if n < len {
        return Err(Error::SignalTooShort { len: n, needed: len });
    }
    let count = frame_count(n, len, cfg.hop_samples);
    let frames = (0..count)
        .map(|i| {
            let start = i * cfg.hop_samples;
            clip.samples[start..start + len].to_vec()
        })
        .collect();
    Ok(FrameSeries {
        frames,
        frame_len: len,
        hop: cfg.hop_samples,
        sample_rate: clip.sample_rate,
    })
}

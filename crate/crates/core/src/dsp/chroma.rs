use super::spectrum::Spectrum;

pub const DEFAULT_TUNING_HZ: f64 = 440.0;

/// Pitch-class names in vector order; index 0 is C.
pub const PITCH_CLASSES: [&str; 12] = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];

#[derive(Debug, Clone, PartialEq)]
pub struct Chroma {
    pub values: [f64; 12],
    pub sd: f64,
}

/// Pitch class (0 = C) of a positive frequency under equal temperament
/// around `tuning_hz` (which is A).
pub fn pitch_class(freq_hz: f64, tuning_hz: f64) -> usize {
    let semitones_from_a = (12.0 * (freq_hz / tuning_hz).log2()).round() as i64;
    (semitones_from_a + 9).rem_euclid(12) as usize
}

fn finish(values: [f64; 12]) -> Chroma {
    let total: f64 = values.iter().sum();
    let values = if total > 0.0 {
        values.map(|v| v / total)
    } else {
        [0.0; 12]
    };
    let mean = values.iter().sum::<f64>() / 12.0;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 12.0).sqrt();
    Chroma { values, sd }
}

/// Magnitude-weighted pitch-class profile normalized to unit sum.
pub fn chroma(spec: &Spectrum, tuning_hz: f64) -> Chroma {
    let mut values = [0.0; 12];
    for (k, &m) in spec.magnitudes.iter().enumerate().skip(1) {
        values[pitch_class(spec.frequency(k), tuning_hz)] += m;
    }
    finish(values)
}

/// Chroma with a precomputed bin-to-pitch-class map.
pub struct ChromaMap {
    classes: Vec<usize>,
}

impl ChromaMap {
    pub fn new(n_bins: usize, bin_hz: f64, tuning_hz: f64) -> Self {
        Self {
            classes: (0..n_bins)
                .map(|k| {
                    if k == 0 {
                        usize::MAX
                    } else {
                        pitch_class(k as f64 * bin_hz, tuning_hz)
                    }
                })
                .collect(),
        }
    }

    pub fn chroma(&self, spec: &Spectrum) -> Chroma {
        let mut values = [0.0; 12];
        for (&pc, &m) in self.classes.iter().zip(&spec.magnitudes) {
            if pc < 12 {
                values[pc] += m;
            }
        }
        finish(values)
    }
}

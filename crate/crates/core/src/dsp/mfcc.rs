use std::f64::consts::PI;

use super::spectrum::Spectrum;

pub const DEFAULT_N_MELS: usize = 40;
pub const DEFAULT_N_MFCC: usize = 26;
/// Floor applied to filter energies before the logarithm.
pub const LOG_FLOOR: f64 = 1e-10;

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters equally spaced on the mel scale from 0 Hz to Nyquist.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    /// Filter edge frequencies; filter `i` spans `edges[i]..edges[i + 2]`
    /// and peaks at `edges[i + 1]`.
    pub edges_hz: Vec<f64>,
    weights: Vec<Vec<(usize, f64)>>,
}

impl MelFilterbank {
    pub fn new(n_mels: usize, n_bins: usize, bin_hz: f64) -> Self {
        let nyquist = (n_bins.saturating_sub(1)) as f64 * bin_hz;
        let top = hz_to_mel(nyquist);
        let edges_hz: Vec<f64> = (0..n_mels + 2)
            .map(|i| mel_to_hz(top * i as f64 / (n_mels + 1) as f64))
            .collect();
        let weights = (0..n_mels)
            .map(|i| {
                let (lo, mid, hi) = (edges_hz[i], edges_hz[i + 1], edges_hz[i + 2]);
                (0..n_bins)
                    .filter_map(|k| {
                        let f = k as f64 * bin_hz;
                        let w = if f > lo && f <= mid {
                            (f - lo) / (mid - lo)
                        } else if f > mid && f < hi {
                            (hi - f) / (hi - mid)
                        } else {
                            0.0
                        };
                        (w > 0.0).then_some((k, w))
                    })
                    .collect()
            })
            .collect();
        Self { edges_hz, weights }
    }

    pub fn n_filters(&self) -> usize {
        self.weights.len()
    }

    pub fn center_hz(&self, filter: usize) -> f64 {
        self.edges_hz[filter + 1]
    }

    /// Power (squared magnitude) collected by each filter.
    pub fn energies(&self, spec: &Spectrum) -> Vec<f64> {
        self.weights
            .iter()
            .map(|taps| {
                taps.iter()
                    .map(|&(k, w)| w * spec.magnitudes[k] * spec.magnitudes[k])
                    .sum()
            })
            .collect()
    }

    /// Natural-log filter energies with [`LOG_FLOOR`] applied.
    pub fn log_energies(&self, spec: &Spectrum) -> Vec<f64> {
        self.energies(spec).into_iter().map(|e| e.max(LOG_FLOOR).ln()).collect()
    }
}

/// Orthonormal type-II DCT, first `n_out` coefficients.
pub fn dct_ii(input: &[f64], n_out: usize) -> Vec<f64> {
    let n = input.len() as f64;
    (0..n_out)
        .map(|k| {
            let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            scale
                * input
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| x * (PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n)).cos())
                    .sum::<f64>()
        })
        .collect()
}

/// Cepstral coefficients from a precomputed filterbank; coefficient 0 is
/// included.
pub fn mfcc_with(bank: &MelFilterbank, spec: &Spectrum, n_coeffs: usize) -> Vec<f64> {
    assert!(n_coeffs <= bank.n_filters(), "more coefficients than filters");
    dct_ii(&bank.log_energies(spec), n_coeffs)
}

pub fn mfcc(spec: &Spectrum, n_coeffs: usize, n_mels: usize) -> Vec<f64> {
    let bank = MelFilterbank::new(n_mels, spec.len(), spec.bin_hz);
    mfcc_with(&bank, spec, n_coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::spectrum::magnitude_spectrum;

    #[test]
    fn mel_scale_round_trip() {
        for hz in [0.0, 100.0, 1000.0, 11025.0] {
            assert!((mel_to_hz(hz_to_mel(hz)) - hz).abs() < 1e-9);
        }
        assert!((hz_to_mel(1000.0) - 999.985).abs() < 0.01);
    }

    #[test]
    fn silent_spectrum_gives_constant_log_energies() {
        let spec = Spectrum {
            magnitudes: vec![0.0; 1025],
            bin_hz: 22050.0 / 2048.0,
        };
        let c = mfcc(&spec, 26, 40);
        assert_eq!(c.len(), 26);
        let expected_c0 = LOG_FLOOR.ln() * 40f64.sqrt();
        assert!((c[0] - expected_c0).abs() < 1e-9);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-9), "{c:?}");
    }

    #[test]
    fn one_khz_tone_peaks_in_filter_containing_it() {
        let frame: Vec<f64> = (0..1102)
            .map(|i| (2.0 * PI * 1000.0 * i as f64 / 22050.0).sin())
            .collect();
        let spec = magnitude_spectrum(&frame, 22050);
        let bank = MelFilterbank::new(40, spec.len(), spec.bin_hz);
        let energies = bank.energies(&spec);
        let best = energies.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        // filter-center geometry: the filter whose center is nearest 1 kHz
        let nearest = (0..40)
            .min_by(|&a, &b| {
                (bank.center_hz(a) - 1000.0)
                    .abs()
                    .total_cmp(&(bank.center_hz(b) - 1000.0).abs())
            })
            .unwrap();
        assert_eq!(best, nearest);
        assert!(bank.edges_hz[best] < 1000.0 && 1000.0 < bank.edges_hz[best + 2]);
    }

    #[test]
    fn flat_spectrum_c0_dominates() {
        let spec = Spectrum {
            magnitudes: vec![1.0; 1025],
            bin_hz: 22050.0 / 2048.0,
        };
        let c = mfcc(&spec, 26, 40);
        assert!(c[1..].iter().all(|v| v.abs() <= c[0].abs()));
    }

    #[test]
    fn dct_of_constant() {
        let c = dct_ii(&[3.0; 8], 8);
        assert!((c[0] - 3.0 * 8f64.sqrt()).abs() < 1e-12);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
    }
}

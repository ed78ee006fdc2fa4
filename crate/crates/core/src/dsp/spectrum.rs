use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// One-sided magnitude spectrum, bins `0..=n_fft/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub magnitudes: Vec<f64>,
    pub bin_hz: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_hz
    }

    pub fn nyquist(&self) -> f64 {
        self.frequency(self.magnitudes.len().saturating_sub(1))
    }

    pub fn total(&self) -> f64 {
        self.magnitudes.iter().sum()
    }

    pub fn is_silent(&self) -> bool {
        self.magnitudes.iter().all(|&m| m == 0.0)
    }
}

/// Periodic Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Reusable FFT plan and window for frames of one length.
pub struct SpectrumAnalyzer {
    frame_len: usize,
    n_fft: usize,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    sample_rate: u32,
}

impl SpectrumAnalyzer {
    pub fn new(frame_len: usize, sample_rate: u32) -> Self {
        let n_fft = frame_len.max(2).next_power_of_two();
        let fft = FftPlanner::new().plan_fft_forward(n_fft);
        Self {
            frame_len,
            n_fft,
            window: hann(frame_len),
            fft,
            sample_rate,
        }
    }

    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    pub fn n_bins(&self) -> usize {
        self.n_fft / 2 + 1
    }

    pub fn bin_hz(&self) -> f64 {
        self.sample_rate as f64 / self.n_fft as f64
    }

    /// Hann-tapered, zero-padded magnitude spectrum of `frame`.
    ///
    /// Panics if `frame` does not have the length this analyzer was built for.
    pub fn analyze(&self, frame: &[f64]) -> Spectrum {
        assert_eq!(frame.len(), self.frame_len, "frame length mismatch");
        let mut buf: Vec<Complex<f64>> = frame
            .iter()
            .zip(&self.window)
            .map(|(&x, &w)| Complex::new(x * w, 0.0))
            .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
            .take(self.n_fft)
            .collect();
        self.fft.process(&mut buf);
        Spectrum {
            magnitudes: buf[..self.n_bins()].iter().map(|c| c.norm()).collect(),
            bin_hz: self.bin_hz(),
        }
    }
}

/// Convenience wrapper that plans a transform for a single frame.
pub fn magnitude_spectrum(frame: &[f64], sample_rate: u32) -> Spectrum {
    assert!(frame.len() >= 2, "frame must hold at least two samples");
    SpectrumAnalyzer::new(frame.len(), sample_rate).analyze(frame)
}

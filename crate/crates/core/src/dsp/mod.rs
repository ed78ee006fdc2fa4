//! Short-time (per analysis frame) feature extraction.
//!
//! Every frame yields 59 scalar components in a fixed order, see
//! [`short_time_component_names`].

pub mod chroma;
pub mod lpc;
pub mod mfcc;
pub mod spectral;
pub mod spectrum;
pub mod time_domain;

use rayon::prelude::*;

pub use chroma::{chroma, Chroma};
pub use lpc::lpc;
pub use mfcc::mfcc;
pub use spectral::{compactness, spectral_flux, spectral_shape, SpectralShape};
pub use spectrum::{magnitude_spectrum, Spectrum, SpectrumAnalyzer};
pub use time_domain::{time_domain_features, TimeDomainFeatures};

use crate::audio::FrameSeries;
use crate::error::{Error, Result};

/// Sub-frames used for the entropy-of-energy descriptor.
pub const ENTROPY_SUBFRAMES: usize = 10;

/// Short-time feature families with their widths, in column order.
pub const SHORT_TIME_FAMILIES: [(&str, usize); 14] = [
    ("compactness", 1),
    ("energy", 1),
    ("entropy_of_energy", 1),
    ("rms", 1),
    ("zero_crossing", 1),
    ("mfcc", mfcc::DEFAULT_N_MFCC),
    ("chroma", 12),
    ("chroma_sd", 1),
    ("lpc", lpc::DEFAULT_LPC_ORDER),
    ("spectral_centroid", 1),
    ("spectral_flux", 1),
    ("spectral_rolloff", 1),
    ("spectral_spread", 1),
    ("spectral_variability", 1),
];

/// Total number of short-time components per frame.
pub const N_SHORT_TIME: usize = 59;

/// Column offset of a family within a short-time row.
pub fn family_offset(name: &str) -> Option<usize> {
    let mut offset = 0;
    for (family, width) in SHORT_TIME_FAMILIES {
        if family == name {
            return Some(offset);
        }
        offset += width;
    }
    None
}

pub fn short_time_component_names() -> Vec<String> {
    SHORT_TIME_FAMILIES
        .iter()
        .flat_map(|&(family, width)| (0..width).map(move |i| format!("{family}[{i}]")))
        .collect()
}

/// Per-frame feature rows in frame order.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortTimeMatrix {
    pub rows: Vec<Vec<f64>>,
    pub component_names: Vec<String>,
}

impl ShortTimeMatrix {
    pub fn n_frames(&self) -> usize {
        self.rows.len()
    }

    pub fn n_components(&self) -> usize {
        self.component_names.len()
    }

    /// The time series of one component.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

/// Parameters of the per-frame extractors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortTimeParams {
    pub n_subframes: usize,
    pub rolloff_fraction: f64,
    pub n_mels: usize,
    pub n_mfcc: usize,
    pub lpc_order: usize,
    pub tuning_hz: f64,
}

impl Default for ShortTimeParams {
    fn default() -> Self {
        Self {
            n_subframes: ENTROPY_SUBFRAMES,
            rolloff_fraction: spectral::DEFAULT_ROLLOFF_FRACTION,
            n_mels: mfcc::DEFAULT_N_MELS,
            n_mfcc: mfcc::DEFAULT_N_MFCC,
            lpc_order: lpc::DEFAULT_LPC_ORDER,
            tuning_hz: chroma::DEFAULT_TUNING_HZ,
        }
    }
}

/// Holds the FFT plan, mel filterbank and chroma map for one frame geometry.
pub struct ShortTimeExtractor {
    params: ShortTimeParams,
    analyzer: SpectrumAnalyzer,
    mel: mfcc::MelFilterbank,
    chroma: chroma::ChromaMap,
}

impl ShortTimeExtractor {
    pub fn new(frame_len: usize, sample_rate: u32) -> Self {
        Self::with_params(frame_len, sample_rate, ShortTimeParams::default())
    }

    pub fn with_params(frame_len: usize, sample_rate: u32, params: ShortTimeParams) -> Self {
        assert_eq!(params.n_mfcc, mfcc::DEFAULT_N_MFCC, "fixed 26 MFCCs");
        assert_eq!(params.lpc_order, lpc::DEFAULT_LPC_ORDER, "fixed LPC order 10");
        let analyzer = SpectrumAnalyzer::new(frame_len, sample_rate);
        let mel = mfcc::MelFilterbank::new(params.n_mels, analyzer.n_bins(), analyzer.bin_hz());
        let chroma = chroma::ChromaMap::new(analyzer.n_bins(), analyzer.bin_hz(), params.tuning_hz);
        Self {
            params,
            analyzer,
            mel,
            chroma,
        }
    }

    pub fn spectrum(&self, frame: &[f64]) -> Spectrum {
        self.analyzer.analyze(frame)
    }

    /// One short-time row. `prev` is the previous frame's spectrum, or
    /// `None` for the first frame (flux 0).
    pub fn row(&self, frame: &[f64], spec: &Spectrum, prev: Option<&Spectrum>) -> Result<Vec<f64>> {
        if frame.len() <= self.params.lpc_order {
            return Err(Error::TooShort {
                len: frame.len(),
                needed: self.params.lpc_order + 1,
            });
        }
        let td = time_domain_features(frame, self.params.n_subframes);
        let shape = spectral_shape(spec, self.params.rolloff_fraction);
        let chroma = self.chroma.chroma(spec);
        let flux = match prev {
            Some(p) => spectral_flux(p, spec)?,
            None => 0.0,
        };
        let mut row = Vec::with_capacity(N_SHORT_TIME);
        row.push(compactness(spec));
        row.push(td.energy);
        row.push(td.entropy_of_energy);
        row.push(td.rms);
        row.push(td.zero_crossing);
        row.extend(mfcc::mfcc_with(&self.mel, spec, self.params.n_mfcc));
        row.extend(chroma.values);
        row.push(chroma.sd);
        row.extend(lpc(frame, self.params.lpc_order));
        row.push(shape.centroid);
        row.push(flux);
        row.push(shape.rolloff);
        row.push(shape.spread);
        row.push(shape.variability);
        debug_assert_eq!(row.len(), N_SHORT_TIME);
        Ok(row)
    }

    /// Extracts every frame of `series`. Spectra are computed in parallel;
    /// the result does not depend on scheduling.
    pub fn extract(&self, series: &FrameSeries) -> Result<ShortTimeMatrix> {
        if series.frames.is_empty() {
            return Err(Error::TooShort { len: 0, needed: 1 });
        }
        let spectra: Vec<Spectrum> = series.frames.par_iter().map(|f| self.spectrum(f)).collect();
        let rows = series
            .frames
            .par_iter()
            .enumerate()
            .map(|(i, frame)| {
                let prev = i.checked_sub(1).map(|p| &spectra[p]);
                self.row(frame, &spectra[i], prev).map_err(|e| Error::Frame {
                    index: i,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ShortTimeMatrix {
            rows,
            component_names: short_time_component_names(),
        })
    }
}

/// Applies every short-time operator to each frame of `series`.
pub fn extract_short_time(series: &FrameSeries) -> Result<ShortTimeMatrix> {
    ShortTimeExtractor::new(series.frame_len, series.sample_rate).extract(series)
}

//! Soft-margin SVM trained by simplified SMO, one-vs-one for multiclass.

pub mod grid;
pub mod kernel;

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use grid::{grid_search_cv, stratified_folds, CvRow, GridSearch, KernelKind, SvmGrid};
pub use kernel::{kernel_eval, Gram, KernelSpec, PairwiseBase};

use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Smallest change of a multiplier that counts as progress.
const MIN_ALPHA_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub kernel: KernelSpec,
    pub c: f64,
    /// KKT violation tolerance.
    pub tolerance: f64,
    /// Consecutive sweeps without any multiplier change before stopping.
    pub max_passes: usize,
    /// Hard cap on sweeps over the training set.
    pub max_sweeps: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::Rbf { gamma: 2f64.powi(-6) },
            c: 4.0,
            tolerance: 1e-3,
            max_passes: 10,
            max_sweeps: 2000,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("C {} must be positive", self.c)));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::Config(format!("tolerance {} must be positive", self.tolerance)));
        }
        if self.max_passes == 0 || self.max_sweeps == 0 {
            return Err(Error::Config("max_passes and max_sweeps must be positive".into()));
        }
        Ok(())
    }
}

/// Simplified SMO over a dense local kernel matrix `k` (`m x m`) with labels
/// `y` in {-1, +1}. Returns the multipliers and the bias of
/// `f(x) = Σ α_i y_i K(x_i, x) + b`.
fn smo(k: &[f64], y: &[f64], cfg: &SvmConfig, rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    let m = y.len();
    let c = cfg.c;
    let tol = cfg.tolerance;
    let mut alpha = vec![0.0; m];
    let mut b = 0.0;
    // f[i] = Σ α_j y_j K(j, i), without the bias
    let mut f = vec![0.0; m];
    let mut passes = 0;
    let mut sweeps = 0;
    while passes < cfg.max_passes && sweeps < cfg.max_sweeps && m >= 2 {
        sweeps += 1;
        let mut changed = 0;
        for i in 0..m {
            let ei = f[i] + b - y[i];
            let violates = (y[i] * ei < -tol && alpha[i] < c) || (y[i] * ei > tol && alpha[i] > 0.0);
            if !violates {
                continue;
            }
            let mut j = rng.gen_range(0..m - 1);
            if j >= i {
                j += 1;
            }
            let ej = f[j] + b - y[j];
            let (ai_old, aj_old) = (alpha[i], alpha[j]);
            let (lo, hi) = if y[i] != y[j] {
                ((aj_old - ai_old).max(0.0), (c + aj_old - ai_old).min(c))
            } else {
                ((ai_old + aj_old - c).max(0.0), (ai_old + aj_old).min(c))
            };
            if lo >= hi {
                continue;
            }
            let (kii, kjj, kij) = (k[i * m + i], k[j * m + j], k[i * m + j]);
            let eta = 2.0 * kij - kii - kjj;
            if eta >= 0.0 {
                continue;
            }
            let aj = (aj_old - y[j] * (ei - ej) / eta).clamp(lo, hi);
            if (aj - aj_old).abs() < MIN_ALPHA_STEP {
                continue;
            }
            let ai = (ai_old + y[i] * y[j] * (aj_old - aj)).clamp(0.0, c);
            let di = y[i] * (ai - ai_old);
            let dj = y[j] * (aj - aj_old);
            let b1 = b - ei - di * kii - dj * kij;
            let b2 = b - ej - di * kij - dj * kjj;
            b = if ai > 0.0 && ai < c {
                b1
            } else if aj > 0.0 && aj < c {
                b2
            } else {
                (b1 + b2) / 2.0
            };
            let (ri, rj) = (&k[i * m..(i + 1) * m], &k[j * m..(j + 1) * m]);
            for ((fv, &ki), &kj) in f.iter_mut().zip(ri).zip(rj) {
                *fv += di * ki + dj * kj;
            }
            alpha[i] = ai;
            alpha[j] = aj;
            changed += 1;
        }
        passes = if changed == 0 { passes + 1 } else { 0 };
    }
    if sweeps >= cfg.max_sweeps {
        log::debug!("SMO stopped at the sweep cap ({} samples)", m);
    }
    if alpha.iter().all(|&a| a == 0.0) {
        // no support vectors: fall back to the majority side, positive on ties
        let pos = y.iter().filter(|&&v| v > 0.0).count();
        b = if 2 * pos >= m { 1.0 } else { -1.0 };
    }
    (alpha, b)
}

/// One trained pairwise machine referring to training rows by index.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct IndexedMachine {
    pub positive: usize,
    pub negative: usize,
    pub rows: Vec<usize>,
    pub alphas: Vec<f64>,
    pub signs: Vec<f64>,
    pub bias: f64,
}

impl IndexedMachine {
    fn decision(&self, gram: &Gram, row: usize) -> f64 {
        self.rows
            .iter()
            .zip(&self.alphas)
            .zip(&self.signs)
            .map(|((&r, a), s)| a * s * gram.get(r, row))
            .sum::<f64>()
            + self.bias
    }
}

/// Trains every class pair on the training rows `idx` of a precomputed
/// kernel matrix.
pub(crate) fn fit_pairs(
    gram: &Gram,
    labels: &[usize],
    idx: &[usize],
    n_classes: usize,
    cfg: &SvmConfig,
    seed: u64,
) -> Result<Vec<IndexedMachine>> {
    let pairs: Vec<(usize, usize)> = (0..n_classes)
        .flat_map(|a| (a + 1..n_classes).map(move |b| (a, b)))
        .collect();
    pairs
        .par_iter()
        .enumerate()
        .map(|(p, &(pos, neg))| {
            let rows: Vec<usize> = idx
                .iter()
                .copied()
                .filter(|&r| labels[r] == pos || labels[r] == neg)
                .collect();
            let y: Vec<f64> = rows
                .iter()
                .map(|&r| if labels[r] == pos { 1.0 } else { -1.0 })
                .collect();
            if !y.iter().any(|&v| v > 0.0) || !y.iter().any(|&v| v < 0.0) {
                return Err(Error::SingleClass);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, p as u64));
            let (alpha, bias) = smo(&gram.restrict(&rows), &y, cfg, &mut rng);
            let keep: Vec<usize> = (0..rows.len()).filter(|&i| alpha[i] > 0.0).collect();
            Ok(IndexedMachine {
                positive: pos,
                negative: neg,
                rows: keep.iter().map(|&i| rows[i]).collect(),
                alphas: keep.iter().map(|&i| alpha[i]).collect(),
                signs: keep.iter().map(|&i| y[i]).collect(),
                bias,
            })
        })
        .collect()
}

/// One-vs-one vote over precomputed kernel values; ties go to the lower
/// class index.
pub(crate) fn vote_indexed(machines: &[IndexedMachine], gram: &Gram, row: usize, n_classes: usize) -> usize {
    let mut votes = vec![0usize; n_classes];
    for m in machines {
        let winner = if m.decision(gram, row) >= 0.0 {
            m.positive
        } else {
            m.negative
        };
        votes[winner] += 1;
    }
    argmax_first(&votes)
}

fn argmax_first(votes: &[usize]) -> usize {
    votes
        .iter()
        .enumerate()
        .fold(0, |b, (c, &n)| if n > votes[b] { c } else { b })
}

/// Binary machine with its own support vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub support_vectors: Vec<Vec<f64>>,
    /// Dual coefficients, each in `[0, C]`.
    pub alphas: Vec<f64>,
    /// Label of each support vector, `+1` or `-1`.
    pub signs: Vec<f64>,
    pub bias: f64,
}

impl BinarySvm {
    pub fn decision(&self, kernel: &KernelSpec, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.alphas)
            .zip(&self.signs)
            .map(|((sv, a), s)| a * s * kernel.eval_unchecked(sv, x))
            .sum::<f64>()
            + self.bias
    }

    fn from_indexed(m: &IndexedMachine, x: &[Vec<f64>]) -> Self {
        Self {
            support_vectors: m.rows.iter().map(|&r| x[r].clone()).collect(),
            alphas: m.alphas.clone(),
            signs: m.signs.clone(),
            bias: m.bias,
        }
    }
}

/// Two-class training; `positive[i]` marks the `+1` class.
pub fn train_binary(x: &[Vec<f64>], positive: &[bool], cfg: &SvmConfig, seed: u64) -> Result<BinarySvm> {
    cfg.validate()?;
    check_rows(x, positive.len())?;
    let labels: Vec<usize> = positive.iter().map(|&p| usize::from(!p)).collect();
    let idx: Vec<usize> = (0..x.len()).collect();
    let gram = Gram::new(&cfg.kernel, x);
    let machines = fit_pairs(&gram, &labels, &idx, 2, cfg, seed)?;
    Ok(BinarySvm::from_indexed(&machines[0], x))
}

fn check_rows(x: &[Vec<f64>], n_labels: usize) -> Result<()> {
    if x.len() != n_labels {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: n_labels,
        });
    }
    let Some(first) = x.first() else {
        return Err(Error::TooFewSamples("no training rows".into()));
    };
    if let Some(row) = x.iter().find(|r| r.len() != first.len()) {
        return Err(Error::DimensionMismatch {
            expected: first.len(),
            got: row.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMachine {
    pub positive: usize,
    pub negative: usize,
    pub machine: BinarySvm,
}

pub const MODEL_FORMAT: &str = "genreforge-svm";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub format: String,
    pub version: u32,
    pub classes: Vec<String>,
    pub dim: usize,
    pub config: SvmConfig,
    pub pairs: Vec<PairMachine>,
}

impl SvmModel {
    /// One machine per class pair `(a, b)`, `a < b`, with `a` as the
    /// positive side. Every class must occur in `labels`.
    pub fn fit(x: &[Vec<f64>], labels: &[usize], classes: &[String], cfg: &SvmConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        check_rows(x, labels.len())?;
        if classes.len() < 2 {
            return Err(Error::SingleClass);
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes.len()) {
            return Err(Error::DegenerateDataset(format!("label index {bad} out of range")));
        }
        let idx: Vec<usize> = (0..x.len()).collect();
        let gram = Gram::new(&cfg.kernel, x);
        let machines = fit_pairs(&gram, labels, &idx, classes.len(), cfg, seed)?;
        Ok(Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            classes: classes.to_vec(),
            dim: x[0].len(),
            config: *cfg,
            pairs: machines
                .iter()
                .map(|m| PairMachine {
                    positive: m.positive,
                    negative: m.negative,
                    machine: BinarySvm::from_indexed(m, x),
                })
                .collect(),
        })
    }

    pub fn fit_dataset(data: &crate::dataset::LabeledDataset, cfg: &SvmConfig, seed: u64) -> Result<Self> {
        Self::fit(&data.features, &data.labels, &data.classes, cfg, seed)
    }

    /// Vote count per class; the counts sum to `k(k-1)/2`.
    pub fn votes(&self, x: &[f64]) -> Result<Vec<usize>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut votes = vec![0usize; self.classes.len()];
        for p in &self.pairs {
            let winner = if p.machine.decision(&self.config.kernel, x) >= 0.0 {
                p.positive
            } else {
                p.negative
            };
            votes[winner] += 1;
        }
        Ok(votes)
    }

    /// Class index with the most votes, lower index on ties.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax_first(&self.votes(x)?))
    }

    pub fn predict_label(&self, x: &[f64]) -> Result<&str> {
        Ok(&self.classes[self.predict(x)?])
    }

    pub fn predict_all(&self, x: &[Vec<f64>]) -> Result<Vec<usize>> {
        x.par_iter().map(|r| self.predict(r)).collect()
    }

    pub fn n_support_vectors(&self) -> usize {
        self.pairs.iter().map(|p| p.machine.alphas.len()).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Invariant(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text).map_err(|e| Error::format("<svm>", e))?;
        if m.format != MODEL_FORMAT || m.version != MODEL_VERSION {
            return Err(Error::format(
                "<svm>",
                format!("unsupported model format {} v{}", m.format, m.version),
            ));
        }
        m.config.validate()?;
        let k = m.classes.len();
        let consistent = m.pairs.len() == k * k.saturating_sub(1) / 2
            && m.pairs.iter().all(|p| {
                p.positive < k
                    && p.negative < k
                    && p.machine.alphas.len() == p.machine.support_vectors.len()
                    && p.machine.signs.len() == p.machine.alphas.len()
                    && p.machine.support_vectors.iter().all(|sv| sv.len() == m.dim)
            });
        if !consistent {
            return Err(Error::format("<svm>", "inconsistent pairwise machines"));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Format { reason, .. } => Error::format(path, reason),
            other => other,
        })
    }
}

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{Gram, KernelSpec, PairwiseBase};
use super::{fit_pairs, vote_indexed, SvmConfig};
use crate::dataset::format_value;
use crate::error::{Error, Result};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Linear,
    Rbf,
}

fn powers_of_two(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(e)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmGrid {
    pub kernels: Vec<KernelKind>,
    pub c_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub folds: usize,
}

impl Default for SvmGrid {
    fn default() -> Self {
        Self {
            kernels: vec![KernelKind::Linear, KernelKind::Rbf],
            c_values: powers_of_two(-2, 6),
            gamma_values: powers_of_two(-8, 0),
            folds: 10,
        }
    }
}

impl SvmGrid {
    /// Kernels in tie-break order: linear first, then rbf by ascending gamma.
    pub fn kernel_specs(&self) -> Vec<KernelSpec> {
        let mut gammas = self.gamma_values.clone();
        gammas.sort_by(f64::total_cmp);
        gammas.dedup();
        let mut kinds = self.kernels.clone();
        kinds.sort();
        kinds.dedup();
        kinds
            .iter()
            .flat_map(|k| match k {
                KernelKind::Linear => vec![KernelSpec::Linear],
                KernelKind::Rbf => gammas.iter().map(|&gamma| KernelSpec::Rbf { gamma }).collect(),
            })
            .collect()
    }

    pub fn sorted_c(&self) -> Vec<f64> {
        let mut c = self.c_values.clone();
        c.sort_by(f64::total_cmp);
        c.dedup();
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernels.is_empty() || self.c_values.is_empty() {
            return Err(Error::Config("SVM grid needs at least one kernel and one C".into()));
        }
        if self.kernels.contains(&KernelKind::Rbf) && self.gamma_values.is_empty() {
            return Err(Error::Config("rbf kernel requested without gamma values".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("cross-validation needs at least 2 folds".into()));
        }
        self.kernel_specs().iter().try_for_each(KernelSpec::validate)?;
        match self.c_values.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            Some(c) => Err(Error::Config(format!("C {c} must be positive"))),
            None => Ok(()),
        }
    }
}

/// Fold index per sample. Each class is shuffled and dealt round-robin,
/// continuing where the previous class stopped so fold sizes stay balanced.
pub fn stratified_folds(labels: &[usize], n_classes: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    let mut assignment = vec![0; labels.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next = 0;
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < folds {
            return Err(Error::TooFewSamples(format!(
                "class {c} has {} samples for {folds} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for m in members {
            assignment[m] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

/// Cross-validation result of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub kernel: KernelSpec,
    pub c: f64,
    pub fold_accuracy: Vec<f64>,
    pub correct: usize,
    pub total: usize,
}

impl CvRow {
    /// Pooled accuracy over all validation predictions.
    pub fn mean(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearch {
    pub best: SvmConfig,
    pub table: Vec<CvRow>,
}

impl GridSearch {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let folds = self.table.first().map_or(0, |r| r.fold_accuracy.len());
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::format("<cv table>", e);
        let mut header = vec!["kernel".to_string(), "C".into(), "gamma".into()];
        header.extend((1..=folds).map(|f| format!("fold_{f}")));
        header.push("mean".into());
        w.write_record(&header).map_err(csv_err)?;
        for row in &self.table {
            let mut rec = vec![
                row.kernel.to_string(),
                format_value(row.c),
                row.kernel.gamma().map(format_value).unwrap_or_default(),
            ];
            rec.extend(row.fold_accuracy.iter().map(|&a| format_value(a)));
            rec.push(format_value(row.mean()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io("<cv table>", e))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Stratified k-fold search over the grid. The best point has the highest
/// pooled validation accuracy; ties go to the smaller C, then the linear
/// kernel, then the smaller gamma. `base` supplies the SMO settings.
pub fn grid_search_cv(
    x: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    grid: &SvmGrid,
    base: &SvmConfig,
    seed: u64,
) -> Result<GridSearch> {
    grid.validate()?;
    if x.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: labels.len(),
        });
    }
    let fold_of = stratified_folds(labels, n_classes, grid.folds, derive_seed(seed, 0))?;
    let folds: Vec<(Vec<usize>, Vec<usize>)> = (0..grid.folds)
        .map(|f| (0..x.len()).partition(|&i| fold_of[i] != f))
        .collect();
    let pairwise = PairwiseBase::new(x);
    let kernels = grid.kernel_specs();
    let cs = grid.sorted_c();

    let rows_per_kernel: Vec<Vec<CvRow>> = kernels
        .par_iter()
        .map(|kernel| {
            let gram = Gram::from_base(kernel, &pairwise);
            cs.par_iter()
                .map(|&c| {
                    let cfg = SvmConfig {
                        kernel: *kernel,
                        c,
                        ..*base
                    };
                    let per_fold: Vec<(usize, usize)> = folds
                        .par_iter()
                        .enumerate()
                        .map(|(f, (train, val))| {
                            let machines =
                                fit_pairs(&gram, labels, train, n_classes, &cfg, derive_seed(seed, 1 + f as u64))?;
                            let correct = val
                                .iter()
                                .filter(|&&v| vote_indexed(&machines, &gram, v, n_classes) == labels[v])
                                .count();
                            Ok((correct, val.len()))
                        })
                        .collect::<Result<_>>()?;
                    Ok(CvRow {
                        kernel: *kernel,
                        c,
                        fold_accuracy: per_fold.iter().map(|&(k, n)| k as f64 / n as f64).collect(),
                        correct: per_fold.iter().map(|p| p.0).sum(),
                        total: per_fold.iter().map(|p| p.1).sum(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    // table in tie-break order: C ascending, then kernels as listed
    let mut table = Vec::with_capacity(kernels.len() * cs.len());
    for ci in 0..cs.len() {
        for rows in &rows_per_kernel {
            table.push(rows[ci].clone());
        }
    }
    let best = table
        .iter()
        .fold(&table[0], |b, r| if r.correct > b.correct { r } else { b });
    Ok(GridSearch {
        best: SvmConfig {
            kernel: best.kernel,
            c: best.c,
            ..*base
        },
        table,
    })
}

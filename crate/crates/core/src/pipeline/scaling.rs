use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-component minimum and maximum observed on the fitting rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn fit_minmax(rows: &[Vec<f64>]) -> Result<ScalingParams> {
    let Some(first) = rows.first() else {
        return Err(Error::TooFewSamples("cannot fit scaling on zero rows".into()));
    };
    let mut min = first.clone();
    let mut max = first.clone();
    for r in &rows[1..] {
        if r.len() != min.len() {
            return Err(Error::DimensionMismatch {
                expected: min.len(),
                got: r.len(),
            });
        }
        for ((lo, hi), &v) in min.iter_mut().zip(max.iter_mut()).zip(r) {
            *lo = lo.min(v);
            *hi = hi.max(v);
        }
    }
    Ok(ScalingParams { min, max })
}

impl ScalingParams {
    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// `(v - min) / (max - min)` clamped to `[0, 1]`; constant components
    /// map to 0.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(v.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&x, (&lo, &hi))| {
                if hi > lo {
                    ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect())
    }

    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}

pub fn apply_minmax(v: &[f64], params: &ScalingParams) -> Result<Vec<f64>> {
    params.apply(v)
}

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(Error::Config(format!("rbf gamma {gamma} must be positive")))
            }
            _ => Ok(()),
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match *self {
            KernelSpec::Linear => None,
            KernelSpec::Rbf { gamma } => Some(gamma),
        }
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(x, y),
            KernelSpec::Rbf { gamma } => (-gamma * sq_dist(x, y)).exp(),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Linear => f.write_str("linear"),
            KernelSpec::Rbf { .. } => f.write_str("rbf"),
        }
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(spec.eval_unchecked(x, y))
}

/// Inner products and squared distances between all pairs of rows, from
/// which any kernel matrix over the same rows can be derived.
#[derive(Debug, Clone)]
pub struct PairwiseBase {
    n: usize,
    dots: Vec<f64>,
    sq: Vec<f64>,
}

impl PairwiseBase {
    pub fn new(x: &[Vec<f64>]) -> Self {
        let n = x.len();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = x
            .par_iter()
            .map(|a| x.iter().map(|b| (dot(a, b), sq_dist(a, b))).unzip())
            .collect();
        let mut dots = Vec::with_capacity(n * n);
        let mut sq = Vec::with_capacity(n * n);
        for (d, s) in rows {
            dots.extend(d);
            sq.extend(s);
        }
        Self { n, dots, sq }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// Dense kernel matrix over a fixed set of rows.
#[derive(Debug, Clone)]
pub struct Gram {
    n: usize,
    data: Vec<f64>,
}

impl Gram {
    pub fn new(spec: &KernelSpec, x: &[Vec<f64>]) -> Self {
        Self::from_base(spec, &PairwiseBase::new(x))
    }

    pub fn from_base(spec: &KernelSpec, base: &PairwiseBase) -> Self {
        let data = match *spec {
            KernelSpec::Linear => base.dots.clone(),
            KernelSpec::Rbf { gamma } => base.sq.iter().map(|&d| (-gamma * d).exp()).collect(),
        };
        Self { n: base.n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// The sub-matrix over `idx`, row-major.
    pub(crate) fn restrict(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .flat_map(|&i| idx.iter().map(move |&j| self.get(i, j)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let rbf = KernelSpec::Rbf { gamma: 0.5 };
        assert_eq!(kernel_eval(&rbf, &[0.3, -1.0], &[0.3, -1.0]).unwrap(), 1.0);
        assert_eq!(
            kernel_eval(&KernelSpec::Linear, &[1.0, 2.0], &[3.0, 4.0]).unwrap(),
            11.0
        );
        let default_rbf = KernelSpec::Rbf { gamma: 2f64.powi(-6) };
        let k = kernel_eval(&default_rbf, &[8.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!((k - (-1f64).exp()).abs() < 1e-15);
        assert!(kernel_eval(&rbf, &[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn rbf_gram_symmetric_unit_diagonal() {
        let x: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64 * 0.3, (i * i) as f64 * 0.01]).collect();
        let g = Gram::new(&KernelSpec::Rbf { gamma: 0.7 }, &x);
        for i in 0..7 {
            assert_eq!(g.get(i, i), 1.0);
            for j in 0..7 {
                assert_eq!(g.get(i, j), g.get(j, i));
            }
        }
    }

    #[test]
    fn validate_gamma() {
        assert!(KernelSpec::Rbf { gamma: 0.0 }.validate().is_err());
        assert!(KernelSpec::Linear.validate().is_ok());
    }
}

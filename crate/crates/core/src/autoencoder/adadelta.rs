use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdadeltaConfig {
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
}

impl Default for AdadeltaConfig {
    fn default() -> Self {
        Self {
            lr: 1.0,
            rho: 0.95,
            eps: 1e-8,
        }
    }
}

impl AdadeltaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("adadelta lr {} must be positive", self.lr)));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::Config(format!("adadelta rho {} outside [0, 1)", self.rho)));
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return Err(Error::Config(format!("adadelta eps {} must be positive", self.eps)));
        }
        Ok(())
    }
}

/// Running averages of squared gradients and squared updates, one entry per
/// parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdadeltaState {
    pub cfg: AdadeltaConfig,
    pub sq_grad: Vec<f64>,
    pub sq_delta: Vec<f64>,
}

impl AdadeltaState {
    pub fn new(cfg: AdadeltaConfig, n_params: usize) -> Self {
        Self {
            cfg,
            sq_grad: vec![0.0; n_params],
            sq_delta: vec![0.0; n_params],
        }
    }

    pub fn len(&self) -> usize {
        self.sq_grad.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sq_grad.is_empty()
    }

    /// Updates every parameter in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.len() || grads.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: params.len().max(grads.len()),
                right: self.len(),
            });
        }
        self.step_at(0, params, grads);
        Ok(())
    }

    /// Updates the parameter block that starts at `offset` in the flattened
    /// parameter order.
    pub(crate) fn step_at(&mut self, offset: usize, params: &mut [f64], grads: &[f64]) {
        let AdadeltaConfig { lr, rho, eps } = self.cfg;
        let acc_g = &mut self.sq_grad[offset..offset + params.len()];
        let acc_d = &mut self.sq_delta[offset..offset + params.len()];
        for (((p, &g), eg), ed) in params.iter_mut().zip(grads).zip(acc_g).zip(acc_d) {
            *eg = rho * *eg + (1.0 - rho) * g * g;
            let delta = -((*ed + eps).sqrt() / (*eg + eps).sqrt()) * g;
            *ed = rho * *ed + (1.0 - rho) * delta * delta;
            *p += lr * delta;
        }
    }
}

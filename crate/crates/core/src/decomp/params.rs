use serde::Deserialize;

use crate::error::{Error, Result};

/// Tuning of the double low-rank ADMM loop.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdmmParams {
    /// Weight of the second low-rank fit term.
    pub mu1: f64,
    /// Weight of the ℓ₁ sparsity term.
    pub mu2: f64,
    /// Penalty parameter.
    pub gamma: f64,
    /// Max-entry change of `Z` below which it is considered settled.
    pub z_tol: f64,
    /// Max-entry change of `R` below which it is considered settled.
    pub r_tol: f64,
    /// Objective decrease below which the loop stops.
    pub objective_tol: f64,
    pub max_iters: usize,
    /// Alternating sweeps per Tucker subproblem.
    pub hooi_sweeps: usize,
    /// Smoothing window; `None` selects `ceil((M + 1) / 2)`.
    pub window: Option<usize>,
}

impl Default for AdmmParams {
    fn default() -> Self {
        AdmmParams {
            mu1: 0.01,
            mu2: 0.5,
            gamma: 1.5,
            z_tol: 1e-5,
            r_tol: 1e-5,
            objective_tol: 1e-5,
            max_iters: 300,
            hooi_sweeps: 1,
            window: None,
        }
    }
}

impl AdmmParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.mu1 > 0.0
            && self.mu2 >= 0.0
            && self.gamma > 0.0
            && self.z_tol >= 0.0
            && self.r_tol >= 0.0
            && self.objective_tol >= 0.0
            && self.max_iters >= 1
            && self.hooi_sweeps >= 1
            && self.window != Some(0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid ADMM parameters: {self:?}")))
        }
    }
}

use serde::Deserialize;

use crate::error::{Error, Result};

/// Coarse-search and refinement settings of the parameter estimators.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchGrid {
    /// Step of the 2-D angular grids.
    pub coarse_step_deg: f64,
    /// Delay grid points over `[0, N / f_s)`.
    pub delay_points: usize,
    /// Simplex diameter at which refinement stops.
    pub refine_tol: f64,
    pub max_refine_iters: usize,
    /// Ceiling applied to the subspace spectrum.
    pub spectrum_cap: f64,
    /// Discarded Bessel tail below which the RIS expansion is truncated.
    pub series_tol: f64,
}

impl Default for SearchGrid {
    fn default() -> Self {
        SearchGrid {
            coarse_step_deg: 1.0,
            delay_points: 4096,
            refine_tol: 1e-9,
            max_refine_iters: 400,
            spectrum_cap: 1e12,
            series_tol: 1e-12,
        }
    }
}

impl SearchGrid {
    pub fn coarse_step(&self) -> f64 {
        self.coarse_step_deg.to_radians()
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.coarse_step_deg > 0.0
            && self.coarse_step_deg <= 90.0
            && self.delay_points >= 2
            && self.refine_tol > 0.0
            && self.max_refine_iters >= 1
            && self.spectrum_cap > 0.0
            && self.series_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid search grid: {self:?}")))
        }
    }
}

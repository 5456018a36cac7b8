use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scenario::{cascade_channel_matrix, ChannelRealization, RisGeometry, SystemConfig};

/// Wrap an angle difference into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// `(1/L) Σ |xᵢ − x̃ᵢ|²`, with differences wrapped when `angular`.
pub fn mse(truth: &[f64], est: &[f64], angular: bool) -> Result<f64> {
    if truth.len() != est.len() {
        return Err(Error::LengthMismatch(truth.len(), est.len()));
    }
    if truth.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = truth
        .iter()
        .zip(est)
        .map(|(t, e)| {
            let d = t - e;
            if angular {
                wrap_angle(d).powi(2)
            } else {
                d * d
            }
        })
        .sum();
    Ok(sum / truth.len() as f64)
}

/// Complex counterpart of [`mse`].
pub fn mse_complex(truth: &[crate::linalg::C64], est: &[crate::linalg::C64]) -> Result<f64> {
    if truth.len() != est.len() {
        return Err(Error::LengthMismatch(truth.len(), est.len()));
    }
    if truth.is_empty() {
        return Ok(0.0);
    }
    Ok(truth.iter().zip(est).map(|(t, e)| (t - e).norm_sqr()).sum::<f64>() / truth.len() as f64)
}

/// Average over slices of `‖H − H̃‖²_F / ‖H‖²_F`.
pub fn nmse(truth: &[CMatrix], est: &[CMatrix]) -> Result<f64> {
    if truth.len() != est.len() {
        return Err(Error::LengthMismatch(truth.len(), est.len()));
    }
    if truth.is_empty() {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for (h, e) in truth.iter().zip(est) {
        if h.shape() != e.shape() {
            return Err(Error::DimensionMismatch {
                op: "nmse",
                expected: h.len(),
                got: e.len(),
            });
        }
        acc += (h - e).norm_squared() / h.norm_squared();
    }
    Ok(acc / truth.len() as f64)
}

/// Cascade-channel NMSE over the `K` pilot subcarriers and `M` slots,
/// evaluated slice by slice.
pub fn channel_nmse(
    truth: &ChannelRealization,
    est: &ChannelRealization,
    cfg: &SystemConfig,
    g: &RisGeometry,
) -> Result<f64> {
    let mut acc = 0.0;
    for m in 1..=cfg.slots {
        for k in 1..=cfg.pilot_subcarriers {
            let h = cascade_channel_matrix(truth, cfg, g, k, m)?;
            let e = cascade_channel_matrix(est, cfg, g, k, m)?;
            acc += nmse(std::slice::from_ref(&h), std::slice::from_ref(&e))?;
        }
    }
    Ok(acc / (cfg.slots * cfg.pilot_subcarriers) as f64)
}

use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};
use crate::scenario::{delay_response, SystemConfig};

use super::grid::SearchGrid;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// `|c̃ᴴ g(τ)| / (‖c̃‖ ‖g(τ)‖)`.
pub fn delay_correlation(c: &CVector, cfg: &SystemConfig, tau: f64) -> f64 {
    let g = delay_response(cfg, tau);
    let den = c.norm() * g.norm();
    if den > 0.0 {
        c.dotc(&g).norm() / den
    } else {
        0.0
    }
}

/// Maximizer of `f` on `[lo, hi]` by golden-section search.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64, max_iters: usize) -> f64 {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..max_iters {
        if hi - lo <= tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Path delay from its subcarrier factor column: grid search over one
/// unambiguous window `[0, N / f_s)` and golden-section refinement.
pub fn estimate_delay(c: &CVector, cfg: &SystemConfig, grid: &SearchGrid) -> Result<f64> {
    if c.len() != cfg.pilot_subcarriers {
        return Err(Error::DimensionMismatch {
            op: "estimate_delay",
            expected: cfg.pilot_subcarriers,
            got: c.len(),
        });
    }
    let norm = c.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::Degenerate("zero subcarrier factor column"));
    }
    let window = cfg.delay_window();
    let step = window / grid.delay_points as f64;
    // g(τ) = z^k with z = e^{-j2π f_s τ / N}; evaluate c̃ᴴg as a polynomial.
    let corr_at = |tau: f64| {
        let z = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * cfg.bandwidth_hz * tau / cfg.subcarriers as f64);
        let mut acc = C64::new(0.0, 0.0);
        let mut zk = z;
        for ck in c.iter() {
            acc += ck.conj() * zk;
            zk *= z;
        }
        acc.norm()
    };
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..grid.delay_points {
        let tau = step * i as f64;
        let v = corr_at(tau);
        if v > best.0 {
            best = (v, tau);
        }
    }
    let tol = grid.refine_tol * window;
    let refined = golden_section_max(corr_at, best.1 - step, best.1 + step, tol, grid.max_refine_iters);
    let tau = if corr_at(refined) > best.0 * (1.0 + 4.0 * f64::EPSILON) { refined } else { best.1 };
    Ok(tau.rem_euclid(window))
}

/// `f_d = ∠λ / (2π T_s N_b N_st)`.
pub fn estimate_doppler(eig: C64, cfg: &SystemConfig) -> f64 {
    eig.arg() / (2.0 * std::f64::consts::PI * cfg.slot_period())
}

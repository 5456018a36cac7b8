use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::tensor::Tensor4;

use super::factors::FactorSet;
use super::hooi::hooi;
use super::params::AdmmParams;
use super::stdce::fourd_stdce;

/// Why the loop ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    MaxIterations,
    IteratesSettled,
    ObjectiveStalled,
}

/// Final iterates and diagnostics of [`dlr4dtd`].
#[derive(Clone, Debug)]
pub struct AdmmState {
    /// Tucker-constrained estimate.
    pub z: Tensor4,
    /// CP-constrained estimate, equal to the reconstruction of the factors.
    pub r: Tensor4,
    /// Sparse outlier estimate.
    pub s: Tensor4,
    pub multiplier: Tensor4,
    pub iterations: usize,
    pub objective: Vec<f64>,
    pub stop: StopReason,
}

/// Entrywise complex soft-threshold: shrink each magnitude by `t / 2`.
pub fn soft_threshold(x: &Tensor4, t: f64) -> Tensor4 {
    let half = 0.5 * t;
    x.map(|z| {
        let n = z.norm();
        if n > half {
            z * ((n - half) / n)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn combine(terms: &[(f64, &Tensor4)], denom: f64) -> Tensor4 {
    let mut out = Tensor4::zeros(terms[0].1.shape());
    for &(w, t) in terms {
        out.axpy(C64::new(w / denom, 0.0), t).expect("equal shapes");
    }
    out
}

fn max_change(a: &Tensor4, b: &Tensor4) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `‖Y − Z − S‖² + μ₁‖Y − R − S‖² + μ₂‖S‖₁`.
pub fn objective(y: &Tensor4, z: &Tensor4, r: &Tensor4, s: &Tensor4, p: &AdmmParams) -> f64 {
    let mut f1 = 0.0;
    let mut f2 = 0.0;
    let mut l1 = 0.0;
    for i in 0..y.len() {
        let (yy, ss) = (y.data()[i], s.data()[i]);
        f1 += (yy - z.data()[i] - ss).norm_sqr();
        f2 += (yy - r.data()[i] - ss).norm_sqr();
        l1 += ss.norm();
    }
    f1 + p.mu1 * f2 + p.mu2 * l1
}

/// Double low-rank 4-D tensor decomposition: alternates a multilinear
/// rank-`L` Tucker fit, a rank-`L` Vandermonde-structured CP fit and an
/// ℓ₁-sparse outlier term, coupled through a scaled multiplier.
pub fn dlr4dtd(y: &Tensor4, rank: usize, p: &AdmmParams) -> Result<(FactorSet, AdmmState)> {
    p.validate()?;
    if !y.is_finite() {
        return Err(Error::Degenerate("non-finite observation"));
    }
    let shape = y.shape();
    let (mu1, gamma) = (p.mu1, p.gamma);
    let mut z = Tensor4::zeros(shape);
    let mut r = Tensor4::zeros(shape);
    let mut s = Tensor4::zeros(shape);
    let mut lam = Tensor4::zeros(shape);
    let mut tucker: Option<[CMatrix; 4]> = None;
    let mut factors = FactorSet::zeros(shape, rank);
    let mut trace = Vec::new();
    let mut stop = StopReason::MaxIterations;

    for it in 1..=p.max_iters {
        let tz = combine(&[(2.0, y), (-2.0, &s), (gamma, &r), (-1.0, &lam)], 2.0 + gamma);
        let tk = hooi(&tz, [rank; 4], p.hooi_sweeps, tucker.as_ref())?;
        let z_new = tk.reconstruct()?;
        tucker = Some(tk.factors);

        let o = combine(&[(2.0 * mu1, y), (-2.0 * mu1, &s), (gamma, &z_new), (1.0, &lam)], 2.0 * mu1 + gamma);
        factors = fourd_stdce(&o, rank, p.window)?;
        let r_new = factors.reconstruct()?;

        let resid = combine(&[(1.0 + mu1, y), (-1.0, &z_new), (-mu1, &r_new)], 1.0 + mu1);
        s = soft_threshold(&resid, p.mu2 / (1.0 + mu1));
        lam.axpy(C64::new(gamma, 0.0), &z_new)?;
        lam.axpy(C64::new(-gamma, 0.0), &r_new)?;

        let dz = max_change(&z_new, &z);
        let dr = max_change(&r_new, &r);
        z = z_new;
        r = r_new;
        let obj = objective(y, &z, &r, &s, p);
        if !obj.is_finite() {
            return Err(Error::Diverged { iteration: it });
        }
        let prev = trace.last().copied();
        trace.push(obj);

        if dz < p.z_tol && dr < p.r_tol {
            stop = StopReason::IteratesSettled;
            break;
        }
        if prev.is_some_and(|o| o - obj < p.objective_tol) {
            stop = StopReason::ObjectiveStalled;
            break;
        }
    }
    let iterations = trace.len();
    Ok((
        factors,
        AdmmState {
            z,
            r,
            s,
            multiplier: lam,
            iterations,
            objective: trace,
            stop,
        },
    ))
}

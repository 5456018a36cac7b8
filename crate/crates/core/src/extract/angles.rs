use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, CMatrix, CVector};
use crate::scenario::{
    bessel_weights, from_equivalent, harmonic_phase, to_equivalent, ula_steering, Interval, RisGeometry,
    SystemConfig,
};
use crate::txrx::PilotBlock;

use super::grid::SearchGrid;
use super::simplex::{nelder_mead, SimplexOptions};

/// Points `lo, lo + step, …` up to and including `hi`.
pub fn angle_grid(iv: &Interval, step: f64) -> Result<Vec<f64>> {
    let (lo, hi) = iv.radians();
    grid_between(lo, hi, step)
}

fn grid_between(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(hi > lo) || !(step > 0.0) {
        return Err(Error::EmptyGrid("angle"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let mut pts: Vec<f64> = (0..=n).map(|i| lo + step * i as f64).collect();
    if hi - pts[n] > 1e-12 {
        pts.push(hi);
    }
    Ok(pts)
}

fn simplex_opts(grid: &SearchGrid) -> SimplexOptions {
    SimplexOptions {
        initial_step: 0.5 * grid.coarse_step(),
        xtol: grid.refine_tol,
        ftol: 0.0,
        max_iters: grid.max_refine_iters,
    }
}

/// `|ãᴴ Υᵀ a_s(φ, θ)| / (‖ã‖ ‖Υᵀ a_s‖)`.
pub fn spatial_correlation(a: &CVector, pb: &PilotBlock, cfg: &SystemConfig, bs: f64, ms: f64) -> f64 {
    let model = pb.upsilon().transpose() * crate::scenario::spatial_steering(cfg, bs, ms);
    let den = a.norm() * model.norm();
    if den > 0.0 {
        a.dotc(&model).norm() / den
    } else {
        0.0
    }
}

struct SpatialModel {
    fx_t: CMatrix,
    w_t: CMatrix,
    a_conj: CMatrix,
    a_norm: f64,
    n_bs: usize,
    n_ms: usize,
}

impl SpatialModel {
    fn new(a: &CVector, pb: &PilotBlock, cfg: &SystemConfig) -> Result<Self> {
        let ns = pb.combiner.ncols();
        let nb = pb.symbols.ncols();
        if a.len() != ns * nb {
            return Err(Error::DimensionMismatch {
                op: "estimate_bs_ms_angles",
                expected: ns * nb,
                got: a.len(),
            });
        }
        let a_norm = a.norm();
        if a_norm == 0.0 || !a_norm.is_finite() {
            return Err(Error::Degenerate("zero spatial factor column"));
        }
        Ok(SpatialModel {
            fx_t: (&pb.precoder * &pb.symbols).transpose(),
            w_t: pb.combiner.transpose(),
            a_conj: CMatrix::from_column_slice(ns, nb, a.as_slice()).map(|z| z.conj()),
            a_norm,
            n_bs: cfg.bs_antennas,
            n_ms: cfg.ms_antennas,
        })
    }

    fn bs_part(&self, phi: f64) -> CVector {
        &self.fx_t * ula_steering(self.n_bs, phi)
    }

    fn ms_part(&self, theta: f64) -> CVector {
        &self.w_t * ula_steering(self.n_ms, theta)
    }

    // Υᵀ(a_B ⊗ a_M) = (FX)ᵀa_B ⊗ Wᵀa_M, so ãᴴ of it is wᵀ conj(Ã) u.
    fn corr(&self, phi: f64, theta: f64) -> f64 {
        let u = self.bs_part(phi);
        let w = self.ms_part(theta);
        let den = self.a_norm * u.norm() * w.norm();
        if den == 0.0 {
            return 0.0;
        }
        (w.transpose() * &self.a_conj * &u)[(0, 0)].norm() / den
    }
}

fn clamp_to(iv: &Interval, x: f64) -> f64 {
    let (lo, hi) = iv.radians();
    x.clamp(lo, hi)
}

/// BS departure and MS arrival angle of one path from its spatial factor
/// column: coarse 2-D correlation search, then simplex refinement.
pub fn estimate_bs_ms_angles(
    a: &CVector,
    pb: &PilotBlock,
    cfg: &SystemConfig,
    grid: &SearchGrid,
) -> Result<(f64, f64)> {
    let model = SpatialModel::new(a, pb, cfg)?;
    let (bs_iv, ms_iv) = (&cfg.angles.bs_departure, &cfg.angles.ms_arrival);
    let phis = angle_grid(bs_iv, grid.coarse_step())?;
    let thetas = angle_grid(ms_iv, grid.coarse_step())?;

    let us: Vec<(CVector, f64)> = phis
        .iter()
        .map(|&p| {
            let u = model.bs_part(p);
            let n = u.norm();
            (&model.a_conj * u, n)
        })
        .collect();
    let mut vals = vec![0.0; phis.len() * thetas.len()];
    for (j, &t) in thetas.iter().enumerate() {
        let w = model.ms_part(t);
        let wn = w.norm();
        for (i, (au, un)) in us.iter().enumerate() {
            let den = model.a_norm * un * wn;
            vals[i + phis.len() * j] = if den > 0.0 { (w.transpose() * au)[(0, 0)].norm() / den } else { 0.0 };
        }
    }

    // Sidelobes of the coarse map can beat the sampled main lobe, so refine
    // from several local maxima and keep the best.
    let cost = |x: &[f64]| -model.corr(clamp_to(bs_iv, x[0]), clamp_to(ms_iv, x[1]));
    let mut best = (f64::INFINITY, phis[0], thetas[0]);
    for (i, j) in local_maxima(&vals, phis.len(), thetas.len(), REFINE_STARTS) {
        let r = nelder_mead(cost, &[phis[i], thetas[j]], &simplex_opts(grid));
        if r.value < best.0 {
            best = (r.value, r.x[0], r.x[1]);
        }
    }
    Ok((clamp_to(bs_iv, best.1), clamp_to(ms_iv, best.2)))
}

const REFINE_STARTS: usize = 4;

/// Indices `(i, j)` of the `k` largest 8-neighbour local maxima of a
/// column-major `n × m` map.
fn local_maxima(v: &[f64], n: usize, m: usize, k: usize) -> Vec<(usize, usize)> {
    let at = |i: usize, j: usize| v[i + n * j];
    let mut peaks = Vec::new();
    for j in 0..m {
        for i in 0..n {
            let x = at(i, j);
            let mut is_peak = true;
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii >= n as i64 || jj >= m as i64 {
                        continue;
                    }
                    if at(ii as usize, jj as usize) > x {
                        is_peak = false;
                    }
                }
            }
            if is_peak {
                peaks.push((x, i, j));
            }
        }
    }
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0));
    peaks.into_iter().take(k.max(1)).map(|(_, i, j)| (i, j)).collect()
}

/// Projector onto the eigenvectors of `b bᴴ` other than the dominant one.
pub fn noise_projector(b: &CVector) -> Result<CMatrix> {
    if b.norm() == 0.0 || !b.norm().is_finite() {
        return Err(Error::Degenerate("zero RIS factor column"));
    }
    let (_, vecs) = hermitian_eig(&(b * b.adjoint()))?;
    let un = vecs.columns(1, b.len() - 1);
    Ok(&un * un.adjoint())
}

/// Evaluates `Ξᵀ Θ (J(θ_eq) ⊙ v(φ_eq))` for a fixed training pattern.
pub struct RisSteeringModel {
    geometry: RisGeometry,
    xi_theta: CMatrix,
}

impl RisSteeringModel {
    /// Uses the smallest expansion order whose discarded Bessel tail is
    /// below `series_tol`.
    pub fn new(pb: &PilotBlock, g: &RisGeometry, series_tol: f64) -> Result<Self> {
        let geometry = g.clone().with_truncation(g.converged_truncation(series_tol)?);
        let xi_theta = pb.ris_phases.transpose() * geometry.harmonic_matrix();
        Ok(RisSteeringModel { geometry, xi_theta })
    }

    pub fn geometry(&self) -> &RisGeometry {
        &self.geometry
    }

    pub fn bessel(&self, theta_eq: f64) -> Result<Vec<f64>> {
        bessel_weights(&self.geometry, theta_eq)
    }

    pub fn phase(&self, phi_eq: f64) -> CVector {
        harmonic_phase(&self.geometry, phi_eq)
    }

    fn combine(&self, bessel: &[f64], phase: &CVector) -> CVector {
        let x = CVector::from_fn(phase.len(), |i, _| phase[i] * bessel[i]);
        &self.xi_theta * x
    }

    pub fn response(&self, theta_eq: f64, phi_eq: f64) -> Result<CVector> {
        Ok(self.combine(&self.bessel(theta_eq)?, &self.phase(phi_eq)))
    }
}

/// Feasible `(θ_eq, φ_eq)` rectangle covering the configured RIS intervals.
fn equivalent_box(cfg: &SystemConfig) -> ((f64, f64), (f64, f64)) {
    let (al, ah) = cfg.angles.ris_arrival.radians();
    let (dl, dh) = cfg.angles.ris_departure.radians();
    (((al - dh) / 2.0, (ah - dl) / 2.0), ((al + dl) / 2.0, (ah + dh) / 2.0))
}

fn feasible(cfg: &SystemConfig, theta_eq: f64, phi_eq: f64) -> bool {
    let (arr, dep) = from_equivalent(theta_eq, phi_eq);
    let (al, ah) = cfg.angles.ris_arrival.radians();
    let (dl, dh) = cfg.angles.ris_departure.radians();
    let eps = 1e-12;
    arr >= al - eps && arr <= ah + eps && dep >= dl - eps && dep <= dh + eps
}

fn project_equivalent(cfg: &SystemConfig, theta_eq: f64, phi_eq: f64) -> (f64, f64) {
    let (arr, dep) = from_equivalent(theta_eq, phi_eq);
    to_equivalent(
        clamp_to(&cfg.angles.ris_arrival, arr),
        clamp_to(&cfg.angles.ris_departure, dep),
    )
}

/// Subspace spectrum `‖s‖² / (sᴴ P_n s)` over a `(θ_eq, φ_eq)` grid,
/// capped at `cap`. Infeasible grid points are omitted.
pub struct RisSpectrum {
    pub points: Vec<(f64, f64)>,
    pub values: Vec<f64>,
}

impl RisSpectrum {
    pub fn peak(&self) -> Option<((f64, f64), f64)> {
        self.values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, &v)| (self.points[i], v))
    }
}

pub fn ris_spectrum(
    b: &CVector,
    model: &RisSteeringModel,
    cfg: &SystemConfig,
    grid: &SearchGrid,
) -> Result<RisSpectrum> {
    let pn = noise_projector(b)?;
    let ((tl, th), (pl, ph)) = equivalent_box(cfg);
    let thetas = grid_between(tl, th, grid.coarse_step())?;
    let phis = grid_between(pl, ph, grid.coarse_step())?;
    let phases: Vec<CVector> = phis.iter().map(|&p| model.phase(p)).collect();
    let mut points = Vec::new();
    let mut values = Vec::new();
    for &t in &thetas {
        let bessel = model.bessel(t)?;
        for (&p, v) in phis.iter().zip(&phases) {
            if !feasible(cfg, t, p) {
                continue;
            }
            let s = model.combine(&bessel, v);
            let noise = s.dotc(&(&pn * &s)).re.max(0.0);
            let val = if noise > 0.0 { (s.norm_squared() / noise).min(grid.spectrum_cap) } else { grid.spectrum_cap };
            points.push((t, p));
            values.push(val);
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyGrid("RIS spectrum"));
    }
    Ok(RisSpectrum { points, values })
}

/// `|b̃ᴴ s| / (‖b̃‖ ‖s‖)` for the modelled response `s(θ_eq, φ_eq)`.
pub fn ris_correlation(b: &CVector, model: &RisSteeringModel, theta_eq: f64, phi_eq: f64) -> Result<f64> {
    let s = model.response(theta_eq, phi_eq)?;
    let den = b.norm() * s.norm();
    Ok(if den > 0.0 { b.dotc(&s).norm() / den } else { 0.0 })
}

/// RIS arrival and departure angle of one path from its half-slot factor
/// column: subspace spectrum peak, then joint simplex refinement of
/// `(θ_eq, φ_eq)` on the correlation with the expansion model.
pub fn estimate_ris_angles(
    b: &CVector,
    model: &RisSteeringModel,
    cfg: &SystemConfig,
    grid: &SearchGrid,
) -> Result<(f64, f64)> {
    let spectrum = ris_spectrum(b, model, cfg, grid)?;
    let ((t0, p0), _) = spectrum.peak().ok_or(Error::EmptyGrid("RIS spectrum"))?;
    let cost = |x: &[f64]| {
        let (t, p) = project_equivalent(cfg, x[0], x[1]);
        ris_correlation(b, model, t, p).map(|c| -c).unwrap_or(f64::INFINITY)
    };
    let r = nelder_mead(cost, &[t0, p0], &simplex_opts(grid));
    let (t, p) = project_equivalent(cfg, r.x[0], r.x[1]);
    let (arr, dep) = from_equivalent(t, p);
    Ok((
        clamp_to(&cfg.angles.ris_arrival, arr),
        clamp_to(&cfg.angles.ris_departure, dep),
    ))
}

/// Mean direction `atan2(Σ sin, Σ cos)`.
pub fn circular_mean(angles: &[f64]) -> f64 {
    let (s, c) = angles.iter().fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
    s.atan2(c)
}


//! Fisher information and Cramér-Rao bounds for the cascade-channel parameters.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64, J};
use crate::scenario::{
    cascade_ris_derivative, cascade_ris_vector, delay_response, doppler_response, spatial_steering,
    ula_steering, ula_steering_derivative, ChannelRealization, RisGeometry, SystemConfig,
};
use crate::tensor::Tensor4;
use crate::txrx::PilotBlock;

const MIN_INVERSE_CONDITION: f64 = 1e-14;

/// One real (or, for `Gain`, complex) channel parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamId {
    /// φ_BR
    BsDeparture,
    /// θ_RM of path `l`
    MsArrival(usize),
    /// θ_BR
    RisArrival,
    /// φ_RM of path `l`
    RisDeparture(usize),
    Delay(usize),
    Doppler(usize),
    Gain(usize),
}

impl ParamId {
    /// Ordering `φ_BR; θ_RM×L; θ_BR; φ_RM×L; τ×L; f_d×L; ρ×L`.
    pub fn all(paths: usize) -> Vec<ParamId> {
        let mut v = vec![ParamId::BsDeparture];
        v.extend((0..paths).map(ParamId::MsArrival));
        v.push(ParamId::RisArrival);
        v.extend((0..paths).map(ParamId::RisDeparture));
        v.extend((0..paths).map(ParamId::Delay));
        v.extend((0..paths).map(ParamId::Doppler));
        v.extend((0..paths).map(ParamId::Gain));
        v
    }

    pub fn index(self, paths: usize) -> usize {
        match self {
            ParamId::BsDeparture => 0,
            ParamId::MsArrival(l) => 1 + l,
            ParamId::RisArrival => 1 + paths,
            ParamId::RisDeparture(l) => 2 + paths + l,
            ParamId::Delay(l) => 2 + 2 * paths + l,
            ParamId::Doppler(l) => 2 + 3 * paths + l,
            ParamId::Gain(l) => 2 + 4 * paths + l,
        }
    }

    pub fn is_complex(self) -> bool {
        matches!(self, ParamId::Gain(_))
    }

    pub fn label(self) -> String {
        match self {
            ParamId::BsDeparture => "bs_departure".into(),
            ParamId::MsArrival(l) => format!("ms_arrival[{l}]"),
            ParamId::RisArrival => "ris_arrival".into(),
            ParamId::RisDeparture(l) => format!("ris_departure[{l}]"),
            ParamId::Delay(l) => format!("delay[{l}]"),
            ParamId::Doppler(l) => format!("doppler[{l}]"),
            ParamId::Gain(l) => format!("gain[{l}]"),
        }
    }
}

/// Noise covariance `σ² (I ⊗ WᵀW*)`, stored as its `N_s × N_s` block.
#[derive(Clone, Debug)]
pub struct NoiseCovariance {
    pub sigma: f64,
    pub block: CMatrix,
    block_inv: CMatrix,
}

impl NoiseCovariance {
    pub fn apply(&self, x: &[C64]) -> Result<CVector> {
        self.blockwise(x, &self.block, self.sigma * self.sigma)
    }

    pub fn apply_inverse(&self, x: &[C64]) -> Result<CVector> {
        self.blockwise(x, &self.block_inv, 1.0 / (self.sigma * self.sigma))
    }

    fn blockwise(&self, x: &[C64], m: &CMatrix, scale: f64) -> Result<CVector> {
        let n = m.nrows();
        if n == 0 || x.len() % n != 0 {
            return Err(Error::DimensionMismatch {
                op: "noise covariance",
                expected: n,
                got: x.len(),
            });
        }
        let mut out = CVector::zeros(x.len());
        for (i, chunk) in x.chunks(n).enumerate() {
            let y = m * CVector::from_column_slice(chunk) * C64::new(scale, 0.0);
            out.rows_mut(i * n, n).copy_from(&y);
        }
        Ok(out)
    }

    /// Dense `σ² (I_{len/N_s} ⊗ WᵀW*)`.
    pub fn dense(&self, len: usize) -> CMatrix {
        let n = self.block.nrows();
        let mut out = CMatrix::zeros(len, len);
        for i in 0..len / n {
            out.view_mut((i * n, i * n), (n, n))
                .copy_from(&(&self.block * C64::new(self.sigma * self.sigma, 0.0)));
        }
        out
    }
}

pub fn noise_covariance(pb: &PilotBlock, sigma: f64) -> Result<NoiseCovariance> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!("noise standard deviation must be positive, got {sigma}")));
    }
    let block = pb.combiner.transpose() * pb.combiner.map(|z| z.conj());
    let cond = crate::linalg::inverse_condition(&block)?;
    let block_inv = block
        .clone()
        .try_inverse()
        .filter(|_| cond > MIN_INVERSE_CONDITION)
        .ok_or(Error::Singular { what: "combiner Gram matrix", cond: 1.0 / cond })?;
    Ok(NoiseCovariance { sigma, block, block_inv })
}

/// Raw per-antenna noise level that gives `snr_db` in expectation:
/// `σ² = ‖Z‖² / (snr · E‖N^W‖²)`, `E‖N^W‖² = N_b N_st K M ‖W‖²_F`.
pub fn expected_sigma(z: &Tensor4, pb: &PilotBlock, snr_db: f64) -> f64 {
    let [_, nst, k, m] = z.shape();
    let blocks = (pb.symbols.ncols() * nst * k * m) as f64;
    let energy = blocks * pb.combiner.norm_squared();
    (z.norm_sqr() / (10f64.powf(snr_db / 10.0) * energy)).sqrt()
}

/// Everything needed to evaluate the Fisher information at the true
/// parameters.
#[derive(Clone, Debug)]
pub struct FimContext {
    pub realization: ChannelRealization,
    pub pilots: PilotBlock,
    pub config: SystemConfig,
    pub noise: NoiseCovariance,
    /// `∂z/∂η`, one column per [`ParamId::all`] entry.
    pub derivatives: CMatrix,
}

struct PathFactors {
    a: CVector,
    a_bs: CVector,
    a_ms: CVector,
    b: CVector,
    b_arr: CVector,
    b_dep: CVector,
    g: CVector,
    g_tau: CVector,
    d: CVector,
    d_fd: CVector,
}

fn kron4(d: &CVector, c: &CVector, b: &CVector, a: &CVector) -> CVector {
    d.kronecker(c).kronecker(b).kronecker(a)
}

impl FimContext {
    pub fn new(re: &ChannelRealization, pb: &PilotBlock, cfg: &SystemConfig, sigma: f64) -> Result<Self> {
        let noise = noise_covariance(pb, sigma)?;
        let g = RisGeometry::from_config(cfg);
        let ups_t = pb.upsilon().transpose();
        let xi_t = pb.ris_phases.transpose();
        let (nb, nm) = (cfg.bs_antennas, cfg.ms_antennas);
        let dc = CVector::from_fn(cfg.pilot_subcarriers, |k, _| {
            -J * (2.0 * std::f64::consts::PI * cfg.bandwidth_hz / cfg.subcarriers as f64 * (k + 1) as f64)
        });
        let dd = CVector::from_fn(cfg.slots, |m, _| {
            J * (2.0 * std::f64::consts::PI * cfg.slot_period() * (m + 1) as f64)
        });
        let factors: Vec<PathFactors> = re
            .paths
            .iter()
            .map(|p| {
                let ab = ula_steering(nb, re.bs_departure);
                let am = ula_steering(nm, p.ms_arrival);
                let g_tau = delay_response(cfg, p.delay);
                let d = doppler_response(cfg, p.doppler_hz);
                PathFactors {
                    a: &ups_t * spatial_steering(cfg, re.bs_departure, p.ms_arrival),
                    a_bs: &ups_t * ula_steering_derivative(nb, re.bs_departure).kronecker(&am),
                    a_ms: &ups_t * ab.kronecker(&ula_steering_derivative(nm, p.ms_arrival)),
                    b: &xi_t * cascade_ris_vector(&g, re.ris_arrival, p.ris_departure),
                    b_arr: &xi_t * cascade_ris_derivative(&g, re.ris_arrival, p.ris_departure, true),
                    b_dep: &xi_t * cascade_ris_derivative(&g, re.ris_arrival, p.ris_departure, false),
                    g: g_tau.clone(),
                    g_tau: g_tau.component_mul(&dc),
                    d_fd: d.component_mul(&dd),
                    d,
                }
            })
            .collect();
        let ids = ParamId::all(re.paths.len());
        let len = cfg.tensor_shape().iter().product();
        let mut derivatives = CMatrix::zeros(len, ids.len());
        for (col, id) in ids.iter().enumerate() {
            derivatives.set_column(col, &derivative(*id, re, &factors, len));
        }
        Ok(FimContext {
            realization: re.clone(),
            pilots: pb.clone(),
            config: cfg.clone(),
            noise,
            derivatives,
        })
    }

    pub fn num_paths(&self) -> usize {
        self.realization.paths.len()
    }

    pub fn ids(&self) -> Vec<ParamId> {
        ParamId::all(self.num_paths())
    }
}

fn derivative(id: ParamId, re: &ChannelRealization, f: &[PathFactors], len: usize) -> CVector {
    let rho = |l: usize| re.paths[l].gain;
    match id {
        ParamId::BsDeparture => f.iter().enumerate().fold(CVector::zeros(len), |acc, (l, p)| {
            acc + kron4(&p.d, &(&p.g * rho(l)), &p.b, &p.a_bs)
        }),
        ParamId::RisArrival => f.iter().enumerate().fold(CVector::zeros(len), |acc, (l, p)| {
            acc + kron4(&p.d, &(&p.g * rho(l)), &p.b_arr, &p.a)
        }),
        ParamId::MsArrival(l) => kron4(&f[l].d, &(&f[l].g * rho(l)), &f[l].b, &f[l].a_ms),
        ParamId::RisDeparture(l) => kron4(&f[l].d, &(&f[l].g * rho(l)), &f[l].b_dep, &f[l].a),
        ParamId::Delay(l) => kron4(&f[l].d, &(&f[l].g_tau * rho(l)), &f[l].b, &f[l].a),
        ParamId::Doppler(l) => kron4(&f[l].d_fd, &(&f[l].g * rho(l)), &f[l].b, &f[l].a),
        ParamId::Gain(l) => kron4(&f[l].d, &f[l].g, &f[l].b, &f[l].a),
    }
}

/// `∂z/∂η` for one parameter.
pub fn dz_dparam(ctx: &FimContext, which: ParamId) -> Result<CVector> {
    let l = ctx.num_paths();
    let idx = which.index(l);
    let valid = match which {
        ParamId::BsDeparture | ParamId::RisArrival => true,
        ParamId::MsArrival(p)
        | ParamId::RisDeparture(p)
        | ParamId::Delay(p)
        | ParamId::Doppler(p)
        | ParamId::Gain(p) => p < l,
    };
    if !valid {
        return Err(Error::DimensionMismatch {
            op: "dz_dparam path index",
            expected: l,
            got: idx,
        });
    }
    Ok(ctx.derivatives.column(idx).into_owned())
}

/// Gram matrix `Gᵢⱼ = (∂z/∂ηᵢ)ᴴ C⁻¹ (∂z/∂ηⱼ)`.
pub fn weighted_gram(ctx: &FimContext) -> Result<CMatrix> {
    let dcols = &ctx.derivatives;
    let mut whitened = CMatrix::zeros(dcols.nrows(), dcols.ncols());
    for j in 0..dcols.ncols() {
        let col = dcols.column(j).into_owned();
        whitened.set_column(j, &ctx.noise.apply_inverse(col.as_slice())?);
    }
    Ok(dcols.adjoint() * whitened)
}

/// Real Fisher information over `6L + 2` real parameters: the angles,
/// delays and Dopplers followed by `Re ρ_l, Im ρ_l` pairs.
pub fn fim_real(ctx: &FimContext) -> Result<DMatrix<f64>> {
    let g = weighted_gram(ctx)?;
    Ok(real_fim_from_gram(&g, ctx.num_paths()))
}

/// Expand the complex Gram matrix into the real parameterization where
/// each gain contributes `∂/∂Re ρ = v` and `∂/∂Im ρ = j v`.
pub fn real_fim_from_gram(g: &CMatrix, paths: usize) -> DMatrix<f64> {
    let real = 2 + 4 * paths;
    let n = real + 2 * paths;
    // real-parameter column index -> (gram column, multiplier)
    let map = |i: usize| -> (usize, C64) {
        if i < real {
            (i, C64::new(1.0, 0.0))
        } else {
            let l = (i - real) / 2;
            let im = (i - real) % 2 == 1;
            (real + l, if im { J } else { C64::new(1.0, 0.0) })
        }
    };
    let mut f = DMatrix::zeros(n, n);
    for i in 0..n {
        let (gi, si) = map(i);
        for j in 0..n {
            let (gj, sj) = map(j);
            f[(i, j)] = 2.0 * (si.conj() * g[(gi, gj)] * sj).re;
        }
    }
    0.5 * (&f + f.transpose())
}

/// `(5L + 2)` information matrix with doubled real-parameter entries
/// `2 Re{·}` and un-doubled entries `Re{·}` wherever a complex gain is
/// involved, symmetrized.
pub fn fim(ctx: &FimContext) -> Result<DMatrix<f64>> {
    let g = weighted_gram(ctx)?;
    let ids = ctx.ids();
    let n = ids.len();
    let mut f = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let w = if ids[i].is_complex() || ids[j].is_complex() { 1.0 } else { 2.0 };
            f[(i, j)] = w * g[(i, j)].re;
        }
    }
    Ok(0.5 * (&f + f.transpose()))
}

/// Inverse of a symmetric positive-definite matrix after Jacobi
/// equilibration. Returns the inverse and the condition number of the
/// equilibrated matrix.
pub fn equilibrated_inverse(f: &DMatrix<f64>, labels: &[String]) -> Result<(DMatrix<f64>, f64)> {
    let n = f.nrows();
    let scale: DVector<f64> = DVector::from_fn(n, |i, _| {
        let d = f[(i, i)];
        if d > 0.0 { 1.0 / d.sqrt() } else { 1.0 }
    });
    let eq = DMatrix::from_fn(n, n, |i, j| f[(i, j)] * scale[i] * scale[j]);
    let eig = eq.clone().symmetric_eigen();
    let (mut lo, mut hi, mut lo_idx) = (f64::INFINITY, 0.0f64, 0);
    for (i, &v) in eig.eigenvalues.iter().enumerate() {
        if v < lo {
            lo = v;
            lo_idx = i;
        }
        hi = hi.max(v.abs());
    }
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(lo > hi * MIN_INVERSE_CONDITION) {
        let v = eig.eigenvectors.column(lo_idx);
        let null_direction = labels
            .iter()
            .enumerate()
            .map(|(i, name)| (name.clone(), v[i] * scale[i]))
            .filter(|(_, c)| c.abs() > 1e-3 * v.amax() * scale.amax())
            .collect();
        return Err(Error::SingularFim { cond, null_direction });
    }
    let inv_eq = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v))
        * eig.eigenvectors.transpose();
    let inv = DMatrix::from_fn(n, n, |i, j| inv_eq[(i, j)] * scale[i] * scale[j]);
    Ok((inv, cond))
}

/// Variance lower bounds at the true parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrbReport {
    /// rad²
    pub bs_departure: f64,
    /// rad²
    pub ris_arrival: f64,
    /// rad², per path
    pub ms_arrival: Vec<f64>,
    /// rad², per path
    pub ris_departure: Vec<f64>,
    /// s², per path
    pub delay: Vec<f64>,
    /// Hz², per path
    pub doppler: Vec<f64>,
    /// Bound on `E|ρ̃ − ρ|²` (sum of the real and imaginary part bounds).
    pub gain: Vec<f64>,
    pub gain_re: Vec<f64>,
    pub gain_im: Vec<f64>,
    /// Gain entries of the inverse `(5L + 2)` information matrix.
    pub gain_complex_form: Vec<f64>,
    /// Condition number of the equilibrated real information matrix.
    pub condition: f64,
}

impl CrbReport {
    /// Per-metric bound averaged over paths, matching the MSE definition.
    pub fn metric(&self, name: &str) -> Option<f64> {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
        Some(match name {
            "bs_departure" => self.bs_departure,
            "ris_arrival" => self.ris_arrival,
            "ms_arrival" => mean(&self.ms_arrival),
            "ris_departure" => mean(&self.ris_departure),
            "delay" => mean(&self.delay),
            "doppler" => mean(&self.doppler),
            "gain" => mean(&self.gain),
            _ => return None,
        })
    }

    /// Every bound scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let s = |v: &[f64]| v.iter().map(|x| x * factor).collect::<Vec<_>>();
        CrbReport {
            bs_departure: self.bs_departure * factor,
            ris_arrival: self.ris_arrival * factor,
            ms_arrival: s(&self.ms_arrival),
            ris_departure: s(&self.ris_departure),
            delay: s(&self.delay),
            doppler: s(&self.doppler),
            gain: s(&self.gain),
            gain_re: s(&self.gain_re),
            gain_im: s(&self.gain_im),
            gain_complex_form: s(&self.gain_complex_form),
            condition: self.condition,
        }
    }
}

fn real_labels(paths: usize) -> Vec<String> {
    let mut v: Vec<String> = ParamId::all(paths)
        .into_iter()
        .filter(|p| !p.is_complex())
        .map(ParamId::label)
        .collect();
    for l in 0..paths {
        v.push(format!("gain_re[{l}]"));
        v.push(format!("gain_im[{l}]"));
    }
    v
}

pub fn crb_diag(ctx: &FimContext) -> Result<CrbReport> {
    let l = ctx.num_paths();
    let (inv, condition) = equilibrated_inverse(&fim_real(ctx)?, &real_labels(l))?;
    let labels: Vec<String> = ctx.ids().into_iter().map(ParamId::label).collect();
    let (inv5, _) = equilibrated_inverse(&fim(ctx)?, &labels)?;
    let diag = |i: usize| inv[(i, i)];
    let real = 2 + 4 * l;
    let report = CrbReport {
        bs_departure: diag(ParamId::BsDeparture.index(l)),
        ris_arrival: diag(ParamId::RisArrival.index(l)),
        ms_arrival: (0..l).map(|p| diag(ParamId::MsArrival(p).index(l))).collect(),
        ris_departure: (0..l).map(|p| diag(ParamId::RisDeparture(p).index(l))).collect(),
        delay: (0..l).map(|p| diag(ParamId::Delay(p).index(l))).collect(),
        doppler: (0..l).map(|p| diag(ParamId::Doppler(p).index(l))).collect(),
        gain: (0..l).map(|p| diag(real + 2 * p) + diag(real + 2 * p + 1)).collect(),
        gain_re: (0..l).map(|p| diag(real + 2 * p)).collect(),
        gain_im: (0..l).map(|p| diag(real + 2 * p + 1)).collect(),
        gain_complex_form: (0..l).map(|p| inv5[(ParamId::Gain(p).index(l), ParamId::Gain(p).index(l))]).collect(),
        condition,
    };
    Ok(report)
}

#[cfg(test)]
mod tests;

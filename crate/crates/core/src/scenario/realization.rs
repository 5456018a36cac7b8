use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{cis, complex_normal, CMatrix, CVector, C64};

use super::geometry::{cascade_ris_vector, circ_ris_steering, doppler_shift, ula_steering, RisGeometry};
use super::SystemConfig;

const MAX_REDRAWS: usize = 100_000;

/// One RIS-MS path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathParams {
    /// θ_RM, MS angle of arrival.
    pub ms_arrival: f64,
    /// φ_RM, RIS angle of departure.
    pub ris_departure: f64,
    /// θ_v, arrival angle relative to the direction of motion.
    pub motion_angle: f64,
    /// τ_RM.
    pub ris_ms_delay: f64,
    /// Cascade delay τ = τ_BR + τ_RM.
    pub delay: f64,
    pub doppler_hz: f64,
    /// RIS-MS gain β.
    pub beta: C64,
    /// Cascade gain ρ = αβ.
    pub gain: C64,
}

/// Ground-truth channel parameters of one subframe.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelRealization {
    /// φ_BR, BS angle of departure.
    pub bs_departure: f64,
    /// θ_BR, RIS angle of arrival.
    pub ris_arrival: f64,
    /// τ_BR.
    pub bs_ris_delay: f64,
    /// BS-RIS gain α.
    pub alpha: C64,
    pub paths: Vec<PathParams>,
}

fn uniform_open<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    loop {
        let x = rng.random_range(lo..hi);
        if x > lo {
            return x;
        }
    }
}

fn dopplers_separated(f: &[f64], gap: f64) -> bool {
    f.iter()
        .enumerate()
        .all(|(i, a)| f[i + 1..].iter().all(|b| (a - b).abs() >= gap))
}

/// Draw a realization; path Dopplers are redrawn until pairwise separated
/// by `cfg.doppler_gap_hz`.
pub fn gen_realization<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<ChannelRealization> {
    let ang = &cfg.angles;
    let (lo, hi) = ang.bs_departure.radians();
    let bs_departure = uniform_open(rng, lo, hi);
    let (lo, hi) = ang.ris_arrival.radians();
    let ris_arrival = uniform_open(rng, lo, hi);
    let alpha = complex_normal(rng);

    let span = cfg.delay_span * cfg.delay_window();
    let mut paths = Vec::with_capacity(cfg.paths);
    for _ in 0..cfg.paths {
        let (lo, hi) = ang.ms_arrival.radians();
        let ms_arrival = uniform_open(rng, lo, hi);
        let (lo, hi) = ang.ris_departure.radians();
        let ris_departure = uniform_open(rng, lo, hi);
        let delay = rng.random_range(0.0..span);
        let beta = complex_normal(rng);
        paths.push(PathParams {
            ms_arrival,
            ris_departure,
            motion_angle: 0.0,
            ris_ms_delay: 0.0,
            delay,
            doppler_hz: 0.0,
            beta,
            gain: alpha * beta,
        });
    }

    let (lo, hi) = ang.motion.radians();
    let mut redraws = 0;
    loop {
        for p in paths.iter_mut() {
            p.motion_angle = uniform_open(rng, lo, hi);
            p.doppler_hz = doppler_shift(cfg, p.motion_angle);
        }
        let f: Vec<f64> = paths.iter().map(|p| p.doppler_hz).collect();
        if dopplers_separated(&f, cfg.doppler_gap_hz) {
            break;
        }
        redraws += 1;
        if redraws >= MAX_REDRAWS {
            return Err(Error::InvalidConfig(format!(
                "could not separate path Dopplers by {} Hz",
                cfg.doppler_gap_hz
            )));
        }
    }

    // split each cascade delay into a common BS-RIS part and a per-path RIS-MS part
    let min_delay = paths.iter().map(|p| p.delay).fold(f64::INFINITY, f64::min);
    let bs_ris_delay = rng.random_range(0.0..1.0) * min_delay;
    for p in paths.iter_mut() {
        p.ris_ms_delay = p.delay - bs_ris_delay;
    }

    Ok(ChannelRealization {
        bs_departure,
        ris_arrival,
        bs_ris_delay,
        alpha,
        paths,
    })
}

impl ChannelRealization {
    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn dopplers(&self) -> Vec<f64> {
        self.paths.iter().map(|p| p.doppler_hz).collect()
    }

    pub fn delays(&self) -> Vec<f64> {
        self.paths.iter().map(|p| p.delay).collect()
    }

    pub fn gains(&self) -> Vec<C64> {
        self.paths.iter().map(|p| p.gain).collect()
    }
}

/// `a_s = a_B(φ_BR) ⊗ a_M(θ_RM)`.
pub fn spatial_steering(cfg: &SystemConfig, bs_departure: f64, ms_arrival: f64) -> CVector {
    let b = ula_steering(cfg.bs_antennas, bs_departure);
    let m = ula_steering(cfg.ms_antennas, ms_arrival);
    b.kronecker(&m)
}

/// `g(τ)` with entries `e^{−j2π k f_s τ / N}`, `k = 1..K`.
pub fn delay_response(cfg: &SystemConfig, delay: f64) -> CVector {
    let step = -2.0 * PI * cfg.bandwidth_hz * delay / cfg.subcarriers as f64;
    CVector::from_fn(cfg.pilot_subcarriers, |k, _| cis(step * (k + 1) as f64))
}

/// Doppler phase advance per aggregated slot, `ω = 2π f_d T_s N_b N_st`.
pub fn doppler_phase(cfg: &SystemConfig, doppler_hz: f64) -> f64 {
    2.0 * PI * doppler_hz * cfg.slot_period()
}

/// `d = [e^{jω}, …, e^{jωM}]`.
pub fn doppler_response(cfg: &SystemConfig, doppler_hz: f64) -> CVector {
    let w = doppler_phase(cfg, doppler_hz);
    CVector::from_fn(cfg.slots, |m, _| cis(w * (m + 1) as f64))
}

fn check_slice(cfg: &SystemConfig, k: usize, m: usize) -> Result<()> {
    if k == 0 || k > cfg.pilot_subcarriers {
        return Err(Error::DimensionMismatch {
            op: "subcarrier index",
            expected: cfg.pilot_subcarriers,
            got: k,
        });
    }
    if m == 0 || m > cfg.slots {
        return Err(Error::DimensionMismatch {
            op: "slot index",
            expected: cfg.slots,
            got: m,
        });
    }
    Ok(())
}

fn subcarrier_phase(cfg: &SystemConfig, k: usize, delay: f64) -> C64 {
    cis(-2.0 * PI * k as f64 * cfg.bandwidth_hz * delay / cfg.subcarriers as f64)
}

/// BS-RIS frequency response `G_k` (`N_R × N_BS`), `k` one-based.
pub fn bs_ris_matrix(re: &ChannelRealization, cfg: &SystemConfig, g: &RisGeometry, k: usize) -> CMatrix {
    let ar = circ_ris_steering(g, re.ris_arrival);
    let ab = ula_steering(cfg.bs_antennas, re.bs_departure);
    &ar * ab.transpose() * (re.alpha * subcarrier_phase(cfg, k, re.bs_ris_delay))
}

/// RIS-MS frequency response `H_k[m]` (`N_MS × N_R`), both indices one-based.
pub fn ris_ms_matrix(
    re: &ChannelRealization,
    cfg: &SystemConfig,
    g: &RisGeometry,
    k: usize,
    m: usize,
) -> CMatrix {
    let mut h = CMatrix::zeros(cfg.ms_antennas, g.elements);
    for p in &re.paths {
        let am = ula_steering(cfg.ms_antennas, p.ms_arrival);
        let ar = circ_ris_steering(g, p.ris_departure);
        let coef = p.beta
            * subcarrier_phase(cfg, k, p.ris_ms_delay)
            * cis(doppler_phase(cfg, p.doppler_hz) * m as f64);
        h += &am * ar.transpose() * coef;
    }
    h
}

/// Cascade channel `Σ_l ρ_l e^{−j2πk f_s τ_l/N} a_s a_rᵀ e^{jω_l m}`
/// (`N_BS N_MS × N_R`), both indices one-based.
pub fn cascade_channel_matrix(
    re: &ChannelRealization,
    cfg: &SystemConfig,
    g: &RisGeometry,
    k: usize,
    m: usize,
) -> Result<CMatrix> {
    check_slice(cfg, k, m)?;
    let mut h = CMatrix::zeros(cfg.bs_antennas * cfg.ms_antennas, g.elements);
    for p in &re.paths {
        let a_s = spatial_steering(cfg, re.bs_departure, p.ms_arrival);
        let a_r = cascade_ris_vector(g, re.ris_arrival, p.ris_departure);
        let coef = p.gain
            * subcarrier_phase(cfg, k, p.delay)
            * cis(doppler_phase(cfg, p.doppler_hz) * m as f64);
        h += &a_s * a_r.transpose() * coef;
    }
    Ok(h)
}

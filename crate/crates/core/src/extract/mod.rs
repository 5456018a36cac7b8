//! Channel-parameter extraction from estimated CP factors.

mod angles;
mod delay;
mod gains;
mod grid;
mod matching;
mod simplex;


use serde::Serialize;

use crate::decomp::FactorSet;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::scenario::{ChannelRealization, Interval, PathParams, RisGeometry, SystemConfig};
use crate::tensor::Tensor4;
use crate::txrx::PilotBlock;

pub use angles::{
    angle_grid, circular_mean, estimate_bs_ms_angles, estimate_ris_angles, noise_projector, ris_correlation,
    ris_spectrum, spatial_correlation, RisSpectrum, RisSteeringModel,
};
pub use delay::{delay_correlation, estimate_delay, estimate_doppler, golden_section_max};
pub use gains::estimate_gains;
pub use grid::SearchGrid;
pub use matching::{doppler_cost, match_paths};
pub use simplex::{nelder_mead, SimplexOptions, SimplexResult};

/// Per-path estimates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimatedPath {
    /// θ_RM
    pub ms_arrival: f64,
    /// φ_RM
    pub ris_departure: f64,
    pub delay: f64,
    pub doppler_hz: f64,
    pub gain: C64,
    /// This path's own φ_BR estimate before averaging.
    pub bs_departure: f64,
    /// This path's own θ_BR estimate before averaging.
    pub ris_arrival: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimatedParams {
    /// φ_BR, circular mean over paths.
    pub bs_departure: f64,
    /// θ_BR, circular mean over paths.
    pub ris_arrival: f64,
    pub paths: Vec<EstimatedPath>,
}

impl EstimatedParams {
    /// Paths reordered so that entry `i` is `self.paths[perm[i]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        EstimatedParams {
            bs_departure: self.bs_departure,
            ris_arrival: self.ris_arrival,
            paths: perm.iter().map(|&j| self.paths[j].clone()).collect(),
        }
    }

    /// A realization carrying the estimated cascade parameters. The
    /// link-level split (α, β, partial delays, motion angle) is not
    /// identifiable and set to neutral values.
    pub fn to_realization(&self) -> ChannelRealization {
        ChannelRealization {
            bs_departure: self.bs_departure,
            ris_arrival: self.ris_arrival,
            bs_ris_delay: 0.0,
            alpha: C64::new(1.0, 0.0),
            paths: self
                .paths
                .iter()
                .map(|p| PathParams {
                    ms_arrival: p.ms_arrival,
                    ris_departure: p.ris_departure,
                    motion_angle: 0.0,
                    ris_ms_delay: p.delay,
                    delay: p.delay,
                    doppler_hz: p.doppler_hz,
                    beta: p.gain,
                    gain: p.gain,
                })
                .collect(),
        }
    }
}

fn mean_in(iv: &Interval, angles: &[f64]) -> f64 {
    let (lo, hi) = iv.radians();
    let m = lo + (circular_mean(angles) - lo).rem_euclid(std::f64::consts::TAU);
    m.clamp(lo, hi)
}

/// Full extraction: angles, delay and Doppler per factor column, shared
/// angles averaged, then gains by least squares on `y`.
pub fn extract_params(
    fs: &FactorSet,
    y: &Tensor4,
    pb: &PilotBlock,
    cfg: &SystemConfig,
    grid: &SearchGrid,
) -> Result<EstimatedParams> {
    grid.validate()?;
    let l = fs.rank();
    if l == 0 {
        return Err(Error::Degenerate("empty factor set"));
    }
    let g = RisGeometry::from_config(cfg);
    let ris_model = RisSteeringModel::new(pb, &g, grid.series_tol)?;
    let mut paths = Vec::with_capacity(l);
    for i in 0..l {
        let (bs, ms) = estimate_bs_ms_angles(&fs.a.column(i).into_owned(), pb, cfg, grid)?;
        let (arr, dep) = estimate_ris_angles(&fs.b.column(i).into_owned(), &ris_model, cfg, grid)?;
        let delay = estimate_delay(&fs.c.column(i).into_owned(), cfg, grid)?;
        let doppler_hz = estimate_doppler(fs.doppler_eigs[i], cfg);
        paths.push(EstimatedPath {
            ms_arrival: ms,
            ris_departure: dep,
            delay,
            doppler_hz,
            gain: C64::new(0.0, 0.0),
            bs_departure: bs,
            ris_arrival: arr,
        });
    }
    let bs: Vec<f64> = paths.iter().map(|p| p.bs_departure).collect();
    let arr: Vec<f64> = paths.iter().map(|p| p.ris_arrival).collect();
    let mut est = EstimatedParams {
        bs_departure: mean_in(&cfg.angles.bs_departure, &bs),
        ris_arrival: mean_in(&cfg.angles.ris_arrival, &arr),
        paths,
    };
    let gains = estimate_gains(y, &est, pb, cfg, &g)?;
    for (p, r) in est.paths.iter_mut().zip(gains.iter()) {
        p.gain = *r;
    }
    Ok(est)
}

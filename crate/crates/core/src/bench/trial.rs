use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::crb::{crb_diag, CrbReport, FimContext};
use crate::decomp::{cp_als, dlr4dtd, fourd_stdce, CpAlsOptions, FactorSet, StopReason};
use crate::error::{Error, Result};
use crate::extract::{extract_params, match_paths, EstimatedParams};
use crate::scenario::{gen_realization, ChannelRealization, NoiseModel, RisGeometry, SystemConfig};
use crate::tensor::{Tensor4, Tensor5};
use crate::txrx::{build_noiseless, draw_raw_noise, gen_pilot_block, observe_with_noise, Observation, PilotBlock};

use super::metrics::{channel_nmse, mse, mse_complex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Dlr4dtd,
    FourdStdce,
    CpAls,
}

impl Solver {
    pub const ALL: [Solver; 3] = [Solver::Dlr4dtd, Solver::FourdStdce, Solver::CpAls];

    pub fn name(self) -> &'static str {
        match self {
            Solver::Dlr4dtd => "dlr4dtd",
            Solver::FourdStdce => "fourd_stdce",
            Solver::CpAls => "cp_als",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Solver::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown solver `{s}` (expected dlr4dtd, fourd_stdce or cp_als)")))
    }
}

/// Per-parameter mean squared errors of one trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamErrors {
    pub bs_departure: f64,
    pub ris_arrival: f64,
    pub ms_arrival: f64,
    pub ris_departure: f64,
    pub delay: f64,
    pub doppler: f64,
    pub gain: f64,
}

impl ParamErrors {
    pub const NAMES: [&'static str; 7] = [
        "bs_departure",
        "ris_arrival",
        "ms_arrival",
        "ris_departure",
        "delay",
        "doppler",
        "gain",
    ];

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "bs_departure" => self.bs_departure,
            "ris_arrival" => self.ris_arrival,
            "ms_arrival" => self.ms_arrival,
            "ris_departure" => self.ris_departure,
            "delay" => self.delay,
            "doppler" => self.doppler,
            "gain" => self.gain,
            _ => return None,
        })
    }

    /// Errors of `est` against `truth`, after pairing paths by Doppler.
    pub fn compute(truth: &ChannelRealization, est: &EstimatedParams) -> Result<Self> {
        let est = est.permuted(&match_paths(truth, est));
        let t = &truth.paths;
        let e = &est.paths;
        let pick = |f: fn(&crate::scenario::PathParams) -> f64| t.iter().map(f).collect::<Vec<_>>();
        Ok(ParamErrors {
            bs_departure: mse(&[truth.bs_departure], &[est.bs_departure], true)?,
            ris_arrival: mse(&[truth.ris_arrival], &[est.ris_arrival], true)?,
            ms_arrival: mse(&pick(|p| p.ms_arrival), &e.iter().map(|p| p.ms_arrival).collect::<Vec<_>>(), true)?,
            ris_departure: mse(
                &pick(|p| p.ris_departure),
                &e.iter().map(|p| p.ris_departure).collect::<Vec<_>>(),
                true,
            )?,
            delay: mse(&pick(|p| p.delay), &e.iter().map(|p| p.delay).collect::<Vec<_>>(), false)?,
            doppler: mse(&pick(|p| p.doppler_hz), &e.iter().map(|p| p.doppler_hz).collect::<Vec<_>>(), false)?,
            gain: mse_complex(&truth.gains(), &e.iter().map(|p| p.gain).collect::<Vec<_>>())?,
        })
    }
}

/// Outcome of one Monte-Carlo trial for one solver.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialReport {
    pub seed: u64,
    pub solver: Solver,
    pub snr_db: f64,
    pub velocity_kmh: f64,
    /// `None` when the solver or extraction failed; see `failure`.
    pub mse: Option<ParamErrors>,
    pub nmse: Option<f64>,
    /// Bounds at the true parameters and the realized noise level; `None`
    /// for noiseless observations.
    pub crb: Option<CrbReport>,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time_s: f64,
    pub failure: Option<String>,
    pub truth: ChannelRealization,
    pub estimate: Option<EstimatedParams>,
}

impl TrialReport {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    /// Failed, or stopped by the iteration cap.
    pub fn diverged(&self) -> bool {
        !self.succeeded() || !self.converged
    }

    /// Copy with the wall time zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        TrialReport {
            wall_time_s: 0.0,
            ..self.clone()
        }
    }
}

/// Everything drawn from one seed, shared by all solvers and SNR points.
#[derive(Clone, Debug)]
pub struct TrialData {
    pub realization: ChannelRealization,
    pub pilots: PilotBlock,
    pub noiseless: Tensor4,
    pub raw_noise: Tensor5,
}

impl TrialData {
    pub fn draw(cfg: &SystemConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let realization = gen_realization(cfg, &mut rng)?;
        let pilots = gen_pilot_block(cfg, &mut rng)?;
        let raw_noise = draw_raw_noise(cfg, &mut rng);
        let noiseless = build_noiseless(&realization, &pilots, cfg)?;
        Ok(TrialData {
            realization,
            pilots,
            noiseless,
            raw_noise,
        })
    }

    pub fn observe(&self, cfg: &SystemConfig, snr_db: f64) -> Result<Observation> {
        let snr = match cfg.noise {
            NoiseModel::Noiseless => f64::INFINITY,
            NoiseModel::Awgn => snr_db,
        };
        observe_with_noise(&self.noiseless, &self.pilots, &self.raw_noise, snr)
    }
}

/// Factor estimate from one solver.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub factors: FactorSet,
    pub iterations: usize,
    /// False when an iterative solver ran out of iterations.
    pub converged: bool,
}

pub fn decompose(solver: Solver, y: &Tensor4, cfg: &SystemConfig, seed: u64) -> Result<Decomposition> {
    let (factors, iterations, converged) = match solver {
        Solver::Dlr4dtd => {
            let (fs, st) = dlr4dtd(y, cfg.paths, &cfg.admm)?;
            (fs, st.iterations, st.stop != StopReason::MaxIterations)
        }
        Solver::FourdStdce => (fourd_stdce(y, cfg.paths, cfg.admm.window)?, 1, true),
        Solver::CpAls => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            let opts = CpAlsOptions::default();
            let (fs, it) = cp_als(y, cfg.paths, &opts, &mut rng)?;
            (fs, it, it < opts.max_sweeps)
        }
    };
    Ok(Decomposition {
        factors,
        iterations,
        converged,
    })
}

fn estimate(
    solver: Solver,
    data: &TrialData,
    obs: &Observation,
    cfg: &SystemConfig,
    seed: u64,
) -> Result<(EstimatedParams, Decomposition)> {
    let dec = decompose(solver, &obs.y, cfg, seed)?;
    let est = extract_params(&dec.factors, &obs.y, &data.pilots, cfg, &cfg.search)?;
    Ok((est, dec))
}

/// Reports of every solver on one draw, plus the bound for that draw.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub crb: Option<CrbReport>,
    pub reports: Vec<TrialReport>,
}

/// All requested solvers on the same draw. Setup failures are errors;
/// solver or extraction failures are recorded in the report.
pub fn run_trials(cfg: &SystemConfig, snr_db: f64, solvers: &[Solver], seed: u64, with_crb: bool) -> Result<TrialOutcome> {
    let data = TrialData::draw(cfg, seed)?;
    let obs = data.observe(cfg, snr_db)?;
    let crb = if with_crb && obs.sigma > 0.0 {
        FimContext::new(&data.realization, &data.pilots, cfg, obs.sigma)
            .and_then(|ctx| crb_diag(&ctx))
            .ok()
    } else {
        None
    };
    let g = RisGeometry::from_config(cfg);
    let mut out = Vec::with_capacity(solvers.len());
    for &solver in solvers {
        let start = Instant::now();
        let result = estimate(solver, &data, &obs, cfg, seed).and_then(|(est, dec)| {
            let errs = ParamErrors::compute(&data.realization, &est)?;
            let nmse = channel_nmse(&data.realization, &est.to_realization(), cfg, &g)?;
            Ok((est, dec, errs, nmse))
        });
        let wall_time_s = start.elapsed().as_secs_f64();
        let base = TrialReport {
            seed,
            solver,
            snr_db,
            velocity_kmh: cfg.velocity_kmh,
            mse: None,
            nmse: None,
            crb: crb.clone(),
            iterations: 0,
            converged: false,
            wall_time_s,
            failure: None,
            truth: data.realization.clone(),
            estimate: None,
        };
        out.push(match result {
            Ok((est, dec, errs, nmse)) if nmse.is_finite() => TrialReport {
                mse: Some(errs),
                nmse: Some(nmse),
                iterations: dec.iterations,
                converged: dec.converged,
                estimate: Some(est),
                ..base
            },
            Ok(_) => TrialReport {
                failure: Some("non-finite channel estimate".into()),
                ..base
            },
            Err(e) => TrialReport {
                failure: Some(e.to_string()),
                ..base
            },
        });
    }
    Ok(TrialOutcome { crb, reports: out })
}

/// One trial of one solver.
pub fn run_trial(cfg: &SystemConfig, snr_db: f64, solver: Solver, seed: u64) -> Result<TrialReport> {
    let mut v = run_trials(cfg, snr_db, &[solver], seed, true)?;
    Ok(v.reports.remove(0))
}

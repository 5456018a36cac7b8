use std::fs;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scenario::SystemConfig;

use super::trial::{run_trials, ParamErrors, Solver, TrialOutcome};

/// Swept quantity.
#[derive(Clone, Debug, PartialEq)]
pub enum SweepAxis {
    Snr(Vec<f64>),
    /// Velocities in km/h at a fixed SNR.
    Velocity { kmh: Vec<f64>, snr_db: f64 },
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Snr(_) => "snr_db",
            SweepAxis::Velocity { .. } => "velocity_kmh",
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            SweepAxis::Snr(v) => v,
            SweepAxis::Velocity { kmh, .. } => kmh,
        }
    }

    fn point(&self, base: &SystemConfig, i: usize) -> (SystemConfig, f64) {
        match self {
            SweepAxis::Snr(v) => (base.clone(), v[i]),
            SweepAxis::Velocity { kmh, snr_db } => (base.clone().with_velocity_kmh(kmh[i]), *snr_db),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub config: SystemConfig,
    pub axis: SweepAxis,
    pub trials: usize,
    /// Trial `t` uses seed `seed_base + t` at every sweep point.
    pub seed_base: u64,
    pub solvers: Vec<Solver>,
    /// Also emit Cramér-Rao bound rows under the solver name `crb`.
    pub with_crb: bool,
    pub out: Option<PathBuf>,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.solvers.is_empty() && !self.with_crb {
            return Err(Error::InvalidConfig("no solver selected".into()));
        }
        if self.axis.values().is_empty() {
            return Err(Error::InvalidConfig("empty sweep axis".into()));
        }
        for (i, _) in self.axis.values().iter().enumerate() {
            self.axis.point(&self.config, i).0.validate()?;
        }
        Ok(())
    }
}

/// Mean and standard error of one metric at one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub axis_value: f64,
    pub solver: String,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub axis: &'static str,
    pub rows: Vec<SummaryRow>,
    /// Outcomes indexed `[point][trial]`.
    pub outcomes: Vec<Vec<TrialOutcome>>,
}

impl SweepResult {
    pub fn row(&self, axis_value: f64, solver: &str, metric: &str) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.axis_value == axis_value && r.solver == solver && r.metric == metric)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{},solver,metric,mean,stderr,trials\n", self.axis);
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.axis_value, r.solver, r.metric, r.mean, r.stderr, r.trials
            ));
        }
        s
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn summarize(axis_value: f64, solver: &str, metric: &str, xs: &[f64]) -> SummaryRow {
    let (mean, stderr) = mean_stderr(xs);
    SummaryRow {
        axis_value,
        solver: solver.to_string(),
        metric: metric.to_string(),
        mean,
        stderr,
        trials: xs.len(),
    }
}

/// Run every `(point, trial)` pair in parallel and aggregate in index order.
/// Writes the CSV when the plan names an output path.
pub fn sweep(plan: &ExperimentPlan) -> Result<SweepResult> {
    plan.validate()?;
    let points = plan.axis.values().len();
    let jobs: Vec<(usize, usize)> = (0..points).flat_map(|p| (0..plan.trials).map(move |t| (p, t))).collect();
    let results: Vec<Result<TrialOutcome>> = jobs
        .par_iter()
        .map(|&(p, t)| {
            let (cfg, snr) = plan.axis.point(&plan.config, p);
            run_trials(&cfg, snr, &plan.solvers, plan.seed_base + t as u64, plan.with_crb)
        })
        .collect();
    let mut outcomes: Vec<Vec<TrialOutcome>> = vec![Vec::with_capacity(plan.trials); points];
    for ((p, _), r) in jobs.iter().zip(results) {
        outcomes[*p].push(r?);
    }

    let mut rows = Vec::new();
    for (p, per_trial) in outcomes.iter().enumerate() {
        let x = plan.axis.values()[p];
        for (si, solver) in plan.solvers.iter().enumerate() {
            let ok: Vec<_> = per_trial.iter().map(|o| &o.reports[si]).filter(|r| r.succeeded()).collect();
            for name in ParamErrors::NAMES {
                let xs: Vec<f64> = ok.iter().filter_map(|r| r.mse.as_ref()?.get(name)).collect();
                rows.push(summarize(x, solver.name(), name, &xs));
            }
            let nm: Vec<f64> = ok.iter().filter_map(|r| r.nmse).collect();
            rows.push(summarize(x, solver.name(), "nmse", &nm));
            let it: Vec<f64> = ok.iter().map(|r| r.iterations as f64).collect();
            rows.push(summarize(x, solver.name(), "iterations", &it));
            let failed = (per_trial.len() - ok.len()) as f64;
            rows.push(SummaryRow {
                axis_value: x,
                solver: solver.name().to_string(),
                metric: "failures".into(),
                mean: failed,
                stderr: 0.0,
                trials: per_trial.len(),
            });
        }
        if plan.with_crb {
            let bounds: Vec<_> = per_trial.iter().filter_map(|o| o.crb.as_ref()).collect();
            for name in ParamErrors::NAMES {
                let xs: Vec<f64> = bounds.iter().filter_map(|c| c.metric(name)).collect();
                rows.push(summarize(x, "crb", name, &xs));
            }
        }
    }
    let result = SweepResult {
        axis: plan.axis.name(),
        rows,
        outcomes,
    };
    if let Some(path) = &plan.out {
        let mut f = fs::File::create(path)?;
        f.write_all(result.to_csv().as_bytes())?;
    }
    Ok(result)
}

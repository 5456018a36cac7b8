use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ristensor::bench::{run_trials, selftest, sweep, ExperimentPlan, ParamErrors, Solver, SweepAxis, SweepResult, TrialReport};
use ristensor::scenario::SystemConfig;

#[derive(Parser)]
#[command(name = "ristensor", version, about = "RIS-assisted MIMO-OFDM channel estimation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML system configuration; the desk configuration when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated subset of dlr4dtd, fourd_stdce, cp_als.
    #[arg(long, value_delimiter = ',', default_value = "dlr4dtd,fourd_stdce,cp_als")]
    solvers: Vec<Solver>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit nonzero when any trial failed or hit its iteration cap.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run trials at one SNR and print the full reports.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
        snr_db: f64,
    },
    /// Mean and standard error of every metric across SNR.
    SweepSnr {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true,
              default_value = "-15,-10,-5,0,5,10,15,20")]
        snrs: Vec<f64>,
        /// Also emit bound rows.
        #[arg(long)]
        with_crb: bool,
    },
    /// Mean and standard error of every metric across velocity.
    SweepVelocity {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "40,80,120")]
        velocities: Vec<f64>,
        #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
        snr_db: f64,
    },
    /// Bound-only table across SNR, averaged over drawn realizations.
    Crb {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true,
              default_value = "-15,-10,-5,0,5,10,15,20")]
        snrs: Vec<f64>,
    },
    /// Built-in consistency checks.
    Selftest {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct Reports<'a> {
    trial: &'a [TrialReport],
}

fn load(path: &Option<PathBuf>) -> Result<SystemConfig, String> {
    match path {
        Some(p) => SystemConfig::load(p).map_err(|e| format!("{}: {e}", p.display())),
        None => Ok(SystemConfig::desk()),
    }
}

fn plan(common: &Common, axis: SweepAxis, solvers: Vec<Solver>, with_crb: bool) -> Result<ExperimentPlan, String> {
    Ok(ExperimentPlan {
        config: load(&common.config)?,
        axis,
        trials: common.trials.unwrap_or(50),
        seed_base: common.seed,
        solvers,
        with_crb,
        out: common.out.clone(),
    })
}

fn divergences<'a>(reports: impl Iterator<Item = &'a TrialReport>) -> Vec<String> {
    reports
        .filter(|r| r.diverged())
        .map(|r| {
            let why = r.failure.clone().unwrap_or_else(|| format!("no convergence after {} iterations", r.iterations));
            format!("seed {} {} at {} dB: {why}", r.seed, r.solver, r.snr_db)
        })
        .collect()
}

fn print_sweep(r: &SweepResult, to_stdout: bool) {
    if to_stdout {
        print!("{}", r.to_csv());
        return;
    }
    println!("{:>12} {:>12} {:>14} {:>12} {:>10}", r.axis, "solver", "metric", "mean", "stderr");
    for row in r.rows.iter().filter(|x| x.metric == "nmse" || x.solver == "crb") {
        println!(
            "{:>12} {:>12} {:>14} {:>12.4e} {:>10.2e}",
            row.axis_value, row.solver, row.metric, row.mean, row.stderr
        );
    }
}

fn finish(r: &SweepResult, common: &Common) -> Result<Vec<String>, String> {
    print_sweep(r, common.out.is_none());
    if let Some(p) = &common.out {
        eprintln!("wrote {}", p.display());
    }
    Ok(divergences(r.outcomes.iter().flatten().flat_map(|o| &o.reports)))
}

fn run(cli: Cli) -> Result<(Vec<String>, bool), String> {
    match cli.command {
        Command::Simulate { common, snr_db } => {
            let cfg = load(&common.config)?;
            let mut reports = Vec::new();
            for t in 0..common.trials.unwrap_or(1) {
                let o = run_trials(&cfg, snr_db, &common.solvers, common.seed + t as u64, true).map_err(|e| e.to_string())?;
                reports.extend(o.reports);
            }
            let text = toml::to_string(&Reports { trial: &reports }).map_err(|e| e.to_string())?;
            print!("{text}");
            if let Some(p) = &common.out {
                fs::write(p, trial_csv(&reports)).map_err(|e| format!("{}: {e}", p.display()))?;
            }
            Ok((divergences(reports.iter()), common.strict))
        }
        Command::SweepSnr { common, snrs, with_crb } => {
            let p = plan(&common, SweepAxis::Snr(snrs), common.solvers.clone(), with_crb)?;
            let r = sweep(&p).map_err(|e| e.to_string())?;
            Ok((finish(&r, &common)?, common.strict))
        }
        Command::SweepVelocity { common, velocities, snr_db } => {
            let axis = SweepAxis::Velocity { kmh: velocities, snr_db };
            let p = plan(&common, axis, common.solvers.clone(), false)?;
            let r = sweep(&p).map_err(|e| e.to_string())?;
            Ok((finish(&r, &common)?, common.strict))
        }
        Command::Crb { common, snrs } => {
            let p = plan(&common, SweepAxis::Snr(snrs), Vec::new(), true)?;
            let r = sweep(&p).map_err(|e| e.to_string())?;
            Ok((finish(&r, &common)?, common.strict))
        }
        Command::Selftest { config } => {
            let cfg = load(&config)?;
            let mut failed = Vec::new();
            for c in selftest(&cfg) {
                println!("{} {:<30} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                if !c.passed {
                    failed.push(c.name.to_string());
                }
            }
            Ok((failed, true))
        }
    }
}

fn trial_csv(reports: &[TrialReport]) -> String {
    let mut s = String::from("seed,solver,snr_db,velocity_kmh,");
    s.push_str(&ParamErrors::NAMES.join(","));
    s.push_str(",nmse,iterations,converged,failure\n");
    for r in reports {
        s.push_str(&format!("{},{},{},{},", r.seed, r.solver, r.snr_db, r.velocity_kmh));
        for name in ParamErrors::NAMES {
            let v = r.mse.as_ref().and_then(|m| m.get(name)).unwrap_or(f64::NAN);
            s.push_str(&format!("{v},"));
        }
        let fail = r.failure.as_deref().unwrap_or("").replace(',', ";");
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.nmse.unwrap_or(f64::NAN),
            r.iterations,
            r.converged,
            fail
        ));
    }
    s
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((flagged, strict)) => {
            for f in &flagged {
                eprintln!("diverged: {f}");
            }
            if strict && !flagged.is_empty() {
                eprintln!("{} flagged divergence(s)", flagged.len());
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

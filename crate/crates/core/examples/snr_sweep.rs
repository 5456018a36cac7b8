//! Small SNR sweep of every solver, written as CSV.

use ristensor::bench::{sweep, ExperimentPlan, Solver, SweepAxis};
use ristensor::scenario::SystemConfig;

fn main() -> ristensor::Result<()> {
    let out = std::env::temp_dir().join("ristensor_snr_sweep.csv");
    let plan = ExperimentPlan {
        config: SystemConfig::desk(),
        axis: SweepAxis::Snr(vec![-10.0, 0.0, 10.0, 20.0]),
        trials: 8,
        seed_base: 100,
        solvers: Solver::ALL.to_vec(),
        with_crb: true,
        out: Some(out.clone()),
    };
    let r = sweep(&plan)?;
    for snr in plan.axis.values() {
        let line: Vec<String> = Solver::ALL
            .iter()
            .map(|s| {
                let row = r.row(*snr, s.name(), "nmse").unwrap();
                format!("{} {:.3e}±{:.1e}", s, row.mean, row.stderr)
            })
            .collect();
        println!("{snr:>5} dB  {}", line.join("  "));
    }
    println!("wrote {} rows to {}", r.rows.len(), out.display());
    Ok(())
}

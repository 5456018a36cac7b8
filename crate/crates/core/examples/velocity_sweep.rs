//! Channel NMSE of the robust decomposition at several receiver speeds.

use ristensor::bench::{sweep, ExperimentPlan, Solver, SweepAxis};
use ristensor::scenario::SystemConfig;

fn main() -> ristensor::Result<()> {
    let plan = ExperimentPlan {
        config: SystemConfig::desk(),
        axis: SweepAxis::Velocity {
            kmh: vec![40.0, 80.0, 120.0],
            snr_db: 20.0,
        },
        trials: 10,
        seed_base: 0,
        solvers: vec![Solver::Dlr4dtd],
        with_crb: false,
        out: None,
    };
    let r = sweep(&plan)?;
    for v in plan.axis.values() {
        let row = r.row(*v, "dlr4dtd", "nmse").unwrap();
        let dop = SystemConfig::desk().with_velocity_kmh(*v).max_doppler_hz();
        println!("{v:>5} km/h  max Doppler {dop:>7.1} Hz  NMSE {:.3e} ± {:.1e}", row.mean, row.stderr);
    }
    Ok(())
}

//! One Monte-Carlo draw, every solver, parameter errors against the truth.

use ristensor::bench::{run_trials, ParamErrors, Solver};
use ristensor::scenario::SystemConfig;

fn main() -> ristensor::Result<()> {
    let cfg = SystemConfig::desk();
    let outcome = run_trials(&cfg, 10.0, &Solver::ALL, 42, true)?;

    print!("{:>12}", "solver");
    for name in ParamErrors::NAMES {
        print!("{name:>14}");
    }
    println!("{:>12}", "nmse");
    for r in &outcome.reports {
        let Some(m) = &r.mse else {
            println!("{:>12} failed: {}", r.solver, r.failure.as_deref().unwrap_or("?"));
            continue;
        };
        print!("{:>12}", r.solver.name());
        for name in ParamErrors::NAMES {
            print!("{:>14.3e}", m.get(name).unwrap());
        }
        println!("{:>12.3e}", r.nmse.unwrap());
    }
    if let Some(c) = &outcome.crb {
        print!("{:>12}", "crb");
        for name in ParamErrors::NAMES {
            print!("{:>14.3e}", c.metric(name).unwrap());
        }
        println!();
    }
    Ok(())
}

//! Objective trace of the robust low-rank ADMM decomposition at three SNRs.

use ristensor::bench::TrialData;
use ristensor::decomp::dlr4dtd;
use ristensor::scenario::SystemConfig;

fn main() -> ristensor::Result<()> {
    let cfg = SystemConfig::desk();
    let data = TrialData::draw(&cfg, 11)?;
    for snr in [-10.0, 0.0, 10.0] {
        let obs = data.observe(&cfg, snr)?;
        let (_, st) = dlr4dtd(&obs.y, cfg.paths, &cfg.admm)?;
        let trace: Vec<String> = st.objective.iter().take(12).map(|v| format!("{v:.4}")).collect();
        println!("{snr:>5} dB  {:?} after {} iterations", st.stop, st.iterations);
        println!("          {}", trace.join(" "));
        let outliers = st.s.data().iter().filter(|v| v.norm() > 0.0).count();
        println!("          {outliers} of {} entries flagged as outliers", st.s.len());
    }
    Ok(())
}

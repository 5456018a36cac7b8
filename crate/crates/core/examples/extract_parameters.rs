//! Physical parameters from decomposed factors: angles, delays, Dopplers
//! and gains, next to the drawn truth.

use ristensor::bench::TrialData;
use ristensor::decomp::fourd_stdce;
use ristensor::extract::{extract_params, match_paths};
use ristensor::scenario::SystemConfig;

fn main() -> ristensor::Result<()> {
    let cfg = SystemConfig::desk();
    let data = TrialData::draw(&cfg, 8)?;
    let obs = data.observe(&cfg, 15.0)?;
    let fs = fourd_stdce(&obs.y, cfg.paths, None)?;
    let est = extract_params(&fs, &obs.y, &data.pilots, &cfg, &cfg.search)?;
    let est = est.permuted(&match_paths(&data.realization, &est));
    let t = &data.realization;
    println!("BS departure   {:>10.5} rad  est {:>10.5}", t.bs_departure, est.bs_departure);
    println!("RIS arrival    {:>10.5} rad  est {:>10.5}", t.ris_arrival, est.ris_arrival);
    for (l, (p, e)) in t.paths.iter().zip(&est.paths).enumerate() {
        println!("path {l}");
        println!("  MS arrival    {:>10.5} rad  est {:>10.5}", p.ms_arrival, e.ms_arrival);
        println!("  RIS departure {:>10.5} rad  est {:>10.5}", p.ris_departure, e.ris_departure);
        println!("  delay         {:>10.3} ns   est {:>10.3}", p.delay * 1e9, e.delay * 1e9);
        println!("  Doppler       {:>10.2} Hz   est {:>10.2}", p.doppler_hz, e.doppler_hz);
        println!("  gain          {:>10.4}      est {:>10.4}", p.gain, e.gain);
    }
    Ok(())
}

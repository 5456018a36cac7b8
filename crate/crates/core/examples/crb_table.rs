//! Cramér-Rao bounds of one realization across SNR.

use ristensor::bench::TrialData;
use ristensor::crb::{crb_diag, expected_sigma, FimContext};
use ristensor::scenario::SystemConfig;

fn main() -> ristensor::Result<()> {
    let cfg = SystemConfig::desk();
    let data = TrialData::draw(&cfg, 0)?;
    println!("{:>6} {:>12} {:>12} {:>12} {:>12} {:>12}", "SNR", "φ_BR", "θ_RM", "τ", "f_d", "ρ");
    for snr in [-10.0, 0.0, 10.0, 20.0] {
        let sigma = expected_sigma(&data.noiseless, &data.pilots, snr);
        let ctx = FimContext::new(&data.realization, &data.pilots, &cfg, sigma)?;
        let c = crb_diag(&ctx)?;
        println!(
            "{snr:>6} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
            c.bs_departure,
            c.metric("ms_arrival").unwrap(),
            c.metric("delay").unwrap(),
            c.metric("doppler").unwrap(),
            c.metric("gain").unwrap(),
        );
    }
    Ok(())
}

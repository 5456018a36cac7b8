//! Alternating least squares on the same observation, compared with the
//! closed-form decomposition.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ristensor::bench::TrialData;
use ristensor::decomp::{cp_als, fourd_stdce, CpAlsOptions};
use ristensor::scenario::SystemConfig;

fn main() -> ristensor::Result<()> {
    let cfg = SystemConfig::desk();
    let data = TrialData::draw(&cfg, 2)?;
    for snr in [0.0, 20.0] {
        let obs = data.observe(&cfg, snr)?;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (als, sweeps) = cp_als(&obs.y, cfg.paths, &CpAlsOptions::default(), &mut rng)?;
        let closed = fourd_stdce(&obs.y, cfg.paths, None)?;
        let err = |t: &ristensor::tensor::Tensor4| (t - &data.noiseless).norm() / data.noiseless.norm();
        println!(
            "{snr:>4} dB  cp_als ({sweeps} sweeps) {:.3e}   closed form {:.3e}",
            err(&als.reconstruct()?),
            err(&closed.reconstruct()?)
        );
    }
    Ok(())
}

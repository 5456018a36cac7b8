//! The received tensor built from CP factors agrees with the one built
//! slice by slice from the cascade channel matrices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ristensor::scenario::{gen_realization, SystemConfig};
use ristensor::txrx::{build_noiseless, build_noiseless_slicewise, gen_pilot_block};

fn main() -> ristensor::Result<()> {
    let cfg = SystemConfig::desk();
    println!("tensor shape {:?}", cfg.tensor_shape());
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let re = gen_realization(&cfg, &mut rng)?;
        let pb = gen_pilot_block(&cfg, &mut rng)?;
        let a = build_noiseless(&re, &pb, &cfg)?;
        let b = build_noiseless_slicewise(&re, &pb, &cfg)?;
        worst = worst.max((&a - &b).max_abs());
    }
    println!("max abs difference over 20 draws: {worst:.3e}");
    Ok(())
}

//! Truncation error of the Bessel-harmonic expansion of the circular RIS
//! cascade response, for the default order and the converged one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ristensor::linalg::C64;
use ristensor::scenario::{cascade_ris_vector, jacobi_anger_factors, to_equivalent, RisGeometry};

fn worst_error(g: &RisGeometry, pairs: usize) -> ristensor::Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let arr = rng.random_range(-std::f64::consts::PI..0.0);
        let dep = rng.random_range(-std::f64::consts::FRAC_PI_2..0.0);
        let (t, p) = to_equivalent(arr, dep);
        let approx = jacobi_anger_factors(g, t, p)?.product() / C64::new(g.elements as f64, 0.0);
        worst = worst.max((approx - cascade_ris_vector(g, arr, dep)).camax());
    }
    Ok(worst)
}

fn main() -> ristensor::Result<()> {
    let lambda = 0.01;
    for radius in [2.0, 20.0] {
        let g = RisGeometry::new(64, radius * lambda, lambda);
        let conv = g.converged_truncation(1e-12)?;
        println!(
            "r = {radius:>4} λ  default I = {:>4}: {:.2e}   converged I = {conv:>4}: {:.2e}",
            g.truncation,
            worst_error(&g, 200)?,
            worst_error(&g.clone().with_truncation(conv), 200)?,
        );
    }
    Ok(())
}

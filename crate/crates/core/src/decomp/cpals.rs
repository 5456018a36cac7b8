use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{khatri_rao, random_cmatrix, CMatrix};
use crate::tensor::{cp_reconstruct, Tensor4};

use super::factors::{slot_rotation, FactorSet};

/// Stopping rule of [`cp_als`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpAlsOptions {
    pub max_sweeps: usize,
    /// Relative change of the residual below which iteration stops.
    pub tol: f64,
}

impl Default for CpAlsOptions {
    fn default() -> Self {
        CpAlsOptions { max_sweeps: 200, tol: 1e-8 }
    }
}

/// Least-squares solve `K Xᵀ = Tᵀ` for `X` through a QR factorization of `K`.
fn qr_solve(kr: &CMatrix, target_t: &CMatrix) -> Result<CMatrix> {
    let qr = kr.clone().qr();
    let rhs = qr.q().adjoint() * target_t;
    let sol = qr
        .r()
        .solve_upper_triangular(&rhs)
        .ok_or(Error::Singular { what: "CP-ALS normal system", cond: 0.0 })?;
    Ok(sol.transpose())
}

fn other_modes_kr(f: &[CMatrix; 4], n: usize) -> Result<CMatrix> {
    let mut acc: Option<CMatrix> = None;
    for m in (0..4).rev().filter(|&m| m != n) {
        acc = Some(match acc {
            None => f[m].clone(),
            Some(a) => khatri_rao(&a, &f[m])?,
        });
    }
    Ok(acc.expect("three remaining modes"))
}

/// Unstructured CP decomposition by alternating least squares, each
/// subproblem solved through QR. Returns the iterate with the lowest
/// residual, together with the number of sweeps run.
pub fn cp_als<R: Rng + ?Sized>(
    y: &Tensor4,
    rank: usize,
    opts: &CpAlsOptions,
    rng: &mut R,
) -> Result<(FactorSet, usize)> {
    let shape = y.shape();
    if rank == 0 {
        return Err(Error::RankOutOfRange { rank, max: shape.iter().copied().min().unwrap_or(0) });
    }
    if y.max_abs() == 0.0 {
        return Ok((FactorSet::zeros(shape, rank), 0));
    }
    let unfoldings: Vec<CMatrix> = (0..4).map(|n| y.unfold(n)).collect::<Result<_>>()?;
    let mut f: [CMatrix; 4] = std::array::from_fn(|n| random_cmatrix(shape[n], rank, rng));
    let norm = y.norm();
    let mut best = (f64::INFINITY, f.clone());
    let mut prev = f64::INFINITY;
    let mut sweeps = 0;
    for _ in 0..opts.max_sweeps {
        sweeps += 1;
        for n in 0..4 {
            let kr = other_modes_kr(&f, n)?;
            f[n] = qr_solve(&kr, &unfoldings[n].transpose())?;
            if n < 3 {
                for mut col in f[n].column_iter_mut() {
                    let c = col.norm();
                    if c > 0.0 {
                        col.unscale_mut(c);
                    }
                }
            }
        }
        let res = (&cp_reconstruct(&f[0], &f[1], &f[2], &f[3])? - y).norm() / norm;
        if !res.is_finite() {
            break;
        }
        if res < best.0 {
            best = (res, f.clone());
        }
        if prev.is_finite() && (prev - res).abs() <= opts.tol * prev {
            break;
        }
        prev = res;
    }
    let [a, b, c, d] = best.1;
    let doppler_eigs = slot_rotation(&d);
    Ok((FactorSet { a, b, c, d, doppler_eigs }, sweeps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fits_generic_low_rank_tensor() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f: Vec<CMatrix> = [6, 4, 5, 5].iter().map(|&n| random_cmatrix(n, 2, &mut rng)).collect();
        let y = cp_reconstruct(&f[0], &f[1], &f[2], &f[3]).unwrap();
        let (fs, _) = cp_als(&y, 2, &CpAlsOptions::default(), &mut rng).unwrap();
        let err = (&fs.reconstruct().unwrap() - &y).norm() / y.norm();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn rotation_of_vandermonde_column() {
        let lam = C64::from_polar(1.0, 0.7);
        let d = CMatrix::from_fn(5, 1, |m, _| lam.powi(m as i32 + 1) * 3.0);
        assert!((slot_rotation(&d)[0] - lam).norm() < 1e-14);
        let y = Tensor4::zeros([2, 2, 2, 2]);
        let (fs, _) = cp_als(&y, 1, &CpAlsOptions::default(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(fs.reconstruct().unwrap().max_abs(), 0.0);
    }
}

//! Complex matrix primitives: Kronecker and Khatri-Rao products, truncated
//! SVD, general eigendecomposition, pseudo-inverse.

use faer::{Mat, MatRef, Side};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const J: C64 = C64 { re: 0.0, im: 1.0 };

/// `e^{jx}`.
#[inline]
pub fn cis(x: f64) -> C64 {
    C64::new(x.cos(), x.sin())
}

/// Kronecker product of two vectors; the second index runs fastest.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Columnwise Kronecker product: column `l` is `a_l ⊗ b_l`.
pub fn khatri_rao(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch {
            op: "khatri_rao",
            expected: a.ncols(),
            got: b.ncols(),
        });
    }
    let br = b.nrows();
    Ok(CMatrix::from_fn(a.nrows() * br, a.ncols(), |r, c| {
        a[(r / br, c)] * b[(r % br, c)]
    }))
}

/// Rank-`r` truncated SVD `m ≈ U diag(s) Vᴴ` with nonincreasing `s`.
#[derive(Clone, Debug)]
pub struct TruncatedSvd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

impl TruncatedSvd {
    pub fn reconstruct(&self) -> CMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * self.v.adjoint()
    }
}

pub fn truncated_svd(m: &CMatrix, r: usize) -> Result<TruncatedSvd> {
    let max = m.nrows().min(m.ncols());
    if r > max {
        return Err(Error::RankOutOfRange { rank: r, max });
    }
    let full = full_svd(m)?;
    Ok(TruncatedSvd {
        u: full.u.columns(0, r).into_owned(),
        s: full.s[..r].to_vec(),
        v: full.v.columns(0, r).into_owned(),
    })
}

fn to_faer(m: &CMatrix) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: MatRef<'_, C64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD with singular values sorted in nonincreasing order.
pub fn full_svd(m: &CMatrix) -> Result<TruncatedSvd> {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return Ok(TruncatedSvd {
            u: CMatrix::zeros(m.nrows(), 0),
            s: Vec::new(),
            v: CMatrix::zeros(m.ncols(), 0),
        });
    }
    let svd = to_faer(m).thin_svd().map_err(|_| Error::NoConvergence("SVD"))?;
    let sv = svd.S().column_vector();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sv[j].re.total_cmp(&sv[i].re));
    let (u, v) = (svd.U(), svd.V());
    Ok(TruncatedSvd {
        u: CMatrix::from_fn(m.nrows(), k, |r, c| u[(r, order[c])]),
        s: order.iter().map(|&i| sv[i].re).collect(),
        v: CMatrix::from_fn(m.ncols(), k, |r, c| v[(r, order[c])]),
    })
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues nonincreasing.
pub fn hermitian_eig(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let eig = to_faer(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence("Hermitian eigendecomposition"))?;
    let s = eig.S().column_vector();
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&i, &j| s[j].re.total_cmp(&s[i].re));
    let u = eig.U();
    Ok((
        order.iter().map(|&i| s[i].re).collect(),
        CMatrix::from_fn(rows, rows, |r, c| u[(r, order[c])]),
    ))
}

/// Leading `r` left singular vectors, computed from the Hermitian
/// eigendecomposition of the Gram matrix `m mᴴ` when `m` is wide.
pub fn leading_left_subspace(m: &CMatrix, r: usize) -> Result<CMatrix> {
    let rows = m.nrows();
    if r > rows {
        return Err(Error::RankOutOfRange { rank: r, max: rows });
    }
    if rows > m.ncols() {
        return Ok(truncated_svd(m, r)?.u);
    }
    let (_, vecs) = hermitian_eig(&(m * m.adjoint()))?;
    Ok(vecs.columns(0, r).into_owned())
}

/// Eigendecomposition of a general square complex matrix.
#[derive(Clone, Debug)]
pub struct Eigen {
    /// Eigenvalues, unsorted.
    pub values: CVector,
    /// Unit-norm eigenvectors, column `i` paired with `values[i]`.
    pub vectors: CMatrix,
}

pub fn eig(m: &CMatrix) -> Result<Eigen> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Ok(Eigen {
            values: CVector::zeros(0),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let e = to_faer(m)
        .eigen()
        .map_err(|_| Error::NoConvergence("eigendecomposition"))?;
    let s = e.S().column_vector();
    let mut vectors = from_faer(e.U());
    for mut c in vectors.column_iter_mut() {
        let n = c.norm();
        if n > 0.0 {
            c.unscale_mut(n);
        }
    }
    Ok(Eigen {
        values: CVector::from_fn(rows, |i, _| s[i]),
        vectors,
    })
}

/// Moore-Penrose pseudo-inverse via the SVD, discarding singular values
/// below `max(rows, cols) · ε · σ_max`.
pub fn pinv(m: &CMatrix) -> Result<CMatrix> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(CMatrix::zeros(cols, rows));
    }
    let svd = full_svd(m)?;
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let cutoff = rows.max(cols) as f64 * f64::EPSILON * smax;
    let mut out = CMatrix::zeros(cols, rows);
    for (j, &s) in svd.s.iter().enumerate() {
        if s > cutoff {
            let vj = svd.v.column(j);
            let uj = svd.u.column(j);
            out += (vj * uj.adjoint()) * C64::new(1.0 / s, 0.0);
        }
    }
    Ok(out)
}

/// Ratio of the smallest to largest singular value (0 for empty input).
pub fn inverse_condition(m: &CMatrix) -> Result<f64> {
    let svd = full_svd(m)?;
    match (svd.s.first(), svd.s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => Ok(lo / hi),
        _ => Ok(0.0),
    }
}

/// One draw from the circularly symmetric complex normal `CN(0, 1)`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. `CN(0, 1)` entries.
pub fn random_cmatrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

//! Dense complex tensors of order 2 to 5.
//!
//! Storage is column-major in the multilinear sense: the first index varies
//! fastest, so entry `(i1, i2, ..., iN)` lives at
//! `i1 + I1 * (i2 + I2 * (i3 + ...))`. Every unfolding below is defined
//! relative to this order: the mode-n unfolding puts mode `n` on the rows and
//! the remaining modes, in increasing order with the lowest one fastest, on
//! the columns. With this convention the vectorised mode-1 unfolding is the
//! raw storage vector and, for a rank-one tensor `a∘b∘c∘d`, the mode-1
//! unfolding equals `a (d ⊗ c ⊗ b)ᵀ`.

use std::ops::{Add, Sub};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Dense complex tensor of order `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<const N: usize> {
    shape: [usize; N],
    data: Vec<C64>,
}

pub type Tensor3 = Tensor<3>;
pub type Tensor4 = Tensor<4>;
pub type Tensor5 = Tensor<5>;

impl<const N: usize> Tensor<N> {
    pub fn zeros(shape: [usize; N]) -> Self {
        let len = shape.iter().product();
        Self {
            shape,
            data: vec![C64::new(0.0, 0.0); len],
        }
    }

    /// Wraps a storage vector laid out first-index-fastest.
    pub fn from_vec(shape: [usize; N], data: Vec<C64>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(Error::DimensionMismatch {
                op: "Tensor::from_vec",
                expected: len,
                got: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    /// Builds a tensor by evaluating `f` at every multi-index.
    pub fn from_fn(shape: [usize; N], mut f: impl FnMut([usize; N]) -> C64) -> Self {
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut idx = [0usize; N];
        for _ in 0..len {
            data.push(f(idx));
            increment(&mut idx, &shape);
        }
        Self { shape, data }
    }

    pub fn shape(&self) -> [usize; N] {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn offset(&self, idx: [usize; N]) -> usize {
        let mut off = 0;
        let mut stride = 1;
        for (i, &d) in idx.iter().zip(self.shape.iter()) {
            off += i * stride;
            stride *= d;
        }
        off
    }

    pub fn get(&self, idx: [usize; N]) -> C64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: [usize; N], v: C64) {
        let off = self.offset(idx);
        self.data[off] = v;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Entrywise ℓ1 norm (sum of moduli).
    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            shape: self.shape,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Entrywise combination of two equally shaped tensors.
    pub fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        self.check_same_shape(other, "Tensor::zip_with")?;
        Ok(Self {
            shape: self.shape,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: C64, other: &Self) -> Result<()> {
        self.check_same_shape(other, "Tensor::axpy")?;
        for (a, &b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += alpha * b;
        }
        Ok(())
    }

    /// Frobenius inner product `⟨self, other⟩ = Σ conj(self) · other`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_same_shape(other, "Tensor::inner")?;
        Ok(self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn check_same_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        for (&a, &b) in self.shape.iter().zip(other.shape.iter()) {
            if a != b {
                return Err(Error::DimensionMismatch {
                    op,
                    expected: a,
                    got: b,
                });
            }
        }
        Ok(())
    }

    fn check_mode(&self, n: usize) -> Result<()> {
        if n >= N {
            return Err(Error::InvalidMode { mode: n + 1, order: N });
        }
        Ok(())
    }

    /// Mode-`n` unfolding (`n` is zero-based here; mode 1 in the usual
    /// notation is `n = 0`).
    pub fn unfold(&self, n: usize) -> Result<CMatrix> {
        self.check_mode(n)?;
        let rows = self.shape[n];
        let cols = if rows == 0 { 0 } else { self.len() / rows };
        let mut out = CMatrix::zeros(rows, cols);
        let mut idx = [0usize; N];
        for &v in &self.data {
            out[(idx[n], column_index(&idx, &self.shape, n))] = v;
            increment(&mut idx, &self.shape);
        }
        Ok(out)
    }

    /// Inverse of [`Tensor::unfold`].
    pub fn fold(m: &CMatrix, n: usize, shape: [usize; N]) -> Result<Self> {
        if n >= N {
            return Err(Error::InvalidMode { mode: n + 1, order: N });
        }
        let len: usize = shape.iter().product();
        if m.nrows() != shape[n] || m.nrows() * m.ncols() != len {
            return Err(Error::DimensionMismatch {
                op: "Tensor::fold",
                expected: len,
                got: m.nrows() * m.ncols(),
            });
        }
        Ok(Self::from_fn(shape, |idx| {
            m[(idx[n], column_index(&idx, &shape, n))]
        }))
    }

    /// Mode-`n` product `self ×ₙ m`: contracts mode `n` with the columns of
    /// `m`, replacing that dimension by `m.nrows()`.
    pub fn mode_product(&self, m: &CMatrix, n: usize) -> Result<Self> {
        self.check_mode(n)?;
        if m.ncols() != self.shape[n] {
            return Err(Error::DimensionMismatch {
                op: "Tensor::mode_product",
                expected: self.shape[n],
                got: m.ncols(),
            });
        }
        let mut shape = self.shape;
        shape[n] = m.nrows();
        // View the data as (inner, I_n, outer) with inner = prod of modes < n.
        let inner: usize = self.shape[..n].iter().product();
        let outer: usize = self.shape[n + 1..].iter().product();
        let (dn, rn) = (self.shape[n], m.nrows());
        let mut out = vec![C64::new(0.0, 0.0); inner * rn * outer];
        for o in 0..outer {
            for j in 0..dn {
                let src = &self.data[(o * dn + j) * inner..(o * dn + j + 1) * inner];
                for r in 0..rn {
                    let w = m[(r, j)];
                    if w == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let dst = &mut out[(o * rn + r) * inner..(o * rn + r + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += w * s;
                    }
                }
            }
        }
        Ok(Self { shape, data: out })
    }

    /// Mode-`n` product with the conjugate transpose of `m`.
    pub fn mode_product_adjoint(&self, m: &CMatrix, n: usize) -> Result<Self> {
        self.mode_product(&m.adjoint(), n)
    }
}

impl Tensor<5> {
    /// Collapses the first two modes: `Vec¹₂`. With first-index-fastest
    /// storage this is a pure reshape.
    pub fn frontal_vectorize(self) -> Tensor<4> {
        let s = self.shape;
        Tensor {
            shape: [s[0] * s[1], s[2], s[3], s[4]],
            data: self.data,
        }
    }
}

impl Tensor<4> {
    /// Collapses the first two modes: `Vec¹₂`.
    pub fn frontal_vectorize(self) -> Tensor<3> {
        let s = self.shape;
        Tensor {
            shape: [s[0] * s[1], s[2], s[3]],
            data: self.data,
        }
    }

    /// Inverse of [`Tensor::frontal_vectorize`]: splits the first mode into
    /// `(i1, i2)` with `i1` fastest.
    pub fn unvectorize(t: Tensor<3>, i1: usize, i2: usize) -> Result<Self> {
        let s = t.shape;
        if i1 * i2 != s[0] {
            return Err(Error::DimensionMismatch {
                op: "Tensor::unvectorize",
                expected: s[0],
                got: i1 * i2,
            });
        }
        Ok(Tensor {
            shape: [i1, i2, s[1], s[2]],
            data: t.data,
        })
    }
}

impl Tensor<3> {
    /// Collapses the first two modes into one, giving the `I1·I2 × I3`
    /// matrix of vectorised frontal slices.
    pub fn frontal_vectorize(self) -> Tensor<2> {
        let s = self.shape;
        Tensor {
            shape: [s[0] * s[1], s[2]],
            data: self.data,
        }
    }
}

impl<const N: usize> Add for &Tensor<N> {
    type Output = Tensor<N>;

    fn add(self, rhs: Self) -> Tensor<N> {
        self.zip_with(rhs, |a, b| a + b)
            .expect("tensor addition requires equal shapes")
    }
}

impl<const N: usize> Sub for &Tensor<N> {
    type Output = Tensor<N>;

    fn sub(self, rhs: Self) -> Tensor<N> {
        self.zip_with(rhs, |a, b| a - b)
            .expect("tensor subtraction requires equal shapes")
    }
}

#[inline]
fn increment<const N: usize>(idx: &mut [usize; N], shape: &[usize; N]) {
    for k in 0..N {
        idx[k] += 1;
        if idx[k] < shape[k] {
            return;
        }
        idx[k] = 0;
    }
}

#[inline]
fn column_index<const N: usize>(idx: &[usize; N], shape: &[usize; N], n: usize) -> usize {
    let mut col = 0;
    let mut stride = 1;
    for k in 0..N {
        if k == n {
            continue;
        }
        col += idx[k] * stride;
        stride *= shape[k];
    }
    col
}

/// `Σ_l a_l ∘ b_l ∘ c_l ∘ d_l`.
pub fn cp_reconstruct(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> Result<Tensor4> {
    let l = a.ncols();
    for m in [b, c, d] {
        if m.ncols() != l {
            return Err(Error::DimensionMismatch {
                op: "cp_reconstruct",
                expected: l,
                got: m.ncols(),
            });
        }
    }
    let shape = [a.nrows(), b.nrows(), c.nrows(), d.nrows()];
    let mut out = Tensor4::zeros(shape);
    let (i1, i2, i3, i4) = (shape[0], shape[1], shape[2], shape[3]);
    let data = out.data_mut();
    for r in 0..l {
        for m in 0..i4 {
            let dm = d[(m, r)];
            for k in 0..i3 {
                let ck = c[(k, r)] * dm;
                for j in 0..i2 {
                    let bj = b[(j, r)] * ck;
                    let base = i1 * (j + i2 * (k + i3 * m));
                    for i in 0..i1 {
                        data[base + i] += a[(i, r)] * bj;
                    }
                }
            }
        }
    }
    Ok(out)
}

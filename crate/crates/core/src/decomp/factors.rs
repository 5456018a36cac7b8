use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};
use crate::tensor::{cp_reconstruct, Tensor4};

/// Rank-`L` CP factors of a pilot/half-slot/subcarrier/slot tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorSet {
    /// `N_s N_b × L`
    pub a: CMatrix,
    /// `N_st × L`
    pub b: CMatrix,
    /// `K × L`
    pub c: CMatrix,
    /// `M × L`
    pub d: CMatrix,
    /// Per-path slot-to-slot rotation `e^{jω_l}`.
    pub doppler_eigs: CVector,
}

impl FactorSet {
    pub fn zeros(shape: [usize; 4], rank: usize) -> Self {
        FactorSet {
            a: CMatrix::zeros(shape[0], rank),
            b: CMatrix::zeros(shape[1], rank),
            c: CMatrix::zeros(shape[2], rank),
            d: CMatrix::zeros(shape[3], rank),
            doppler_eigs: CVector::from_element(rank, C64::new(1.0, 0.0)),
        }
    }

    pub fn rank(&self) -> usize {
        self.a.ncols()
    }

    pub fn shape(&self) -> [usize; 4] {
        [self.a.nrows(), self.b.nrows(), self.c.nrows(), self.d.nrows()]
    }

    pub fn reconstruct(&self) -> Result<Tensor4> {
        if self.doppler_eigs.len() != self.rank() {
            return Err(Error::LengthMismatch(self.doppler_eigs.len(), self.rank()));
        }
        cp_reconstruct(&self.a, &self.b, &self.c, &self.d)
    }

    /// Rank-one component `a_l ∘ b_l ∘ c_l ∘ d_l`.
    pub fn component(&self, l: usize) -> Result<Tensor4> {
        cp_reconstruct(
            &self.a.columns(l, 1).into_owned(),
            &self.b.columns(l, 1).into_owned(),
            &self.c.columns(l, 1).into_owned(),
            &self.d.columns(l, 1).into_owned(),
        )
    }
}

/// Unit-modulus rotation that best maps each entry of `d` to the next.
pub fn slot_rotation(d: &CMatrix) -> CVector {
    CVector::from_iterator(
        d.ncols(),
        d.column_iter().map(|col| {
            let s: C64 = (1..col.len()).map(|m| col[m - 1].conj() * col[m]).sum();
            if s.norm() > 0.0 {
                s / s.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        }),
    )
}

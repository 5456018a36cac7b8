use crate::error::Result;
use crate::linalg::{leading_left_subspace, CMatrix};
use crate::tensor::Tensor4;

/// Tucker model `core ×₁ U₁ ×₂ U₂ ×₃ U₃ ×₄ U₄` with orthonormal factors.
#[derive(Clone, Debug)]
pub struct Tucker {
    pub core: Tensor4,
    pub factors: [CMatrix; 4],
}

impl Tucker {
    pub fn reconstruct(&self) -> Result<Tensor4> {
        let mut t = self.core.clone();
        for (n, u) in self.factors.iter().enumerate() {
            t = t.mode_product(u, n)?;
        }
        Ok(t)
    }
}

fn project_except(t: &Tensor4, factors: &[CMatrix; 4], skip: usize) -> Result<Tensor4> {
    let mut y = t.clone();
    for (m, u) in factors.iter().enumerate() {
        if m != skip {
            y = y.mode_product_adjoint(u, m)?;
        }
    }
    Ok(y)
}

/// Higher-order orthogonal iteration for a multilinear rank `ranks` fit.
/// Starts from `init` when given, otherwise from the truncated HOSVD.
/// Ranks above a mode's dimension are clipped.
pub fn hooi(t: &Tensor4, ranks: [usize; 4], sweeps: usize, init: Option<&[CMatrix; 4]>) -> Result<Tucker> {
    let shape = t.shape();
    let r: [usize; 4] = std::array::from_fn(|n| ranks[n].min(shape[n]));
    let mut factors: [CMatrix; 4] = match init {
        Some(f) if (0..4).all(|n| f[n].shape() == (shape[n], r[n])) => f.clone(),
        _ => {
            let mut f: [CMatrix; 4] = Default::default();
            for n in 0..4 {
                f[n] = leading_left_subspace(&t.unfold(n)?, r[n])?;
            }
            f
        }
    };
    for _ in 0..sweeps {
        for n in 0..4 {
            let y = project_except(t, &factors, n)?;
            factors[n] = leading_left_subspace(&y.unfold(n)?, r[n])?;
        }
    }
    let mut core = t.clone();
    for (n, u) in factors.iter().enumerate() {
        core = core.mode_product_adjoint(u, n)?;
    }
    Ok(Tucker { core, factors })
}

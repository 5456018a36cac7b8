use crate::error::{Error, Result};
use crate::linalg::{eig, pinv, full_svd, CMatrix, CVector, C64};
use crate::tensor::Tensor4;

use super::factors::FactorSet;

/// Default smoothing window `ceil((M + 1) / 2)`.
pub fn smoothing_window(slots: usize) -> usize {
    (slots + 2) / 2
}

/// Mode-1 unfolding of `Vec¹₂(O)`, transposed: `KM × I₁I₂`, row `k + K m`.
pub fn slot_subcarrier_matrix(o: &Tensor4) -> CMatrix {
    let [i1, i2, k, m] = o.shape();
    CMatrix::from_column_slice(i1 * i2, k * m, o.data()).transpose()
}

/// Stack `L₄ = M + 1 − K₄` overlapping windows of `K₄` slots side by side:
/// column block `l` holds rows `K l .. K (l + K₄)` of `q1t`.
pub fn spatial_smoothing(q1t: &CMatrix, subcarriers: usize, k4: usize) -> Result<CMatrix> {
    let k = subcarriers;
    if k == 0 || q1t.nrows() % k != 0 {
        return Err(Error::DimensionMismatch {
            op: "spatial_smoothing",
            expected: k,
            got: q1t.nrows(),
        });
    }
    let m = q1t.nrows() / k;
    if k4 == 0 || k4 > m {
        return Err(Error::Smoothing { k4, l4: 0, m });
    }
    let l4 = m + 1 - k4;
    let p = q1t.ncols();
    let mut out = CMatrix::zeros(k4 * k, l4 * p);
    for l in 0..l4 {
        out.view_mut((0, l * p), (k4 * k, p))
            .copy_from(&q1t.view((l * k, 0), (k4 * k, p)));
    }
    Ok(out)
}

/// Rank-one split `ẽ ≈ a ⊗ b` of a vector stored as `unvec_{rows×cols}`.
pub fn solve_khatri_rao_rank1(e: &[C64], rows: usize) -> Result<(CVector, CVector)> {
    if rows == 0 || e.len() % rows != 0 {
        return Err(Error::DimensionMismatch {
            op: "solve_khatri_rao_rank1",
            expected: rows,
            got: e.len(),
        });
    }
    let mat = CMatrix::from_column_slice(rows, e.len() / rows, e);
    let svd = full_svd(&mat)?;
    let s = svd.s[0];
    let a = svd.u.column(0) * C64::new(s, 0.0);
    let b = svd.v.column(0).map(|z| z.conj());
    Ok((a, b))
}

fn powers(lambda: C64, from: i32, count: usize) -> Vec<C64> {
    (0..count).map(|i| lambda.powi(from + i as i32)).collect()
}

/// Spatially smoothed 4-D tensor decomposition of `O` (first mode `N_s N_b`,
/// second `N_st`, third `K`, fourth `M`) into `rank` components. `window`
/// defaults to [`smoothing_window`].
pub fn fourd_stdce(o: &Tensor4, rank: usize, window: Option<usize>) -> Result<FactorSet> {
    let shape = o.shape();
    let [i1, i2, k, m] = shape;
    let k4 = window.unwrap_or_else(|| smoothing_window(m));
    if k4 < 2 || k4 > m {
        return Err(Error::Smoothing { k4, l4: (m + 1).saturating_sub(k4), m });
    }
    let l4 = m + 1 - k4;
    let p = i1 * i2;
    if rank == 0 || rank > k * (k4 - 1) || rank > l4 * p {
        return Err(Error::RankOutOfRange {
            rank,
            max: (k * (k4 - 1)).min(l4 * p),
        });
    }
    if o.max_abs() == 0.0 {
        return Ok(FactorSet::zeros(shape, rank));
    }

    let qs = spatial_smoothing(&slot_subcarrier_matrix(o), k, k4)?;
    let svd = full_svd(&qs)?;
    if svd.s.len() < rank || svd.s[rank - 1] <= 0.0 {
        return Err(Error::RankDeficient { what: "smoothed unfolding", ratio: 0.0 });
    }
    let us = svd.u.columns(0, rank).into_owned();
    let vs = svd.v.columns(0, rank).into_owned();

    let u1 = us.rows(0, k * (k4 - 1)).into_owned();
    let u2 = us.rows(k, k * (k4 - 1)).into_owned();
    let shift = pinv(&u1)? * u2;
    let e = eig(&shift)?;
    let pm = e.vectors;
    let pm_inv_t = pm
        .clone()
        .try_inverse()
        .ok_or(Error::Singular { what: "eigenvector matrix", cond: 0.0 })?
        .transpose();
    let lambdas: Vec<C64> = e
        .values
        .iter()
        .map(|&v| if v.norm() > 0.0 { v / v.norm() } else { C64::new(1.0, 0.0) })
        .collect();

    let us_p = us * &pm;
    let mut vsig = vs.map(|z| z.conj());
    for (j, &s) in svd.s[..rank].iter().enumerate() {
        vsig.column_mut(j).scale_mut(s);
    }
    let right = vsig * pm_inv_t;

    let mut fs = FactorSet::zeros(shape, rank);
    for (l, &lam) in lambdas.iter().enumerate() {
        let dk = powers(lam, 1, k4);
        let mut c = CVector::zeros(k);
        for (mm, w) in dk.iter().enumerate() {
            c += us_p.column(l).rows(mm * k, k) * w.conj();
        }
        fs.c.set_column(l, &(c / C64::new(k4 as f64, 0.0)));

        let dh = powers(lam, 0, l4);
        let mut ev = CVector::zeros(p);
        for (i, w) in dh.iter().enumerate() {
            ev += right.column(l).rows(i * p, p) * w.conj();
        }
        ev /= C64::new(l4 as f64, 0.0);
        let (a, b) = solve_khatri_rao_rank1(ev.as_slice(), i1)?;
        fs.a.set_column(l, &a);
        fs.b.set_column(l, &b);
        fs.d.set_column(l, &CVector::from_vec(powers(lam, 1, m)));
        fs.doppler_eigs[l] = lam;
    }
    Ok(fs)
}

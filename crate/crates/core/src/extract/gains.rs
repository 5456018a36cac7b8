use crate::error::{Error, Result};
use crate::linalg::{inverse_condition, CMatrix, CVector, C64};
use crate::scenario::{cascade_ris_vector, delay_response, doppler_response, spatial_steering, RisGeometry, SystemConfig};
use crate::tensor::Tensor4;
use crate::txrx::PilotBlock;

use super::EstimatedParams;

const MIN_INVERSE_CONDITION: f64 = 1e-12;

/// Path gains by least squares on every `(k, m)` slice `Y_{k,m} ≈ Σ ρ_i Φ_i`,
/// averaged over all slices.
pub fn estimate_gains(
    y: &Tensor4,
    est: &EstimatedParams,
    pb: &PilotBlock,
    cfg: &SystemConfig,
    g: &RisGeometry,
) -> Result<CVector> {
    let l = est.paths.len();
    let [p1, p2, kk, mm] = y.shape();
    let ups_t = pb.upsilon().transpose();
    let xi_t = pb.ris_phases.transpose();
    let mut a = Vec::with_capacity(l);
    let mut b = Vec::with_capacity(l);
    let mut gk = Vec::with_capacity(l);
    let mut dm = Vec::with_capacity(l);
    for p in &est.paths {
        a.push(&ups_t * spatial_steering(cfg, est.bs_departure, p.ms_arrival));
        b.push(&xi_t * cascade_ris_vector(g, est.ris_arrival, p.ris_departure));
        gk.push(delay_response(cfg, p.delay));
        dm.push(doppler_response(cfg, p.doppler_hz));
    }
    if a.first().is_some_and(|v| v.len() != p1) || b.first().is_some_and(|v| v.len() != p2) {
        return Err(Error::DimensionMismatch {
            op: "estimate_gains",
            expected: p1 * p2,
            got: a[0].len() * b[0].len(),
        });
    }
    let spatial = CMatrix::from_fn(l, l, |i, j| a[i].dotc(&a[j]) * b[i].dotc(&b[j]));
    let mut sum = CVector::zeros(l);
    let slice_len = p1 * p2;
    for m in 0..mm {
        for k in 0..kk {
            let h: Vec<C64> = (0..l).map(|i| gk[i][k] * dm[i][m]).collect();
            let gamma = CMatrix::from_fn(l, l, |i, j| spatial[(i, j)] * h[i].conj() * h[j]);
            let off = slice_len * (k + kk * m);
            let ys = CMatrix::from_column_slice(p1, p2, &y.data()[off..off + slice_len]);
            let zeta = CVector::from_fn(l, |i, _| {
                let v = a[i].adjoint() * &ys * b[i].map(|z| z.conj());
                v[(0, 0)] * h[i].conj()
            });
            let cond = inverse_condition(&gamma)?;
            if !(cond > MIN_INVERSE_CONDITION) {
                return Err(Error::Singular { what: "gain normal matrix", cond });
            }
            let rho = gamma
                .lu()
                .solve(&zeta)
                .ok_or(Error::Singular { what: "gain normal matrix", cond })?;
            sum += rho;
        }
    }
    Ok(sum / C64::new((kk * mm) as f64, 0.0))
}

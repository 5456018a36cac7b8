//! Bessel functions of the first kind for integer order.

use crate::error::{Error, Result};

const RESCALE: f64 = 1e250;

/// `J_0(x), J_1(x), …, J_max(x)` by Miller's downward recurrence,
/// normalised with `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j_upto(max_order: usize, x: f64) -> Result<Vec<f64>> {
    if !x.is_finite() {
        return Err(Error::Bessel(format!("non-finite argument {x}")));
    }
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    let ax = x.abs();
    let top = (max_order as f64).max(ax);
    let mut start = (top + 30.0 + (40.0 * top).sqrt()) as usize;
    start += start % 2;

    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut even_sum = 0.0;
    for k in (0..start).rev() {
        // J_k = (2(k+1)/x) J_{k+1} − J_{k+2}
        let prev = 2.0 * (k + 1) as f64 / ax * cur - next;
        next = cur;
        cur = prev;
        if k <= max_order {
            out[k] = cur;
        }
        if k % 2 == 0 && k > 0 {
            even_sum += cur;
        }
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            next /= RESCALE;
            even_sum /= RESCALE;
            for v in out.iter_mut().skip(k) {
                *v /= RESCALE;
            }
        }
    }
    let norm = cur + 2.0 * even_sum;
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::Bessel(format!("normalisation failed at x = {x}")));
    }
    for (n, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if x < 0.0 && n % 2 == 1 {
            *v = -*v;
        }
    }
    Ok(out)
}

/// `J_n(x)` for any integer order.
pub fn bessel_j(n: i64, x: f64) -> Result<f64> {
    let m = n.unsigned_abs() as usize;
    let v = bessel_j_upto(m, x)?[m];
    Ok(if n < 0 && m % 2 == 1 { -v } else { v })
}

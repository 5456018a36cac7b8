/// Settings of [`nelder_mead`].
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexOptions {
    /// Edge length of the initial simplex along each axis.
    pub initial_step: f64,
    /// Stop once every vertex is within this distance of the best one.
    pub xtol: f64,
    /// Stop once the spread of vertex values is at most this.
    pub ftol: f64,
    pub max_iters: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            initial_step: 0.05,
            xtol: 1e-9,
            ftol: 0.0,
            max_iters: 400,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit first.
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Derivative-free simplex minimization. Non-finite objective values are
/// treated as `+∞`. The returned point is never worse than `x0`.
pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &SimplexOptions) -> SimplexResult {
    let n = x0.len();
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut pts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    pts.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = eval(&x);
        pts.push((x, v));
    }
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &pts[0];
        let diameter = pts[1..].iter().map(|p| dist(&p.0, &best.0)).fold(0.0, f64::max);
        let spread = pts[n].1 - pts[0].1;
        if diameter <= opts.xtol || (opts.ftol > 0.0 && spread <= opts.ftol) {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, x) in centroid.iter_mut().zip(&p.0) {
                *c += x / n as f64;
            }
        }
        let worst = pts[n].clone();
        let xr = lerp(&centroid, &worst.0, -REFLECT);
        let fr = eval(&xr);
        if fr < pts[0].1 {
            let xe = lerp(&centroid, &worst.0, -EXPAND);
            let fe = eval(&xe);
            pts[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < pts[n - 1].1 {
            pts[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let x = lerp(&centroid, &xr, CONTRACT);
            let v = eval(&x);
            (x, v)
        } else {
            let x = lerp(&centroid, &worst.0, CONTRACT);
            let v = eval(&x);
            (x, v)
        };
        if fc < worst.1.min(fr) {
            pts[n] = (xc, fc);
            continue;
        }
        let anchor = pts[0].0.clone();
        for p in pts.iter_mut().skip(1) {
            p.0 = lerp(&anchor, &p.0, SHRINK);
            p.1 = eval(&p.0);
        }
    }
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = pts.swap_remove(0);
    SimplexResult {
        x,
        value,
        iterations,
        converged,
    }
}

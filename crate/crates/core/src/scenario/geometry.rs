use std::f64::consts::PI;

use crate::error::Result;
use crate::linalg::{cis, CMatrix, CVector, J};
use crate::special::bessel_j_upto;

use super::SystemConfig;

/// Uniform circular RIS layout.
#[derive(Clone, Debug)]
pub struct RisGeometry {
    pub elements: usize,
    pub radius: f64,
    pub wavelength: f64,
    /// Element azimuths `2π n / N_R`.
    pub azimuths: Vec<f64>,
    pub positions: Vec<[f64; 2]>,
    /// Jacobi-Anger truncation order.
    pub truncation: usize,
}

impl RisGeometry {
    pub fn new(elements: usize, radius: f64, wavelength: f64) -> Self {
        let azimuths: Vec<f64> = (0..elements)
            .map(|n| 2.0 * PI * n as f64 / elements as f64)
            .collect();
        let positions = azimuths
            .iter()
            .map(|z| [radius * z.cos(), radius * z.sin()])
            .collect();
        let truncation = 2 * (2.0 * PI * radius / wavelength - 1e-9).ceil() as usize;
        RisGeometry {
            elements,
            radius,
            wavelength,
            azimuths,
            positions,
            truncation,
        }
    }

    pub fn from_config(cfg: &SystemConfig) -> Self {
        Self::new(cfg.ris_elements, cfg.ris_radius_m(), cfg.wavelength())
    }

    pub fn with_truncation(mut self, order: usize) -> Self {
        self.truncation = order;
        self
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Largest Bessel argument of the cascade expansion, `2 k₀ r`.
    pub fn max_bessel_argument(&self) -> f64 {
        2.0 * self.wavenumber() * self.radius
    }

    /// Smallest order whose discarded Bessel tail `2 Σ_{i>I} |J_i(2k₀r)|`
    /// is below `tol`, never less than the default order.
    pub fn converged_truncation(&self, tol: f64) -> Result<usize> {
        let x = self.max_bessel_argument();
        let top = (2.0 * x) as usize + 60;
        let j = bessel_j_upto(top, x)?;
        let mut tail = 0.0;
        let mut order = top;
        for i in (1..=top).rev() {
            tail += 2.0 * j[i].abs();
            if tail >= tol {
                break;
            }
            order = i - 1;
        }
        Ok(order.max(self.truncation))
    }

    pub fn element_spacing(&self) -> f64 {
        2.0 * self.radius * (PI / self.elements as f64).sin()
    }

    /// Number of retained harmonics, `2I + 1`.
    pub fn harmonics(&self) -> usize {
        2 * self.truncation + 1
    }

    /// Harmonic matrix with entries `jⁱ e^{−j ζₙ i}` for `i = −I..I`.
    pub fn harmonic_matrix(&self) -> CMatrix {
        let order = self.truncation as i64;
        CMatrix::from_fn(self.elements, self.harmonics(), |n, col| {
            let i = col as i64 - order;
            J.powi(i.rem_euclid(4) as i32) * cis(-self.azimuths[n] * i as f64)
        })
    }
}

/// Half-wavelength ULA response `e^{jπk cos θ} / √n`.
pub fn ula_steering(n_ant: usize, angle: f64) -> CVector {
    let scale = 1.0 / (n_ant as f64).sqrt();
    let c = angle.cos();
    CVector::from_fn(n_ant, |k, _| cis(PI * k as f64 * c) * scale)
}

/// Derivative of [`ula_steering`] with respect to the angle.
pub fn ula_steering_derivative(n_ant: usize, angle: f64) -> CVector {
    let d = -PI * angle.sin();
    let a = ula_steering(n_ant, angle);
    CVector::from_fn(n_ant, |k, _| a[k] * J * (d * k as f64))
}

/// Circular-array response `e^{j k₀ pₙᵀ d(θ)} / √N_R`.
pub fn circ_ris_steering(g: &RisGeometry, angle: f64) -> CVector {
    let k0 = g.wavenumber();
    let dir = [angle.cos(), angle.sin()];
    let scale = 1.0 / (g.elements as f64).sqrt();
    CVector::from_fn(g.elements, |n, _| {
        let p = g.positions[n];
        cis(k0 * (p[0] * dir[0] + p[1] * dir[1])) * scale
    })
}

/// Phase of the cascade RIS response at element `n`.
fn cascade_phase(g: &RisGeometry, arrival: f64, departure: f64, n: usize) -> f64 {
    let z = g.azimuths[n];
    g.wavenumber() * g.radius * ((arrival - z).cos() + (departure - z).cos())
}

/// Cascade RIS vector `a_r(θ_BR, φ_RM)` with entries of modulus `1 / N_R`.
pub fn cascade_ris_vector(g: &RisGeometry, arrival: f64, departure: f64) -> CVector {
    let scale = 1.0 / g.elements as f64;
    CVector::from_fn(g.elements, |n, _| {
        cis(cascade_phase(g, arrival, departure, n)) * scale
    })
}

/// Derivative of [`cascade_ris_vector`] with respect to the arrival angle
/// (`wrt_arrival`) or the departure angle.
pub fn cascade_ris_derivative(
    g: &RisGeometry,
    arrival: f64,
    departure: f64,
    wrt_arrival: bool,
) -> CVector {
    let kr = g.wavenumber() * g.radius;
    let a = cascade_ris_vector(g, arrival, departure);
    CVector::from_fn(g.elements, |n, _| {
        let angle = if wrt_arrival { arrival } else { departure };
        a[n] * J * (-kr * (angle - g.azimuths[n]).sin())
    })
}

/// `(θ_eq, φ_eq)` from the physical pair `(θ_BR, φ_RM)`.
pub fn to_equivalent(arrival: f64, departure: f64) -> (f64, f64) {
    ((arrival - departure) / 2.0, (arrival + departure) / 2.0)
}

/// Inverse of [`to_equivalent`].
pub fn from_equivalent(theta_eq: f64, phi_eq: f64) -> (f64, f64) {
    (phi_eq + theta_eq, phi_eq - theta_eq)
}

/// Truncated Jacobi-Anger factorisation `N_R · a_r ≈ Θ · diag(bessel) · phase`.
#[derive(Clone, Debug)]
pub struct JacobiAnger {
    pub harmonics: CMatrix,
    /// `J_i(2 k₀ r cos θ_eq)` for `i = −I..I`.
    pub bessel: Vec<f64>,
    /// `e^{j φ_eq i}` for `i = −I..I`.
    pub phase: CVector,
}

impl JacobiAnger {
    pub fn product(&self) -> CVector {
        let weighted = CVector::from_fn(self.phase.len(), |i, _| self.phase[i] * self.bessel[i]);
        &self.harmonics * weighted
    }
}

/// Bessel weights `J_i(2 k₀ r cos θ_eq)`, `i = −I..I`.
pub fn bessel_weights(g: &RisGeometry, theta_eq: f64) -> Result<Vec<f64>> {
    let order = g.truncation;
    let x = 2.0 * g.wavenumber() * g.radius * theta_eq.cos();
    let pos = bessel_j_upto(order, x)?;
    Ok((0..g.harmonics())
        .map(|col| {
            let i = col as i64 - order as i64;
            let v = pos[i.unsigned_abs() as usize];
            if i < 0 && i % 2 != 0 {
                -v
            } else {
                v
            }
        })
        .collect())
}

pub fn harmonic_phase(g: &RisGeometry, phi_eq: f64) -> CVector {
    let order = g.truncation as f64;
    CVector::from_fn(g.harmonics(), |col, _| cis(phi_eq * (col as f64 - order)))
}

pub fn jacobi_anger_factors(g: &RisGeometry, theta_eq: f64, phi_eq: f64) -> Result<JacobiAnger> {
    Ok(JacobiAnger {
        harmonics: g.harmonic_matrix(),
        bessel: bessel_weights(g, theta_eq)?,
        phase: harmonic_phase(g, phi_eq),
    })
}

/// `f_d = (f_c v / v_c) cos θ_v`.
pub fn doppler_shift(cfg: &SystemConfig, motion_angle: f64) -> f64 {
    cfg.max_doppler_hz() * motion_angle.cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{khatri_rao, C64};
    use proptest::prelude::*;

    fn desk() -> RisGeometry {
        RisGeometry::from_config(&SystemConfig::desk())
    }

    #[test]
    fn ula_special_angles() {
        let a = ula_steering(4, PI / 2.0);
        assert!(a.iter().all(|z| (z - C64::new(0.5, 0.0)).norm() < 1e-15));
        let b = ula_steering(2, 0.0);
        let s = 1.0 / 2f64.sqrt();
        assert!((b[0] - C64::new(s, 0.0)).norm() < 1e-15);
        assert!((b[1] - C64::new(-s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ula_inner_product_is_dirichlet_kernel() {
        let (t1, t2) = (0.4, 1.3);
        let got = ula_steering(8, t1).dotc(&ula_steering(8, t2)).norm();
        let psi = PI * (t2.cos() - t1.cos());
        let want = ((8.0 * psi / 2.0).sin() / (psi / 2.0).sin()).abs() / 8.0;
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn circular_steering_entries() {
        let g = desk();
        let a = circ_ris_steering(&g, 0.7);
        let b = circ_ris_steering(&g, 0.7 + 2.0 * PI);
        let k0 = g.wavenumber();
        for n in 0..g.elements {
            assert!((a[n].norm() - 1.0 / (g.elements as f64).sqrt()).abs() < 1e-15);
            assert!((a[n] - b[n]).norm() < 1e-12);
            let want = cis(k0 * g.radius * (0.7 - g.azimuths[n]).cos()) / (g.elements as f64).sqrt();
            assert!((a[n] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn cascade_vector_special_cases() {
        let g = desk();
        let a = cascade_ris_vector(&g, 0.3, 0.3 - PI);
        assert!(a.iter().all(|z| (z - C64::new(1.0 / 32.0, 0.0)).norm() < 1e-12));
        let x = cascade_ris_vector(&g, -2.0, -0.4);
        let y = cascade_ris_vector(&g, -0.4, -2.0);
        assert!((x - y).norm() < 1e-15);
    }

    #[test]
    fn equivalent_angle_maps_are_inverse() {
        let (te, pe) = to_equivalent(-2.5, -0.7);
        let (a, d) = from_equivalent(te, pe);
        assert!((a + 2.5).abs() < 1e-15 && (d + 0.7).abs() < 1e-15);
    }

    #[test]
    fn jacobi_anger_at_orthogonal_pair_is_all_ones() {
        let g = desk();
        let ja = jacobi_anger_factors(&g, PI / 2.0, 0.9).unwrap();
        let p = ja.product();
        assert!(p.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-12));
        let o = g.truncation;
        for i in 1..=o {
            assert!((ja.phase[o - i] - ja.phase[o + i].conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn truncation_orders() {
        assert_eq!(desk().truncation, 26);
        assert_eq!(RisGeometry::from_config(&SystemConfig::full()).truncation, 252);
        assert!((desk().element_spacing() / desk().wavelength - 0.392).abs() < 1e-3);
        let full = RisGeometry::from_config(&SystemConfig::full());
        assert!(full.element_spacing() >= 0.4 * full.wavelength);
    }

    fn worst_expansion_error(g: &RisGeometry, pairs: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for t in 0..pairs {
            // deterministic low-discrepancy sweep over the configured sectors
            let u = (t as f64 * 0.618_033_988_75).fract();
            let v = (t as f64 * 0.754_877_666_25).fract();
            let arr = -PI + u * PI / 2.0;
            let dep = -PI / 2.0 + v * PI / 2.0;
            let (te, pe) = to_equivalent(arr, dep);
            let exact = cascade_ris_vector(g, arr, dep) * C64::new(g.elements as f64, 0.0);
            let got = jacobi_anger_factors(g, te, pe).unwrap().product();
            worst = worst.max((got - exact).camax());
        }
        worst
    }

    #[test]
    fn mean_truncation_error_shrinks_with_order() {
        let base = desk();
        let lo = (2.0 * PI * base.radius / base.wavelength).ceil() as usize;
        let pairs: Vec<(f64, f64)> = (0..300)
            .map(|t| {
                let u = (t as f64 * 0.618_033_988_75).fract();
                let v = (t as f64 * 0.754_877_666_25).fract();
                (-PI + 2.0 * PI * u, -PI + 2.0 * PI * v)
            })
            .collect();
        let mut last = f64::INFINITY;
        for order in lo..=2 * lo {
            let g = base.clone().with_truncation(order);
            let theta = g.harmonic_matrix();
            let mean = pairs
                .iter()
                .map(|&(arr, dep)| {
                    let (te, pe) = to_equivalent(arr, dep);
                    let ja = JacobiAnger {
                        harmonics: theta.clone(),
                        bessel: bessel_weights(&g, te).unwrap(),
                        phase: harmonic_phase(&g, pe),
                    };
                    let exact = cascade_ris_vector(&g, arr, dep) * C64::new(g.elements as f64, 0.0);
                    (ja.product() - exact).camax()
                })
                .sum::<f64>()
                / pairs.len() as f64;
            assert!(mean < last, "order {order}: {mean} vs {last}");
            last = mean;
        }
    }

    #[test]
    fn default_order_is_coarse_near_grazing_pairs() {
        // the Bessel argument 2k₀r·cosθ_eq reaches the default order itself,
        // so the discarded tail is not negligible when θ_eq → 0
        let g = desk();
        assert!((g.max_bessel_argument() - 25.132_741_228_718_345).abs() < 1e-9);
        let err = worst_expansion_error(&g, 1000);
        assert!(err > 0.1 && err < 0.25, "{err}");
    }

    #[test]
    fn converged_order_reproduces_cascade_vector() {
        for g in [desk(), RisGeometry::from_config(&SystemConfig::full())] {
            let order = g.converged_truncation(1e-12).unwrap();
            assert!(order > g.truncation);
            let fine = g.clone().with_truncation(order);
            assert!(worst_expansion_error(&fine, 200) < 1e-10);
        }
    }

    #[test]
    fn doppler_values() {
        let cfg = SystemConfig::desk();
        assert!(doppler_shift(&cfg, PI / 2.0).abs() < 1e-9);
        assert!((doppler_shift(&cfg, 0.0) - 2223.760_634_654_347).abs() < 1e-9);
        let f = doppler_shift(&cfg, 0.4);
        assert!((doppler_shift(&cfg, PI - 0.4) + f).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn cascade_vector_is_khatri_rao_of_steerings(arr in -PI..PI, dep in -PI..PI) {
            let g = desk();
            let a1 = CMatrix::from_column_slice(1, g.elements, circ_ris_steering(&g, arr).as_slice());
            let a2 = CMatrix::from_column_slice(1, g.elements, circ_ris_steering(&g, dep).as_slice());
            let kr = khatri_rao(&a1, &a2).unwrap();
            let v = cascade_ris_vector(&g, arr, dep);
            for n in 0..g.elements {
                prop_assert!((kr[(0, n)] - v[n]).norm() < 1e-12);
            }
        }

        #[test]
        fn derivatives_match_finite_differences(arr in -PI..PI, dep in -PI..PI, ang in 0.1f64..3.0) {
            let g = desk();
            let h = 1e-6;
            let fd = (cascade_ris_vector(&g, arr + h, dep) - cascade_ris_vector(&g, arr - h, dep)) / C64::new(2.0 * h, 0.0);
            prop_assert!((fd - cascade_ris_derivative(&g, arr, dep, true)).camax() < 1e-8);
            let fd = (cascade_ris_vector(&g, arr, dep + h) - cascade_ris_vector(&g, arr, dep - h)) / C64::new(2.0 * h, 0.0);
            prop_assert!((fd - cascade_ris_derivative(&g, arr, dep, false)).camax() < 1e-8);
            let fd = (ula_steering(8, ang + h) - ula_steering(8, ang - h)) / C64::new(2.0 * h, 0.0);
            prop_assert!((fd - ula_steering_derivative(8, ang)).camax() < 1e-8);
        }
    }
}

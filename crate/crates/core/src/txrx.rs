//! Pilot generation and synthesis of noiseless and noisy observation tensors.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;

use crate::decomp::FactorSet;
use crate::error::{Error, Result};
use crate::linalg::{cis, complex_normal, full_svd, kron, CMatrix, CVector, C64};
use crate::scenario::{
    cascade_channel_matrix, cascade_ris_vector, delay_response, doppler_phase, doppler_response,
    spatial_steering, ChannelRealization, RisGeometry, SystemConfig,
};
use crate::tensor::{Tensor4, Tensor5};

const MAX_PILOT_DRAWS: usize = 32;
const MIN_INVERSE_CONDITION: f64 = 1e-6;

/// Known training quantities shared by transmitter and receiver.
#[derive(Clone, Debug)]
pub struct PilotBlock {
    /// Superposed pilot symbols `N_s × N_b`.
    pub symbols: CMatrix,
    /// Per-user 4-QAM pilots before superposition.
    pub user_symbols: Vec<CMatrix>,
    /// Precoder `N_BS × N_s`.
    pub precoder: CMatrix,
    /// Combiner `N_MS × N_s`.
    pub combiner: CMatrix,
    /// RIS phase pattern `N_R × N_st`, one column per half-slot.
    pub ris_phases: CMatrix,
}

impl PilotBlock {
    /// `Υ = (F X) ⊗ W`.
    pub fn upsilon(&self) -> CMatrix {
        kron(&(&self.precoder * &self.symbols), &self.combiner)
    }
}

/// Observation of one subframe.
#[derive(Clone, Debug)]
pub struct Observation {
    pub y: Tensor4,
    pub z: Tensor4,
    /// Standard deviation of the raw per-antenna noise.
    pub sigma: f64,
    pub snr_db: f64,
}

impl Observation {
    /// `‖Z‖² / ‖Y − Z‖²` in dB.
    pub fn realized_snr_db(&self) -> f64 {
        let noise = (&self.y - &self.z).norm_sqr();
        10.0 * (self.z.norm_sqr() / noise).log10()
    }
}

/// `x = Σ_i √(ι_i P_t) x_i`.
pub fn noma_superpose(user_syms: &[CMatrix], cfg: &SystemConfig) -> Result<CMatrix> {
    if user_syms.len() != cfg.power_fractions.len() {
        return Err(Error::LengthMismatch(user_syms.len(), cfg.power_fractions.len()));
    }
    let Some(first) = user_syms.first() else {
        return Err(Error::Degenerate("no users"));
    };
    let shape = first.shape();
    let mut out = CMatrix::zeros(shape.0, shape.1);
    for (x, &frac) in user_syms.iter().zip(&cfg.power_fractions) {
        if x.shape() != shape {
            return Err(Error::DimensionMismatch {
                op: "noma_superpose",
                expected: shape.0 * shape.1,
                got: x.nrows() * x.ncols(),
            });
        }
        out += x * C64::new((frac * cfg.total_power).sqrt(), 0.0);
    }
    Ok(out)
}

fn qpsk<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re = if rng.random::<bool>() { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    let im = if rng.random::<bool>() { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    C64::new(re, im)
}

fn unit_circle_columns<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let scale = 1.0 / (rows as f64).sqrt();
    CMatrix::from_fn(rows, cols, |_, _| cis(rng.random_range(0.0..2.0 * PI)) * scale)
}

/// `σ_r / σ_1`, zero when the matrix has fewer than `r` singular values.
fn rank_ratio(m: &CMatrix, r: usize) -> Result<f64> {
    let s = full_svd(m)?.s;
    Ok(match (s.first(), s.get(r - 1)) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    })
}

/// Random training block. Redraws until `F X` and `W` both have full rank
/// `N_s`, which makes `Υ` of rank `N_s²`.
pub fn gen_pilot_block<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<PilotBlock> {
    let (ns, nb) = (cfg.streams, cfg.noma_symbols);
    let mut worst = 0.0;
    for _ in 0..MAX_PILOT_DRAWS {
        let user_symbols: Vec<CMatrix> = cfg
            .power_fractions
            .iter()
            .map(|_| CMatrix::from_fn(ns, nb, |_, _| qpsk(rng)))
            .collect();
        let symbols = noma_superpose(&user_symbols, cfg)?;
        let precoder = unit_circle_columns(cfg.bs_antennas, ns, rng);
        let combiner = unit_circle_columns(cfg.ms_antennas, ns, rng);
        let ris_phases =
            CMatrix::from_fn(cfg.ris_elements, cfg.half_slots, |_, _| cis(rng.random_range(0.0..2.0 * PI)));
        let fx = rank_ratio(&(&precoder * &symbols), ns)?;
        let w = rank_ratio(&combiner, ns)?;
        worst = fx.min(w);
        if worst > MIN_INVERSE_CONDITION {
            return Ok(PilotBlock {
                symbols,
                user_symbols,
                precoder,
                combiner,
                ris_phases,
            });
        }
    }
    Err(Error::RankDeficient {
        what: "pilot block",
        ratio: worst,
    })
}

/// Ground-truth CP factors `A = Υᵀa_s`, `B = Ξᵀa_r`, `C = ρ g(τ)`, `D`.
pub fn true_factors(
    re: &ChannelRealization,
    pb: &PilotBlock,
    cfg: &SystemConfig,
    g: &RisGeometry,
) -> FactorSet {
    let l = re.num_paths();
    let ups_t = pb.upsilon().transpose();
    let xi_t = pb.ris_phases.transpose();
    let mut a = CMatrix::zeros(cfg.pilot_len(), l);
    let mut b = CMatrix::zeros(cfg.half_slots, l);
    let mut c = CMatrix::zeros(cfg.pilot_subcarriers, l);
    let mut d = CMatrix::zeros(cfg.slots, l);
    let mut eigs = CVector::zeros(l);
    for (i, p) in re.paths.iter().enumerate() {
        a.set_column(i, &(&ups_t * spatial_steering(cfg, re.bs_departure, p.ms_arrival)));
        b.set_column(i, &(&xi_t * cascade_ris_vector(g, re.ris_arrival, p.ris_departure)));
        c.set_column(i, &(delay_response(cfg, p.delay) * p.gain));
        d.set_column(i, &doppler_response(cfg, p.doppler_hz));
        eigs[i] = cis(doppler_phase(cfg, p.doppler_hz));
    }
    FactorSet { a, b, c, d, doppler_eigs: eigs }
}

/// Noiseless observation tensor `Σ_l a_l ∘ b_l ∘ c_l ∘ d_l`.
pub fn build_noiseless(re: &ChannelRealization, pb: &PilotBlock, cfg: &SystemConfig) -> Result<Tensor4> {
    let g = RisGeometry::from_config(cfg);
    true_factors(re, pb, cfg, &g).reconstruct()
}

/// Same tensor assembled slice by slice as `Υᵀ H^G_k[m] Ξ`.
pub fn build_noiseless_slicewise(
    re: &ChannelRealization,
    pb: &PilotBlock,
    cfg: &SystemConfig,
) -> Result<Tensor4> {
    let g = RisGeometry::from_config(cfg);
    let ups_t = pb.upsilon().transpose();
    let mut z = Tensor4::zeros(cfg.tensor_shape());
    for m in 0..cfg.slots {
        for k in 0..cfg.pilot_subcarriers {
            let h = cascade_channel_matrix(re, cfg, &g, k + 1, m + 1)?;
            let slice = &ups_t * h * &pb.ris_phases;
            for (j, col) in slice.column_iter().enumerate() {
                for (i, v) in col.iter().enumerate() {
                    z.set([i, j, k, m], *v);
                }
            }
        }
    }
    Ok(z)
}

/// Raw i.i.d. `CN(0, 1)` noise of shape `N_MS × N_b × N_st × K × M`.
pub fn draw_raw_noise<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Tensor5 {
    let shape = [
        cfg.ms_antennas,
        cfg.noma_symbols,
        cfg.half_slots,
        cfg.pilot_subcarriers,
        cfg.slots,
    ];
    let len = shape.iter().product();
    let data = (0..len).map(|_| complex_normal(rng)).collect();
    Tensor5::from_vec(shape, data).expect("length matches shape")
}

/// Combined noise `Vec¹₂(N ×₁ Wᵀ)`.
pub fn combine_noise(raw: &Tensor5, pb: &PilotBlock) -> Result<Tensor4> {
    Ok(raw.mode_product(&pb.combiner.transpose(), 0)?.frontal_vectorize())
}

/// Add combined noise scaled so that `‖Z‖² / ‖N^W‖²` equals the target SNR.
/// An infinite SNR returns `Y = Z`.
pub fn add_noise<R: Rng + ?Sized>(
    z: &Tensor4,
    pb: &PilotBlock,
    cfg: &SystemConfig,
    snr_db: f64,
    rng: &mut R,
) -> Result<Observation> {
    let raw = draw_raw_noise(cfg, rng);
    observe_with_noise(z, pb, &raw, snr_db)
}

/// [`add_noise`] with a pre-drawn raw noise realization, so that several
/// SNR points can share the same noise shape.
pub fn observe_with_noise(z: &Tensor4, pb: &PilotBlock, raw: &Tensor5, snr_db: f64) -> Result<Observation> {
    if !z.is_finite() {
        return Err(Error::Degenerate("non-finite noiseless tensor"));
    }
    if snr_db == f64::INFINITY {
        return Ok(Observation {
            y: z.clone(),
            z: z.clone(),
            sigma: 0.0,
            snr_db,
        });
    }
    let combined = combine_noise(raw, pb)?;
    if combined.shape() != z.shape() {
        return Err(Error::DimensionMismatch {
            op: "add_noise",
            expected: z.len(),
            got: combined.len(),
        });
    }
    let snr = 10f64.powf(snr_db / 10.0);
    let sigma = (z.norm_sqr() / (snr * combined.norm_sqr())).sqrt();
    let y = z + &combined.scale(C64::new(sigma, 0.0));
    Ok(Observation {
        y,
        z: z.clone(),
        sigma,
        snr_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::scenario::gen_realization;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(seed: u64) -> (SystemConfig, ChannelRealization, PilotBlock) {
        let cfg = SystemConfig::desk();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let re = gen_realization(&cfg, &mut rng).unwrap();
        let pb = gen_pilot_block(&cfg, &mut rng).unwrap();
        (cfg, re, pb)
    }

    #[test]
    fn superposition_examples() {
        let single = SystemConfig {
            power_fractions: vec![1.0],
            ..SystemConfig::desk()
        };
        let x = CMatrix::from_fn(2, 3, |i, j| C64::new(i as f64, j as f64));
        assert_eq!(noma_superpose(&[x.clone()], &single).unwrap(), x);

        let cfg = SystemConfig::desk();
        let ones = CMatrix::from_element(1, 1, ONE);
        let s = noma_superpose(&[ones.clone(), ones.clone()], &cfg).unwrap();
        assert!((s[(0, 0)].re - 1.341_640_786_499_874).abs() < 1e-12);
        let zero = CMatrix::zeros(1, 1);
        let s = noma_superpose(&[ones, zero], &cfg).unwrap();
        assert!((s[(0, 0)].re - 0.8f64.sqrt()).abs() < 1e-15);
        assert!(noma_superpose(&[x], &cfg).is_err());
    }

    #[test]
    fn pilot_block_invariants() {
        let (cfg, _, pb) = setup(11);
        let (_, _, again) = setup(11);
        assert_eq!(pb.symbols, again.symbols);
        assert_eq!(pb.ris_phases, again.ris_phases);
        for c in pb.precoder.column_iter().chain(pb.combiner.column_iter()) {
            assert!((c.norm() - 1.0).abs() < 1e-12);
        }
        assert!(pb.ris_phases.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        // superposed 4-QAM: every symbol is √0.8·q₁ + √0.2·q₂ for some constellation points
        let h = FRAC_1_SQRT_2;
        let points = [C64::new(h, h), C64::new(h, -h), C64::new(-h, h), C64::new(-h, -h)];
        let mut allowed = Vec::new();
        for p in points {
            for q in points {
                allowed.push(p * 0.8f64.sqrt() + q * 0.2f64.sqrt());
            }
        }
        for s in pb.symbols.iter() {
            assert!(allowed.iter().any(|a| (a - s).norm() < 1e-12));
        }
        for u in &pb.user_symbols {
            assert!(u.iter().all(|s| points.iter().any(|p| (p - s).norm() < 1e-15)));
        }
        let rank_ratio = crate::linalg::full_svd(&pb.upsilon()).unwrap().s;
        assert!(rank_ratio[cfg.streams * cfg.streams - 1] > 1e-6 * rank_ratio[0]);
        assert!(rank_ratio[cfg.streams * cfg.streams] < 1e-12 * rank_ratio[0]);
    }

    #[test]
    fn factor_and_slice_constructions_agree() {
        for seed in 0..5 {
            let (cfg, re, pb) = setup(seed);
            let a = build_noiseless(&re, &pb, &cfg).unwrap();
            let b = build_noiseless_slicewise(&re, &pb, &cfg).unwrap();
            assert!((&a - &b).max_abs() < 1e-10);
        }
    }

    #[test]
    fn static_single_path_has_constant_fibers() {
        let (mut cfg, mut re, pb) = setup(2);
        cfg.paths = 1;
        re.paths.truncate(1);
        re.paths[0].delay = 0.0;
        re.paths[0].doppler_hz = 0.0;
        let z = build_noiseless(&re, &pb, &cfg).unwrap();
        let [i1, i2, i3, i4] = z.shape();
        for i in 0..i1 {
            for j in 0..i2 {
                let v = z.get([i, j, 0, 0]);
                for k in 0..i3 {
                    for m in 0..i4 {
                        assert!((z.get([i, j, k, m]) - v).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn single_path_slot_fibers_are_geometric() {
        let (mut cfg, mut re, pb) = setup(4);
        cfg.paths = 1;
        re.paths.truncate(1);
        let z = build_noiseless(&re, &pb, &cfg).unwrap();
        let ratio = cis(doppler_phase(&cfg, re.paths[0].doppler_hz));
        for m in 1..cfg.slots {
            let prev = z.get([3, 2, 5, m - 1]);
            assert!((z.get([3, 2, 5, m]) - prev * ratio).norm() < 1e-14);
        }
    }

    #[test]
    fn doubling_a_gain_adds_its_component() {
        let (cfg, re, pb) = setup(6);
        let base = build_noiseless(&re, &pb, &cfg).unwrap();
        let mut doubled = re.clone();
        doubled.paths[0].gain *= 2.0;
        let z2 = build_noiseless(&re, &pb, &cfg).unwrap();
        let mut only = re.clone();
        only.paths.truncate(1);
        let comp = build_noiseless(&only, &pb, &cfg).unwrap();
        let z2d = build_noiseless(&doubled, &pb, &cfg).unwrap();
        assert!((&z2d - &(&z2 + &comp)).max_abs() < 1e-14);
        assert_eq!(base, z2);
    }

    #[test]
    fn noise_scaling_hits_target_snr() {
        let (cfg, re, pb) = setup(8);
        let z = build_noiseless(&re, &pb, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for snr in [-15.0, 0.0, 10.0, 20.0] {
            let obs = add_noise(&z, &pb, &cfg, snr, &mut rng).unwrap();
            assert!((obs.realized_snr_db() - snr).abs() < 1e-9);
        }
        let obs = add_noise(&z, &pb, &cfg, f64::INFINITY, &mut rng).unwrap();
        assert_eq!(obs.y, obs.z);

        let z100 = z.scale(C64::new(10.0 / z.norm(), 0.0));
        let obs = add_noise(&z100, &pb, &cfg, 10.0, &mut rng).unwrap();
        assert!(((&obs.y - &obs.z).norm_sqr() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn noise_is_deterministic_and_scales_with_signal() {
        let (cfg, re, pb) = setup(9);
        let z = build_noiseless(&re, &pb, &cfg).unwrap();
        let a = add_noise(&z, &pb, &cfg, 5.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = add_noise(&z, &pb, &cfg, 5.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a.y, b.y);
        let z3 = z.scale(C64::new(3.0, 0.0));
        let c = add_noise(&z3, &pb, &cfg, 5.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!((c.sigma - 3.0 * a.sigma).abs() < 1e-12 * c.sigma);
    }

    #[test]
    fn combined_noise_covariance_follows_combiner_gram() {
        // sample covariance of one N_s-block against σ² WᵀW*
        let (cfg, _, pb) = setup(10);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let ns = cfg.streams;
        let mut cov = CMatrix::zeros(ns, ns);
        let mut count = 0.0;
        for _ in 0..100 {
            let n = combine_noise(&draw_raw_noise(&cfg, &mut rng), &pb).unwrap();
            for block in n.data().chunks(ns) {
                let v = CVector::from_column_slice(block);
                cov += &v * v.adjoint();
                count += 1.0;
            }
        }
        cov /= C64::new(count, 0.0);
        let want = pb.combiner.transpose() * pb.combiner.map(|z| z.conj());
        assert!((cov - &want).norm() < 0.05 * want.norm());
    }
}

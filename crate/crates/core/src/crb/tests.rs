use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::scenario::{cascade_channel_matrix, gen_realization};
use crate::txrx::{build_noiseless, gen_pilot_block};

fn setup(seed: u64) -> (SystemConfig, ChannelRealization, PilotBlock) {
    let cfg = SystemConfig::desk();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let re = gen_realization(&cfg, &mut rng).unwrap();
    let pb = gen_pilot_block(&cfg, &mut rng).unwrap();
    (cfg, re, pb)
}

fn perturbed(re: &ChannelRealization, id: ParamId, h: f64) -> ChannelRealization {
    let mut r = re.clone();
    match id {
        ParamId::BsDeparture => r.bs_departure += h,
        ParamId::RisArrival => r.ris_arrival += h,
        ParamId::MsArrival(l) => r.paths[l].ms_arrival += h,
        ParamId::RisDeparture(l) => r.paths[l].ris_departure += h,
        ParamId::Delay(l) => r.paths[l].delay += h,
        ParamId::Doppler(l) => r.paths[l].doppler_hz += h,
        ParamId::Gain(l) => r.paths[l].gain += h,
    }
    r
}

fn fd_step(id: ParamId) -> f64 {
    match id {
        ParamId::Delay(_) => 1e-12,
        ParamId::Doppler(_) => 1e-3,
        _ => 1e-6,
    }
}

fn central_difference(re: &ChannelRealization, pb: &PilotBlock, cfg: &SystemConfig, id: ParamId) -> CVector {
    let h = fd_step(id);
    let plus = build_noiseless(&perturbed(re, id, h), pb, cfg).unwrap();
    let minus = build_noiseless(&perturbed(re, id, -h), pb, cfg).unwrap();
    CVector::from_iterator(
        plus.len(),
        plus.data().iter().zip(minus.data()).map(|(p, m)| (p - m) / (2.0 * h)),
    )
}

#[test]
fn covariance_blocks() {
    let (_, _, mut pb) = setup(1);
    let cov = noise_covariance(&pb, 0.7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = crate::linalg::random_cmatrix(6 * pb.combiner.ncols(), 1, &mut rng);
    let dense = cov.dense(x.len());
    let want = &dense * &x;
    let got = cov.apply(x.as_slice()).unwrap();
    assert!((want - &got).norm() < 1e-12 * got.norm());
    let back = cov.apply(cov.apply_inverse(x.as_slice()).unwrap().as_slice()).unwrap();
    assert!((back - &x).norm() < 1e-10 * x.norm());
    let q = |s: f64| {
        let c = noise_covariance(&pb, s).unwrap();
        x.dotc(&c.apply(x.as_slice()).unwrap()).re
    };
    assert!((q(1.4) - 4.0 * q(0.7)).abs() < 1e-12 * q(1.4));

    pb.combiner = CMatrix::identity(8, 2);
    let cov = noise_covariance(&pb, 0.5).unwrap();
    assert!((cov.dense(4) - CMatrix::identity(4, 4) * C64::new(0.25, 0.0)).norm() < 1e-15);
    assert!(noise_covariance(&pb, 0.0).is_err());
    pb.combiner = CMatrix::zeros(8, 2);
    assert!(noise_covariance(&pb, 1.0).is_err());
}

#[test]
fn analytic_derivatives_match_central_differences() {
    for seed in [0, 5] {
        let (cfg, re, pb) = setup(seed);
        let ctx = FimContext::new(&re, &pb, &cfg, 0.1).unwrap();
        for id in ctx.ids() {
            let analytic = dz_dparam(&ctx, id).unwrap();
            let fd = central_difference(&re, &pb, &cfg, id);
            let rel = (&analytic - &fd).norm() / analytic.norm();
            assert!(rel < 1e-6, "seed {seed} {id:?}: {rel:.3e}");
        }
    }
}

#[test]
fn derivative_structure() {
    let (cfg, mut re, pb) = setup(2);
    re.paths[1].gain = C64::new(0.0, 0.0);
    let ctx = FimContext::new(&re, &pb, &cfg, 0.1).unwrap();
    let mut one = re.clone();
    one.paths[1].gain = C64::new(1.0, 0.0);
    one.paths.swap(0, 1);
    one.paths.truncate(1);
    let rank1 = build_noiseless(&one, &pb, &cfg).unwrap();
    let dg = dz_dparam(&ctx, ParamId::Gain(1)).unwrap();
    assert!((&dg - CVector::from_column_slice(rank1.data())).norm() < 1e-14 * dg.norm());

    // path-local parameters only touch their own path; shared ones sum over paths
    let (cfg, re, pb) = setup(3);
    let full = FimContext::new(&re, &pb, &cfg, 0.1).unwrap();
    let mut only0 = re.clone();
    only0.paths.truncate(1);
    let part = FimContext::new(&only0, &pb, &cfg, 0.1).unwrap();
    let d_full = dz_dparam(&full, ParamId::MsArrival(0)).unwrap();
    let d_part = dz_dparam(&part, ParamId::MsArrival(0)).unwrap();
    assert!((&d_full - &d_part).norm() < 1e-14 * d_full.norm());
    let shared_full = dz_dparam(&full, ParamId::BsDeparture).unwrap();
    let shared_part = dz_dparam(&part, ParamId::BsDeparture).unwrap();
    assert!((&shared_full - &shared_part).norm() > 1e-3 * shared_full.norm());
    assert!(dz_dparam(&part, ParamId::Delay(1)).is_err());
}

#[test]
fn fim_scaling_and_definiteness() {
    let (cfg, re, pb) = setup(4);
    let f1 = fim_real(&FimContext::new(&re, &pb, &cfg, 0.1).unwrap()).unwrap();
    let f2 = fim_real(&FimContext::new(&re, &pb, &cfg, 0.2).unwrap()).unwrap();
    assert!((&f1 - &f2 * 4.0).norm() < 1e-12 * f1.norm());
    let lo = f1.clone().symmetric_eigen().eigenvalues.min();
    assert!(lo >= -1e-8 * f1.norm());
    let p1 = fim(&FimContext::new(&re, &pb, &cfg, 0.1).unwrap()).unwrap();
    let p2 = fim(&FimContext::new(&re, &pb, &cfg, 0.2).unwrap()).unwrap();
    assert!((&p1 - &p2 * 4.0).norm() < 1e-12 * p1.norm());
    assert!((&p1 - p1.transpose()).norm() == 0.0);
}

#[test]
fn diagonal_of_single_path_fim_with_orthonormal_combiner() {
    let (mut cfg, mut re, mut pb) = setup(6);
    cfg.paths = 1;
    re.paths.truncate(1);
    pb.combiner = CMatrix::identity(cfg.ms_antennas, cfg.streams);
    let sigma = 0.3;
    let ctx = FimContext::new(&re, &pb, &cfg, sigma).unwrap();
    let f = fim_real(&ctx).unwrap();
    for (i, id) in ctx.ids().into_iter().filter(|p| !p.is_complex()).enumerate() {
        let d = dz_dparam(&ctx, id).unwrap();
        let want = 2.0 * d.norm_squared() / (sigma * sigma);
        assert!((f[(i, i)] - want).abs() < 1e-10 * want);
    }
}

#[test]
fn vectorized_fim_equals_slice_accumulation() {
    // each (k, m) slice Y = Υᵀ H^G_k[m] Ξ, derivatives of H^G by differences of
    // the cascade matrix, whitened per N_s block
    let (cfg, re, pb) = setup(7);
    let sigma = 0.2;
    let ctx = FimContext::new(&re, &pb, &cfg, sigma).unwrap();
    let want = fim_real(&ctx).unwrap();
    let g = RisGeometry::from_config(&cfg);
    let ups_t = pb.upsilon().transpose();
    let ns = cfg.streams;
    let wg = pb.combiner.transpose() * pb.combiner.map(|z| z.conj());
    let wg_inv = wg.try_inverse().unwrap() / C64::new(sigma * sigma, 0.0);
    let ids = ctx.ids();
    let l = re.paths.len();
    let real = 2 + 4 * l;
    let n = real + 2 * l;
    let mut acc = CMatrix::zeros(n, n);
    for m in 1..=cfg.slots {
        for k in 1..=cfg.pilot_subcarriers {
            let mut cols: Vec<CMatrix> = Vec::new();
            for &id in &ids {
                let h = fd_step(id);
                let hp = cascade_channel_matrix(&perturbed(&re, id, h), &cfg, &g, k, m).unwrap();
                let hm = cascade_channel_matrix(&perturbed(&re, id, -h), &cfg, &g, k, m).unwrap();
                let dy = &ups_t * ((hp - hm) / C64::new(2.0 * h, 0.0)) * &pb.ris_phases;
                if id.is_complex() {
                    cols.push(dy.clone());
                    cols.push(dy * J);
                } else {
                    cols.push(dy);
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let mut s = C64::new(0.0, 0.0);
                    for c in 0..cols[i].ncols() {
                        let (ci, cj) = (cols[i].column(c), cols[j].column(c));
                        for blk in 0..ci.len() / ns {
                            let vi = ci.rows(blk * ns, ns);
                            let vj = cj.rows(blk * ns, ns);
                            s += (vi.adjoint() * &wg_inv * vj)[(0, 0)];
                        }
                    }
                    acc[(i, j)] += s;
                }
            }
        }
    }
    let got = DMatrix::from_fn(n, n, |i, j| 2.0 * acc[(i, j)].re);
    let rel = (&got - &want).norm() / want.norm();
    assert!(rel < 1e-8, "{rel:.3e}");
}

#[test]
fn crb_scales_with_noise_power_and_decreases_with_snr() {
    let (cfg, re, pb) = setup(8);
    let a = crb_diag(&FimContext::new(&re, &pb, &cfg, 0.1).unwrap()).unwrap();
    let b = crb_diag(&FimContext::new(&re, &pb, &cfg, 0.1 * 2f64.sqrt()).unwrap()).unwrap();
    let twice = a.scaled(2.0);
    for name in ["bs_departure", "ris_arrival", "ms_arrival", "ris_departure", "delay", "doppler", "gain"] {
        let (x, y) = (b.metric(name).unwrap(), twice.metric(name).unwrap());
        assert!(x > 0.0);
        assert!((x - y).abs() < 1e-10 * y, "{name}");
    }
    for (x, y) in a.gain_complex_form.iter().zip(&a.gain) {
        assert!(*x > 0.0 && *y > 0.0);
    }
    let z = build_noiseless(&re, &pb, &cfg).unwrap();
    let mut prev = f64::INFINITY;
    for snr in [-15.0, -5.0, 5.0, 15.0] {
        let s = expected_sigma(&z, &pb, snr);
        let r = crb_diag(&FimContext::new(&re, &pb, &cfg, s).unwrap()).unwrap();
        assert!(r.metric("delay").unwrap() < prev);
        prev = r.metric("delay").unwrap();
    }
}

#[test]
fn singular_information_names_the_null_direction() {
    let (cfg, mut re, pb) = setup(9);
    re.paths[1].gain = C64::new(0.0, 0.0);
    let ctx = FimContext::new(&re, &pb, &cfg, 0.1).unwrap();
    match crb_diag(&ctx) {
        Err(Error::SingularFim { null_direction, .. }) => {
            assert!(!null_direction.is_empty());
            assert!(null_direction.iter().all(|(n, _)| n.ends_with("[1]")), "{null_direction:?}");
        }
        other => panic!("expected a singular FIM, got {other:?}"),
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::crb::{dz_dparam, FimContext, ParamId};
use crate::decomp::{fourd_stdce, slot_subcarrier_matrix, spatial_smoothing, smoothing_window};
use crate::error::Result;
use crate::extract::{extract_params, match_paths};
use crate::linalg::{cis, khatri_rao, random_cmatrix, CMatrix, C64};
use crate::scenario::{cascade_ris_vector, jacobi_anger_factors, to_equivalent, RisGeometry, SystemConfig};
use crate::tensor::cp_reconstruct;
use crate::txrx::{build_noiseless, build_noiseless_slicewise};

use super::trial::TrialData;

/// Result of one built-in consistency check.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, value: f64, limit: f64) -> SelfCheck {
    SelfCheck {
        name,
        passed: value.is_finite() && value < limit,
        detail: format!("{value:.3e} (limit {limit:.0e})"),
    }
}

fn model_cross_check(cfg: &SystemConfig, seeds: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for seed in 0..seeds {
        let d = TrialData::draw(cfg, seed)?;
        let a = build_noiseless(&d.realization, &d.pilots, cfg)?;
        let b = build_noiseless_slicewise(&d.realization, &d.pilots, cfg)?;
        worst = worst.max((&a - &b).max_abs());
    }
    Ok(worst)
}

fn smoothing_identity(instances: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for seed in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (k, m, l) = (5, 7, 2);
        let lams: Vec<C64> = (0..l).map(|_| cis(rng.random_range(-3.0..3.0))).collect();
        let a = random_cmatrix(4, l, &mut rng);
        let b = random_cmatrix(3, l, &mut rng);
        let c = random_cmatrix(k, l, &mut rng);
        let d = CMatrix::from_fn(m, l, |i, j| lams[j].powi(i as i32 + 1));
        let t = cp_reconstruct(&a, &b, &c, &d)?;
        let k4 = smoothing_window(m);
        let l4 = m + 1 - k4;
        let qs = spatial_smoothing(&slot_subcarrier_matrix(&t), k, k4)?;
        let e = khatri_rao(&b, &a)?;
        let dk = d.rows(0, k4).into_owned();
        let dh = CMatrix::from_fn(l4, l, |i, j| lams[j].powi(i as i32));
        let want = khatri_rao(&dk, &c)? * khatri_rao(&dh, &e)?.transpose();
        worst = worst.max((want - qs).camax());
    }
    Ok(worst)
}

fn noiseless_recovery(cfg: &SystemConfig) -> Result<(f64, f64)> {
    let d = TrialData::draw(cfg, 0)?;
    let fs = fourd_stdce(&d.noiseless, cfg.paths, cfg.admm.window)?;
    let rel = (&fs.reconstruct()? - &d.noiseless).norm() / d.noiseless.norm();
    let est = extract_params(&fs, &d.noiseless, &d.pilots, cfg, &cfg.search)?;
    let est = est.permuted(&match_paths(&d.realization, &est));
    let mut angle_err = (est.bs_departure - d.realization.bs_departure)
        .abs()
        .max((est.ris_arrival - d.realization.ris_arrival).abs());
    for (e, t) in est.paths.iter().zip(&d.realization.paths) {
        angle_err = angle_err
            .max((e.ms_arrival - t.ms_arrival).abs())
            .max((e.ris_departure - t.ris_departure).abs());
    }
    Ok((rel, angle_err))
}

fn derivative_check(cfg: &SystemConfig) -> Result<f64> {
    let d = TrialData::draw(cfg, 1)?;
    let ctx = FimContext::new(&d.realization, &d.pilots, cfg, 1.0)?;
    let mut worst = 0.0f64;
    for id in ctx.ids() {
        let h = match id {
            ParamId::Delay(_) => 1e-12,
            ParamId::Doppler(_) => 1e-3,
            _ => 1e-6,
        };
        let shift = |s: f64| {
            let mut r = d.realization.clone();
            match id {
                ParamId::BsDeparture => r.bs_departure += s,
                ParamId::RisArrival => r.ris_arrival += s,
                ParamId::MsArrival(l) => r.paths[l].ms_arrival += s,
                ParamId::RisDeparture(l) => r.paths[l].ris_departure += s,
                ParamId::Delay(l) => r.paths[l].delay += s,
                ParamId::Doppler(l) => r.paths[l].doppler_hz += s,
                ParamId::Gain(l) => r.paths[l].gain += s,
            }
            build_noiseless(&r, &d.pilots, cfg)
        };
        let fd = (&shift(h)? - &shift(-h)?).scale(C64::new(0.5 / h, 0.0));
        let an = dz_dparam(&ctx, id)?;
        let diff: f64 = an
            .iter()
            .zip(fd.data())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(diff / an.norm());
    }
    Ok(worst)
}

fn expansion_check(cfg: &SystemConfig, pairs: usize) -> Result<f64> {
    let g = RisGeometry::from_config(cfg);
    let g = g.clone().with_truncation(g.converged_truncation(1e-12)?);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (al, ah) = cfg.angles.ris_arrival.radians();
    let (dl, dh) = cfg.angles.ris_departure.radians();
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let arr = rng.random_range(al..ah);
        let dep = rng.random_range(dl..dh);
        let (t, p) = to_equivalent(arr, dep);
        let ja = jacobi_anger_factors(&g, t, p)?.product() / C64::new(g.elements as f64, 0.0);
        worst = worst.max((ja - cascade_ris_vector(&g, arr, dep)).camax());
    }
    Ok(worst)
}

fn wrap(name: &'static str, r: Result<f64>, limit: f64) -> SelfCheck {
    match r {
        Ok(v) => check(name, v, limit),
        Err(e) => SelfCheck {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

/// Quick oracle checks of the model, decomposition, extraction and bound.
pub fn selftest(cfg: &SystemConfig) -> Vec<SelfCheck> {
    let mut out = vec![
        wrap("factor vs slice model", model_cross_check(cfg, 10), 1e-10),
        wrap("smoothing identity", smoothing_identity(20), 1e-12),
        wrap("expansion at converged order", expansion_check(cfg, 200), 1e-10),
    ];
    match noiseless_recovery(cfg) {
        Ok((rel, ang)) => {
            out.push(check("noiseless reconstruction", rel, 1e-8));
            out.push(check("noiseless angles", ang, 1e-5));
        }
        Err(e) => out.push(SelfCheck {
            name: "noiseless recovery",
            passed: false,
            detail: e.to_string(),
        }),
    }
    out.push(wrap("bound derivatives", derivative_check(cfg), 1e-6));
    out
}

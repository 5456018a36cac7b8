//! Acceptance criteria. Each test writes one `PASS`/`FAIL` line to stderr
//! (uncaptured) and then asserts.

use std::f64::consts::PI;
use std::io::Write;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ristensor::bench::{sweep, ExperimentPlan, ParamErrors, Solver, SweepAxis, SweepResult, TrialData};
use ristensor::crb::{crb_diag, dz_dparam, FimContext, ParamId};
use ristensor::decomp::{dlr4dtd, fourd_stdce, slot_subcarrier_matrix, smoothing_window, spatial_smoothing, StopReason};
use ristensor::extract::{extract_params, match_paths};
use ristensor::linalg::{cis, khatri_rao, random_cmatrix, CMatrix, C64};
use ristensor::scenario::{cascade_ris_vector, jacobi_anger_factors, to_equivalent, RisGeometry, SystemConfig};
use ristensor::tensor::cp_reconstruct;
use ristensor::txrx::{build_noiseless, build_noiseless_slicewise};

const SNR_GRID: [f64; 8] = [-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0];
const SWEEP_TRIALS: usize = 50;
const CRB_TRIALS: usize = 200;
const CRB_SNRS: [f64; 3] = [10.0, 15.0, 20.0];

fn verdict(id: u32, pass: bool, detail: &str) {
    let line = format!("{} criterion {id}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id}: {detail}");
}

/// Mean and stderr of `solver`/`metric` at `x`.
fn stat(r: &SweepResult, x: f64, solver: &str, metric: &str) -> (f64, f64) {
    let row = r.row(x, solver, metric).unwrap_or_else(|| panic!("missing row {x} {solver} {metric}"));
    (row.mean, row.stderr)
}

/// All solvers over the SNR grid, shared by the trend criteria.
fn snr_sweep() -> &'static SweepResult {
    static CELL: OnceLock<SweepResult> = OnceLock::new();
    CELL.get_or_init(|| {
        sweep(&ExperimentPlan {
            config: SystemConfig::desk(),
            axis: SweepAxis::Snr(SNR_GRID.to_vec()),
            trials: SWEEP_TRIALS,
            seed_base: 1000,
            solvers: Solver::ALL.to_vec(),
            with_crb: false,
            out: None,
        })
        .unwrap()
    })
}

#[test]
fn criterion_01_model_cross_check() {
    let cfg = SystemConfig::desk();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let d = TrialData::draw(&cfg, seed).unwrap();
        let slices = build_noiseless_slicewise(&d.realization, &d.pilots, &cfg).unwrap();
        worst = worst.max((&d.noiseless - &slices).max_abs());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        1,
        worst < 1e-10 && secs < 30.0,
        &format!("factor vs slice max abs error {worst:.3e} (< 1e-10) over 100 seeds in {secs:.1} s (< 30 s)"),
    );
}

fn expansion_error(g: &RisGeometry, pairs: usize, cfg: &SystemConfig, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (al, ah) = cfg.angles.ris_arrival.radians();
    let (dl, dh) = cfg.angles.ris_departure.radians();
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let arr = rng.random_range(al..ah);
        let dep = rng.random_range(dl..dh);
        let (t, p) = to_equivalent(arr, dep);
        let approx = jacobi_anger_factors(g, t, p).unwrap().product() / C64::new(g.elements as f64, 0.0);
        worst = worst.max((approx - cascade_ris_vector(g, arr, dep)).camax());
    }
    worst
}

#[test]
fn criterion_02_expansion_fidelity() {
    let mut details = Vec::new();
    let mut pass = true;
    for cfg in [SystemConfig::desk(), SystemConfig::full()] {
        let g = RisGeometry::from_config(&cfg);
        let order = 2 * (2.0 * PI * cfg.ris_radius_wavelengths).ceil() as usize;
        assert_eq!(g.truncation, order);
        let err = expansion_error(&g, 1000, &cfg, 2);
        pass &= err < 1e-6;
        details.push(format!("r = {}λ, I = {order}: {err:.3e}", cfg.ris_radius_wavelengths));
    }
    verdict(2, pass, &format!("worst entrywise error over 1000 pairs (< 1e-6): {}", details.join("; ")));
}

#[test]
fn criterion_03_noiseless_recovery() {
    let cfg = SystemConfig::desk();
    let delay_tol = 1e-4 * cfg.subcarriers as f64 / cfg.bandwidth_hz;
    let (mut rel, mut ang, mut tau, mut fd, mut gain, mut secs) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for seed in 0..10 {
        let d = TrialData::draw(&cfg, seed).unwrap();
        let start = Instant::now();
        let fs = fourd_stdce(&d.noiseless, cfg.paths, None).unwrap();
        let est = extract_params(&fs, &d.noiseless, &d.pilots, &cfg, &cfg.search).unwrap();
        secs = secs.max(start.elapsed().as_secs_f64());
        rel = rel.max((&fs.reconstruct().unwrap() - &d.noiseless).norm() / d.noiseless.norm());
        let est = est.permuted(&match_paths(&d.realization, &est));
        let t = &d.realization;
        ang = ang
            .max((est.bs_departure - t.bs_departure).abs())
            .max((est.ris_arrival - t.ris_arrival).abs());
        for (e, p) in est.paths.iter().zip(&t.paths) {
            ang = ang.max((e.ms_arrival - p.ms_arrival).abs()).max((e.ris_departure - p.ris_departure).abs());
            tau = tau.max((e.delay - p.delay).abs());
            fd = fd.max((e.doppler_hz - p.doppler_hz).abs());
            gain = gain.max((e.gain - p.gain).norm() / p.gain.norm());
        }
    }
    let pass = rel < 1e-8 && ang < 1e-5 && tau < delay_tol && fd < 1e-3 && gain < 1e-6 && secs < 10.0;
    verdict(
        3,
        pass,
        &format!(
            "10 seeds: CP error {rel:.2e} (< 1e-8), angles {ang:.2e} rad (< 1e-5), delay {tau:.2e} s (< {delay_tol:.2e}), \
             Doppler {fd:.2e} Hz (< 1e-3), gain {gain:.2e} (< 1e-6), slowest trial {secs:.2} s (< 10 s)"
        ),
    );
}

#[test]
fn criterion_04_smoothing_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (i1, i2) = (rng.random_range(2..6), rng.random_range(2..6));
        let (k, m, l) = (rng.random_range(2..7), rng.random_range(3..10), rng.random_range(1..4));
        let lams: Vec<C64> = (0..l).map(|_| cis(rng.random_range(-PI..PI))).collect();
        let a = random_cmatrix(i1, l, &mut rng);
        let b = random_cmatrix(i2, l, &mut rng);
        let c = random_cmatrix(k, l, &mut rng);
        let d = CMatrix::from_fn(m, l, |r, j| lams[j].powi(r as i32 + 1));
        let t = cp_reconstruct(&a, &b, &c, &d).unwrap();
        let k4 = smoothing_window(m);
        let l4 = m + 1 - k4;
        let got = spatial_smoothing(&slot_subcarrier_matrix(&t), k, k4).unwrap();
        let e = khatri_rao(&b, &a).unwrap();
        let head = d.rows(0, k4).into_owned();
        let shifted = CMatrix::from_fn(l4, l, |r, j| lams[j].powi(r as i32));
        let want = khatri_rao(&head, &c).unwrap() * khatri_rao(&shifted, &e).unwrap().transpose();
        worst = worst.max((want - got).camax());
    }
    verdict(4, worst < 1e-12, &format!("max abs error {worst:.3e} (< 1e-12) over 100 instances"));
}

#[test]
fn criterion_05_admm_behavior() {
    let cfg = SystemConfig::desk();
    let mut rises = Vec::new();
    let mut capped = 0;
    let mut worst_rise = 0.0f64;
    let mut iters = Vec::new();
    for snr in [-10.0, 0.0, 10.0] {
        for seed in 0..20 {
            let d = TrialData::draw(&cfg, 500 + seed).unwrap();
            let y = d.observe(&cfg, snr).unwrap().y;
            let (_, st) = dlr4dtd(&y, cfg.paths, &cfg.admm).unwrap();
            iters.push(st.iterations);
            if st.stop == StopReason::MaxIterations {
                capped += 1;
            }
            // steps from iteration 5 to 6 onward
            for k in 5..st.objective.len() {
                let rise = st.objective[k] - st.objective[k - 1];
                if rise > 1e-8 {
                    worst_rise = worst_rise.max(rise);
                    rises.push(format!("{snr} dB seed {seed} it {}", k + 1));
                }
            }
        }
    }
    let max_it = iters.iter().max().copied().unwrap_or(0);
    verdict(
        5,
        rises.is_empty() && capped == 0,
        &format!(
            "60 runs: {} objective rises > 1e-8 after iteration 5 (largest {worst_rise:.2e}){}, {capped} hit the 300 cap, max iterations {max_it}",
            rises.len(),
            if rises.is_empty() { String::new() } else { format!(" e.g. {}", rises[0]) },
        ),
    );
}

#[test]
fn criterion_06_low_snr_advantage() {
    let r = snr_sweep();
    let mut pass = true;
    let mut details = Vec::new();
    for snr in [-15.0, -10.0] {
        let (m0, s0) = stat(r, snr, "dlr4dtd", "nmse");
        for other in ["fourd_stdce", "cp_als"] {
            let (m1, s1) = stat(r, snr, other, "nmse");
            let se = (s0 * s0 + s1 * s1).sqrt();
            let ok = m1 - m0 > se;
            pass &= ok;
            details.push(format!("{snr} dB dlr4dtd {m0:.3e} vs {other} {m1:.3e} (gap {:.2e}, se {se:.2e})", m1 - m0));
        }
    }
    verdict(6, pass, &format!("{SWEEP_TRIALS} trials: {}", details.join("; ")));
}

#[test]
fn criterion_07_monotonicity() {
    let r = snr_sweep();
    let mut pass = true;
    let mut details = Vec::new();
    for metric in ParamErrors::NAMES {
        let pts: Vec<(f64, f64)> = SNR_GRID.iter().map(|&x| stat(r, x, "dlr4dtd", metric)).collect();
        let mut inversions = 0;
        let mut beyond_se = 0;
        for w in pts.windows(2) {
            if w[1].0 > w[0].0 {
                inversions += 1;
                if w[1].0 - w[0].0 > (w[0].1 * w[0].1 + w[1].1 * w[1].1).sqrt() {
                    beyond_se += 1;
                }
            }
        }
        let ok = inversions <= 1 && beyond_se == 0;
        pass &= ok;
        if !ok || inversions > 0 {
            let series: Vec<String> = pts.iter().map(|(m, _)| format!("{m:.3e}")).collect();
            details.push(format!(
                "{metric}: {inversions} inversion(s), {beyond_se} beyond one se [{}]",
                series.join(" ")
            ));
        }
    }
    if details.is_empty() {
        details.push("no inversions".into());
    }
    verdict(7, pass, &format!("dlr4dtd, {SWEEP_TRIALS} trials, 8 SNR points: {}", details.join("; ")));
}

#[test]
fn criterion_08_bound_validity() {
    let cfg = SystemConfig::desk();

    // (a) analytic derivatives against central differences
    let mut deriv = 0.0f64;
    for seed in 0..5 {
        let d = TrialData::draw(&cfg, seed).unwrap();
        let ctx = FimContext::new(&d.realization, &d.pilots, &cfg, 1.0).unwrap();
        for id in ctx.ids() {
            let h = match id {
                ParamId::Delay(_) => 1e-12,
                ParamId::Doppler(_) => 1e-3,
                _ => 1e-6,
            };
            let shifted = |s: f64| {
                let mut re = d.realization.clone();
                match id {
                    ParamId::BsDeparture => re.bs_departure += s,
                    ParamId::RisArrival => re.ris_arrival += s,
                    ParamId::MsArrival(l) => re.paths[l].ms_arrival += s,
                    ParamId::RisDeparture(l) => re.paths[l].ris_departure += s,
                    ParamId::Delay(l) => re.paths[l].delay += s,
                    ParamId::Doppler(l) => re.paths[l].doppler_hz += s,
                    ParamId::Gain(l) => re.paths[l].gain += s,
                }
                build_noiseless(&re, &d.pilots, &cfg).unwrap()
            };
            let fd = (&shifted(h) - &shifted(-h)).scale(C64::new(0.5 / h, 0.0));
            let an = dz_dparam(&ctx, id).unwrap();
            let diff = an.iter().zip(fd.data()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            deriv = deriv.max(diff / an.norm());
        }
    }

    // (b) bound scales with σ²
    let mut lin = 0.0f64;
    for seed in 0..5 {
        let d = TrialData::draw(&cfg, seed).unwrap();
        let at = |sigma: f64| crb_diag(&FimContext::new(&d.realization, &d.pilots, &cfg, sigma).unwrap()).unwrap();
        let (c1, c2) = (at(0.01), at(0.03));
        for name in ParamErrors::NAMES {
            let (x1, x2) = (c1.metric(name).unwrap(), c2.metric(name).unwrap());
            lin = lin.max((x2 / (9.0 * x1) - 1.0).abs());
        }
    }

    // (c) Monte-Carlo errors against the bound
    let r = sweep(&ExperimentPlan {
        config: cfg.clone(),
        axis: SweepAxis::Snr(CRB_SNRS.to_vec()),
        trials: CRB_TRIALS,
        seed_base: 2000,
        solvers: vec![Solver::Dlr4dtd],
        with_crb: true,
        out: None,
    })
    .unwrap();
    let mut below = Vec::new();
    let mut worst_ratio = f64::INFINITY;
    for snr in CRB_SNRS {
        for name in ParamErrors::NAMES {
            let (mse, _) = stat(&r, snr, "dlr4dtd", name);
            let (bound, _) = stat(&r, snr, "crb", name);
            let ratio = mse / bound;
            worst_ratio = worst_ratio.min(ratio);
            if !(ratio >= 0.9) {
                below.push(format!("{name}@{snr}dB {ratio:.2}"));
            }
        }
    }

    let pass = deriv < 1e-6 && lin < 1e-10 && below.is_empty();
    verdict(
        8,
        pass,
        &format!(
            "(a) derivative error {deriv:.2e} (< 1e-6); (b) σ² scaling error {lin:.2e} (< 1e-10); \
             (c) dlr4dtd {CRB_TRIALS} trials, min MSE/CRB {worst_ratio:.3} (>= 0.9){}",
            if below.is_empty() { String::new() } else { format!(", below: {}", below.join(", ")) }
        ),
    );
}

#[test]
fn criterion_09_velocity_robustness() {
    let speeds = vec![40.0, 80.0, 120.0];
    let r = sweep(&ExperimentPlan {
        config: SystemConfig::desk(),
        axis: SweepAxis::Velocity {
            kmh: speeds.clone(),
            snr_db: 20.0,
        },
        trials: SWEEP_TRIALS,
        seed_base: 3000,
        solvers: vec![Solver::Dlr4dtd],
        with_crb: false,
        out: None,
    })
    .unwrap();
    let db: Vec<f64> = speeds.iter().map(|&v| 10.0 * stat(&r, v, "dlr4dtd", "nmse").0.log10()).collect();
    let spread = db.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - db.iter().cloned().fold(f64::INFINITY, f64::min);
    verdict(
        9,
        spread <= 3.0,
        &format!(
            "dlr4dtd NMSE at 20 dB: {} dB for {:?} km/h, spread {spread:.2} dB (<= 3 dB)",
            db.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(" / "),
            speeds
        ),
    );
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_ristensor"))
            .args(["sweep-snr", "--snrs=-10,10", "--trials", "3", "--seed", "9", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(out).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    verdict(
        10,
        !a.is_empty() && a == b,
        &format!("two sweep-snr runs wrote {} and {} bytes, identical: {}", a.len(), b.len(), a == b),
    );
}

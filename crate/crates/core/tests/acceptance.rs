//! Acceptance suite: one pass/fail line per criterion, printed straight to
//! the process stderr so it shows up without `--nocapture`.

use std::f64::consts::PI;
use std::io::Write;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use carleman_core::cli::{auto_weights, RunConfig, WeightOverrides};
use carleman_core::coefficients::{gamma_threshold, random_pair, CoefficientPair, ComplexSymmetricMatrix, ScalarModulation};
use carleman_core::grid::{
    double_integral_seminorm_1d, h_half_seminorm, l2_via_fft, synthesize, synthesize_offset, Family, FieldSpec, Grid,
    JumpSpec,
};
use carleman_core::harness::{interior_check, tau_sweep, CarlemanReport, EstimateId, SweepSpec};
use carleman_core::partition::{audit, bump, overlap_count};
use carleman_core::pseudoconvexity::{certify, eval_q};
use carleman_core::symbol::{conjugated_roots, factor_at, a_lower_bound, magnitude_cap};
use carleman_core::transmission::{certify_transmission, det_t, det_t_brute, log_grid};
use carleman_core::weights::WeightParameters;
use carleman_core::{coefficients::DerivedConstants, Side};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn report(id: usize, title: &str, v: &Verdict, elapsed: Duration) {
    let tag = if v.pass { "PASS" } else { "FAIL" };
    let line = format!("[{tag}] criterion {id}: {title} ({}; {:.2?})\n", v.detail, elapsed);
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-3 {
            return v.iter().map(|x| x / r).collect();
        }
    }
}

/// The random validated family shared by criteria 2 and 3.
fn random_family(count: usize, seed: u64) -> Vec<(CoefficientPair, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(2..=4);
            let lo = rng.gen_range(0.2..1.5);
            let hi = lo * rng.gen_range(1.0..4.0);
            let gamma = rng.gen_range(0.0..1.0);
            let pair = random_pair(&mut rng, n, lo, hi, gamma).expect("valid random pair");
            let xi = unit(&mut rng, n - 1);
            (pair, xi)
        })
        .collect()
}

fn criterion1() -> Verdict {
    let t = Instant::now();
    let a = gamma_threshold(1.0, 1.0, 2).unwrap();
    let b = gamma_threshold(1.0, 2.0, 3).unwrap();
    let dt = t.elapsed();
    let pass = (a - 0.5773503).abs() <= 1e-6 && (b - 0.0145803).abs() <= 1e-6 && dt < Duration::from_millis(1);
    verdict(pass, format!("gamma0(1,1,2) = {a:.7}, gamma0(1,2,3) = {b:.7}, {dt:?}"))
}

fn criterion2(family: &[(CoefficientPair, Vec<f64>)]) -> Verdict {
    let (a1, a2) = (1.0, 2.0);
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    for (pair, xi) in family {
        let minus = factor_at(pair, Side::Minus, xi).unwrap();
        let plus = factor_at(pair, Side::Plus, xi).unwrap();
        for tau in [0.1, 1.0, 10.0] {
            let s2 = conjugated_roots(&plus, a2, tau).sigma1.im;
            let s1 = conjugated_roots(&minus, a1, tau).sigma1.im;
            let v = (s2 + tau * a2).max(tau * a1 - s1);
            worst = worst.max(v);
            if s2 > -tau * a2 + 1e-10 || s1 < tau * a1 - 1e-10 {
                failures += 1;
            }
        }
    }
    verdict(failures == 0, format!("{} pairs x 3 tau, {failures} failures, worst excess {worst:.3e}", family.len()))
}

fn criterion3(family: &[(CoefficientPair, Vec<f64>)]) -> Verdict {
    let (mut lower_fail, mut cap_fail) = (0, 0);
    for (pair, xi) in family {
        let d = pair.derived().unwrap();
        for side in Side::BOTH {
            let f = factor_at(pair, side, xi).unwrap();
            let lower = a_lower_bound(&f, &d);
            if f.root_a < lower.rhs - 1e-10 {
                lower_fail += 1;
            }
            if !magnitude_cap(&f, &d).pass {
                cap_fail += 1;
            }
        }
    }
    verdict(
        lower_fail == 0 && cap_fail == 0,
        format!("{} factorizations, lower-bound failures {lower_fail}, cap failures {cap_fail}", 2 * family.len()),
    )
}

fn criterion4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut gap: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=4);
        let pair = random_pair(&mut rng, n, 1.0, 2.0, 0.01).unwrap();
        let xi = unit(&mut rng, n - 1);
        let m = factor_at(&pair, Side::Minus, &xi).unwrap();
        let p = factor_at(&pair, Side::Plus, &xi).unwrap();
        let closed = det_t(&m, &p);
        let brute = det_t_brute(&m, &p, rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0), rng.gen_range(0.1..10.0));
        gap = gap.max((closed - brute).norm() / closed.norm());
    }
    let taus = log_grid(1.0, 1e3, 20);
    let (mut certified, mut min_det) = (0, f64::INFINITY);
    for _ in 0..100 {
        let n = rng.gen_range(2..=3);
        let lo = rng.gen_range(0.5..1.5);
        let hi = lo * rng.gen_range(1.0..2.0);
        let gamma = 0.9 * gamma_threshold(lo, hi, n).unwrap() * rng.gen_range(0.0..1.0);
        let pair = random_pair(&mut rng, n, lo, hi, gamma).unwrap();
        let w = auto_weights(&pair, &WeightOverrides::default(), 128, 256).unwrap().weights;
        let r = certify_transmission(&pair, &w, 128, &taus).unwrap();
        min_det = min_det.min(r.min_abs_det_t);
        certified += usize::from(r.certified);
    }

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("misweighted.json");
    std::fs::write(
        &cfg,
        r#"{"n": 2, "gamma": 0.01,
            "plus": {"M": [[1,0],[0,1]], "N": [[1,0],[0,1]]},
            "minus": {"M": [[1,0],[0,1]], "N": [[1,0],[0,1]]},
            "weights": {"alpha_plus": 0.01, "alpha_minus": 1.0}}"#,
    )
    .unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_carleman"))
        .args(["analyze", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    let code = status.status.code();
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("analyze.json")).unwrap()).unwrap();
    let names_case2 = json["result"]["violations"].as_array().unwrap().iter().any(|v| v == "case2");
    let pass = gap <= 1e-10 && certified == 100 && min_det > 0.0 && code == Some(2) && names_case2;
    verdict(
        pass,
        format!(
            "max det gap {gap:.2e}; {certified}/100 certified, min |det T| {min_det:.3e}; mis-weighted exit {code:?}, case2 named {names_case2}"
        ),
    )
}

fn criterion5() -> Verdict {
    let a = ComplexSymmetricMatrix::scaled_identity(2, 1.0, 0.0).unwrap();
    let w = WeightParameters::new(1.0, 1.0, 1.0, 0.1, 0.5).unwrap();
    let q = eval_q(&a, &w, &[0.0, 0.0], &[1.0, 0.0], 1.0, Side::Plus).unwrap();
    let d = DerivedConstants::new(1.0, 1.0, 2).unwrap();
    let t = Instant::now();
    let c = certify(&a, Side::Plus, &w, &d, 0.25, 4096).unwrap();
    let dt = t.elapsed();
    let bound = 2.0 * w.beta * d.lambda_tilde1 * d.lambda0 * d.lambda0;
    let pass = (q - 3.6).abs() <= 1e-9
        && c.min_q_on_null_set >= c.null_set_lower_bound - 1e-8
        && (c.null_set_lower_bound - bound).abs() <= 1e-12
        && c.fresh_sample_margin >= -1e-8
        && dt < Duration::from_secs(10);
    verdict(
        pass,
        format!(
            "Q = {q:.12}, min Q = {:.6} >= {:.6}, C1 = {:.3e}, C2 = {:.3e}, fresh margin {:.3e}, certify {dt:.2?}",
            c.min_q_on_null_set, c.null_set_lower_bound, c.c1, c.c2, c.fresh_sample_margin
        ),
    )
}

fn criterion6() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for dim in [1usize, 2] {
        let a = audit(4.0, dim, -1.0, 1.0, 10_000, 16).unwrap();
        let b = audit(8.0, dim, -1.0, 1.0, 10_000, 16).unwrap();
        let card = overlap_count(4.0, &vec![0; dim], 64);
        let expected = 5usize.pow(dim as u32);
        let rel = |x: f64, y: f64| ((y - x) / x).abs();
        let stable = rel(a.c1, b.c1) <= 0.1 && rel(a.c2, b.c2) <= 0.1 && rel(a.c3, b.c3) <= 0.1;
        let finite = [a.c1, a.c2, a.c3].iter().all(|v| v.is_finite());
        ok &= a.max_sum_deviation <= 1e-12 && b.max_sum_deviation <= 1e-12 && a.audit_nodes >= 10_000;
        ok &= card == expected && a.overlap_cardinality == expected && stable && finite;
        notes.push(format!(
            "d={dim}: dev {:.1e}, overlap {card}, C = ({:.3}, {:.3}, {:.3}) -> ({:.3}, {:.3}, {:.3})",
            a.max_sum_deviation.max(b.max_sum_deviation),
            a.c1,
            a.c2,
            a.c3,
            b.c1,
            b.c2,
            b.c3
        ));
    }
    verdict(ok, notes.join("; "))
}

fn criterion7() -> Verdict {
    let line = |n: usize, l: f64, f: &dyn Fn(f64) -> f64| -> (Vec<Complex64>, f64) {
        let h = 2.0 * l / (n - 1) as f64;
        ((0..n).map(|i| Complex64::new(f(-l + i as f64 * h), 0.0)).collect(), h)
    };
    let (g, h) = line(2048, 20.0, &|x| (-x * x / 2.0).exp());
    let semi = h_half_seminorm(&g, &[2048], h).unwrap();
    let l2 = l2_via_fft(&g, &[2048], h).unwrap();
    let gauss_ok = (semi - 2.0 * PI).abs() <= 0.01 * 2.0 * PI;
    let parseval_ok = (l2 - PI.sqrt()).abs() <= 1e-6 * PI.sqrt();
    let fams: [&dyn Fn(f64) -> f64; 5] = [
        &|x| (-x * x).exp(),
        &|x| bump(x / 2.0),
        &|x| bump(x / 2.0) * (2.0 * x).cos(),
        &|x| x * (-x * x / 2.0).exp(),
        &|x| (1.0 - x * x / 9.0) * bump(x / 2.5),
    ];
    let ratios: Vec<f64> = fams
        .iter()
        .map(|f| {
            let (v, h) = line(256, 6.0, *f);
            h_half_seminorm(&v, &[256], h).unwrap() / double_integral_seminorm_1d(&v, h)
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / 5.0;
    let stable = ratios.iter().all(|r| (r - mean).abs() <= 0.2 * mean);
    verdict(
        gauss_ok && parseval_ok && stable,
        format!(
            "Gaussian {semi:.6} vs 2pi, Parseval rel err {:.1e}, multiplier/double-integral ratios {:.3?}",
            (l2 - PI.sqrt()).abs() / PI.sqrt(),
            ratios
        ),
    )
}

fn isotropic_jump_pair() -> CoefficientPair {
    CoefficientPair::new(
        ComplexSymmetricMatrix::scaled_identity(2, 2.0, 0.1).unwrap(),
        ComplexSymmetricMatrix::scaled_identity(2, 1.0, 0.1).unwrap(),
        None,
        0.0,
    )
    .unwrap()
}

fn sweep_pair(id: EstimateId, pair: &CoefficientPair, w: &WeightParameters, rho: f64) -> (CarlemanReport, CarlemanReport, Duration) {
    let sweep = SweepSpec { tau_min: 20.0, tau_max: 200.0, points: 12, r0: 0.5 };
    let run = |h: f64| {
        let spec = FieldSpec {
            rho,
            h,
            family: Family::BumpPoly,
            jump: JumpSpec { h0_amp: 0.5, h1_amp: 0.5 },
            half_width: None,
            center: None,
        };
        let f = synthesize(&spec, pair).unwrap();
        let t = Instant::now();
        let r = tau_sweep(id, &f, pair, w, &sweep).unwrap();
        (r, t.elapsed())
    };
    let (coarse, t1) = run(1.0 / 64.0);
    let (fine, t2) = run(1.0 / 128.0);
    (coarse, fine, t1.max(t2))
}

fn sweep_verdict(coarse: &CarlemanReport, fine: &CarlemanReport) -> (bool, f64) {
    let finite = |r: &CarlemanReport| r.bounded && r.rows.iter().all(|x| x.ratio.is_finite() && x.ratio > 0.0);
    let change = ((fine.max_ratio_all - coarse.max_ratio_all) / coarse.max_ratio_all).abs();
    (finite(coarse) && finite(fine) && change < 0.1, change)
}

fn criterion8() -> Verdict {
    let base = isotropic_jump_pair();
    let choice = auto_weights(&base, &WeightOverrides::default(), 512, 1024).unwrap();
    let w = choice.weights;
    let (c, f, t_frozen) = sweep_pair(EstimateId::Frozen, &base, &w, 0.4);
    let (ok_frozen, ch_frozen) = sweep_verdict(&c, &f);
    let modulation = ScalarModulation {
        plus: base.plus.clone(),
        minus: base.minus.clone(),
        amplitude: 0.1,
        wavevector: vec![3.0, 4.0],
    };
    let m0 = modulation.lipschitz_constant();
    let full = base.clone().with_spatial(Arc::new(modulation), m0);
    let rho = 0.8 * w.delta * 0.5;
    let (fc, ff, t_full) = sweep_pair(EstimateId::Full, &full, &w, rho);
    let (ok_full, ch_full) = sweep_verdict(&fc, &ff);
    let fast = t_frozen < Duration::from_secs(120) && t_full < Duration::from_secs(120);
    verdict(
        ok_frozen && ok_full && fast,
        format!(
            "gamma 0.1 vs gamma0 {:.4} (sufficient bound only); weights a+ {} a- {} eps {} delta {}; frozen max R {:.4e} -> {:.4e} ({:.2}%), full max R {:.4e} -> {:.4e} ({:.2}%)",
            choice.gamma0,
            w.alpha_plus,
            w.alpha_minus,
            w.epsilon,
            w.delta,
            c.max_ratio_all,
            f.max_ratio_all,
            100.0 * ch_frozen,
            fc.max_ratio_all,
            ff.max_ratio_all,
            100.0 * ch_full
        ),
    )
}

fn criterion9() -> Verdict {
    let pair = isotropic_jump_pair();
    let w = auto_weights(&pair, &WeightOverrides::default(), 512, 1024).unwrap().weights;
    let grid = Grid::new(2, 0.5, 1.0 / 64.0).unwrap();
    let field = synthesize_offset(grid, 0.3, 0.25, 0.15, Family::BumpPoly).unwrap();
    let sweep = SweepSpec { tau_min: 20.0, tau_max: 200.0, points: 12, r0: 0.5 };
    let interior = interior_check(&field, &pair, &w, &sweep).unwrap();
    let interface = tau_sweep(EstimateId::Frozen, &field, &pair, &w, &sweep).unwrap();
    let mut worst: f64 = 0.0;
    let mut vanish = true;
    for (a, b) in interior.rows.iter().zip(&interface.rows) {
        worst = worst.max(((a.ratio - b.ratio) / b.ratio).abs());
        vanish &= b.rhs_jump() == 0.0 && b.lhs_trace() == 0.0;
    }
    let pass = interior.bounded && vanish && worst < 0.05;
    verdict(
        pass,
        format!("interior max R {:.4e}, interface groups vanish {vanish}, max path gap {:.2e}", interior.max_ratio_all, worst),
    )
}

#[test]
fn acceptance() {
    let family = random_family(10_000, 2);
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("gamma threshold closed form", Box::new(criterion1)),
        ("root-sign invariants", Box::new(|| criterion2(&family))),
        ("lower bound on A and magnitude cap", Box::new(|| criterion3(&family))),
        ("transmission determinant and certification", Box::new(criterion4)),
        ("pseudoconvexity certificate", Box::new(criterion5)),
        ("partition of unity audit", Box::new(criterion6)),
        ("H^1/2 seminorm", Box::new(criterion7)),
        ("Carleman sweep boundedness and refinement", Box::new(criterion8)),
        ("interior estimate consistency", Box::new(criterion9)),
    ];
    let mut failed = Vec::new();
    for (i, (title, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = run();
        let dt = t.elapsed();
        let v = if i == 1 && dt > Duration::from_secs(5) {
            verdict(false, format!("{} [over the 5 s budget]", v.detail))
        } else {
            v
        };
        report(i + 1, title, &v, dt);
        if !v.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn config_round_trip_for_acceptance_pair() {
    let cfg = RunConfig::from_json(
        r#"{"n": 2, "gamma": 0.1,
            "plus": {"M": [[2,0],[0,2]], "N": [[2,0],[0,2]]},
            "minus": {"M": [[1,0],[0,1]], "N": [[1,0],[0,1]]}}"#,
    )
    .unwrap();
    let pair = cfg.pair().unwrap();
    assert_eq!((pair.lambda0, pair.big_lambda0), (1.0, 2.0));
}

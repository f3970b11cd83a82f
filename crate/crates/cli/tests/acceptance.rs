//! One line per acceptance criterion; exits non-zero if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use bergman::geometry::hsc;
use bergman::modeltests::{binomial_sign_test, dalpha_pipeline, flat_slice_check, laplacian_contradiction_check, PipelineRun};
use bergman::moments::{gaussian_moment_quadrature, moment_quadrature};
use bergman::{DomainSpec, KernelModel, ModelKind, MultiIndex, Settings};
use num_complex::Complex64;

struct Line {
    id: &'static str,
    passed: bool,
    summary: String,
}

fn line(id: &'static str, passed: bool, summary: impl Into<String>) -> Line {
    Line {
        id,
        passed,
        summary: summary.into(),
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn criterion_1(runs: &[(f64, PipelineRun, Duration)]) -> Line {
    let mut ok = true;
    let mut parts = Vec::new();
    for (alpha, run, took) in runs {
        let r = &run.report;
        let value = 0.5 * (r.global_min + r.global_max);
        let this = r.is_constant
            && (value - 2.0).abs() < 1e-3
            && r.max_deviation < 1e-3
            && r.points.len() >= 20
            && run.outcome.passed
            && *took < Duration::from_secs(60);
        ok &= this;
        parts.push(format!("α={alpha}: H={value:.7} dev={:.1e} {:.1}s", r.max_deviation, took.as_secs_f64()));
    }
    line("1 sliver constant curvature 2", ok, parts.join("; "))
}

fn criterion_2(runs: &[(f64, PipelineRun, Duration)]) -> Line {
    let mut ok = true;
    let mut parts = Vec::new();
    for (alpha, run, _) in runs {
        let conv: Vec<Vec<u32>> = run.table.convergent().map(|(i, _)| i.entries().to_vec()).collect();
        let basis = conv.len() == 3 && [vec![0, 0], vec![1, 0], vec![0, 1]].iter().all(|e| conv.contains(e));
        let degrees_ok = run.table.max_degree() == 4 && run.table.entries.len() == 15;
        let get = |e: [u32; 2]| run.table.get(&MultiIndex::new(e.to_vec())).unwrap().clone();
        let (m10, m01) = (get([1, 0]), get([0, 1]));
        let (v10, v01) = (m10.value.unwrap_or(f64::NAN), m01.value.unwrap_or(f64::NAN));
        let bound = 2.0 * PI * PI / (alpha - 2.0);
        let gap = (v10 - v01).abs();
        let err = m10.abs_error.unwrap_or(0.0) + m01.abs_error.unwrap_or(0.0);
        ok &= basis && degrees_ok && v10 < bound && gap <= err;
        parts.push(format!("α={alpha}: M10={v10:.9} < {bound:.3}, |M10−M01|={gap:.1e} ≤ {err:.1e}"));
    }
    line("2 sliver basis {1,z,w}", ok, parts.join("; "))
}

fn criterion_3() -> Line {
    let spec = DomainSpec::hartogs_gauss(1).unwrap();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for a in 0..=4u32 {
        for q in 0..=3u32 {
            let oracle = PI * PI * factorial(a) / f64::from(q + 1).powi(a as i32 + 2);
            match moment_quadrature(&spec, &MultiIndex::new(vec![a, q]), &Settings::default()) {
                Ok(r) => worst = worst.max((r.value.unwrap() - oracle).abs() / oracle),
                Err(_) => ok = false,
            }
        }
    }
    line("3 Hartogs moments", ok && worst < 1e-6, format!("max relative error {worst:.2e} (tol 1e-6)"))
}

fn criterion_4() -> Line {
    let series = KernelModel::hartogs_gauss_series(1, None).unwrap();
    let mut worst: f64 = 0.0;
    for z in [0.0, 1.0f64] {
        for k in 0..10 {
            let u = 0.1 * f64::from(k);
            let w = (u * (-z * z).exp()).sqrt();
            let oracle = (z * z).exp() / (PI * PI) * (1.0 + u) / (1.0 - u).powi(3);
            let k_series = series.eval(&[c(z, 0.0), c(w, 0.0)]).unwrap().log_k.exp();
            worst = worst.max((k_series - oracle).abs() / oracle);
        }
    }
    line("4 Hartogs kernel series", worst < 1e-8, format!("max relative deviation {worst:.2e} (tol 1e-8)"))
}

fn criterion_5() -> Line {
    let pts = vec![vec![c(0.0, 0.0)], vec![c(0.5, 0.0)], vec![c(1.0, 0.3)]];
    match flat_slice_check(1, &pts, &Settings::default()) {
        Ok(out) => {
            let worst = |prefix: &str| {
                out.details
                    .iter()
                    .filter(|d| d.label.starts_with(prefix))
                    .map(|d| d.measured)
                    .fold(0.0, f64::max)
            };
            let (mixed, tangent, curv) = (worst("mixed g"), worst("tangent g"), worst("tangent R"));
            let ratio = out.details[0].measured;
            let ok = out.passed && mixed < 1e-8 && tangent < 1e-6 && curv < 1e-5 && ratio >= 1e3;
            line(
                "5 flat slice",
                ok,
                format!("mixed {mixed:.1e}, g−I {tangent:.1e}, R {curv:.1e}, control ratio {ratio:.2e}"),
            )
        }
        Err(e) => line("5 flat slice", false, e.to_string()),
    }
}

fn anchor_worst(model: &KernelModel, spec: &DomainSpec, value: f64, seed: u64, margin: f64) -> f64 {
    let n = model.dimension();
    let pts = spec.sample_interior(10, seed, margin).unwrap();
    let mut worst: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        let mut rng = bergman::rng::stream(seed + 1, i as u64);
        let v = bergman::rng::unit_direction(&mut rng, n);
        let h = hsc(model, p, &v, &Settings::default()).unwrap_or(f64::NAN);
        worst = worst.max((h - value).abs());
        if h.is_nan() {
            worst = f64::INFINITY;
        }
    }
    worst
}

fn criterion_6() -> Line {
    let fs = anchor_worst(
        &KernelModel::model(ModelKind::FubiniStudy, 1.0, 2).unwrap(),
        &DomainSpec::model(ModelKind::FubiniStudy, 1.0, 2).unwrap(),
        2.0,
        61,
        0.5,
    );
    let mut hyp: f64 = 0.0;
    for n in 1..=3 {
        let s = n as f64 + 1.0;
        hyp = hyp.max(anchor_worst(
            &KernelModel::model(ModelKind::Hyperbolic, s, n).unwrap(),
            &DomainSpec::model(ModelKind::Hyperbolic, s, n).unwrap(),
            -2.0 / s,
            62,
            0.3,
        ));
    }
    let eu = anchor_worst(
        &KernelModel::model(ModelKind::Euclidean, 1.0, 2).unwrap(),
        &DomainSpec::model(ModelKind::Euclidean, 1.0, 2).unwrap(),
        0.0,
        63,
        0.5,
    );
    line(
        "6 model-space anchors",
        fs <= 1e-6 && hyp <= 1e-6 && eu <= 1e-8,
        format!("FS |H−2| {fs:.1e}, hyperbolic |H+2/(n+1)| {hyp:.1e}, Euclidean |H| {eu:.1e}"),
    )
}

fn criterion_7(report: &serde_json::Value) -> Line {
    let bound = report["outcomes"]
        .as_array()
        .and_then(|o| o.iter().find(|x| x["name"] == "bergman_bound"))
        .cloned();
    match bound {
        Some(b) => {
            let details = b["details"].as_array().cloned().unwrap_or_default();
            let worst = details[0]["measured"].as_f64().unwrap_or(f64::NAN);
            let models = details.len() - 1;
            line(
                "7 Bergman bound",
                worst <= 2.0 + 1e-3 && b["passed"] == true,
                format!("max sampled HSC {worst:.7} over {models} kernel models (≤ 2 + 1e-3)"),
            )
        }
        None => line("7 Bergman bound", false, "suite report lacks bergman_bound"),
    }
}

fn criterion_8() -> Line {
    let mut ok = true;
    let mut parts = Vec::new();
    for lambda in [0.5f64, 1.0, 1.5, 2.0, 2.5, 3.0] {
        let k_max = lambda.ceil() as usize + 2;
        let got = binomial_sign_test(lambda, k_max).unwrap();
        let integer = lambda.fract() == 0.0;
        match got {
            None => ok &= integer,
            Some((k, coeff)) => {
                let direct = (0..k).map(|i| lambda - i as f64).product::<f64>() / factorial(k as u32);
                ok &= !integer && k == lambda.floor() as usize + 2 && (coeff - direct).abs() <= f64::EPSILON * direct.abs();
                parts.push(format!("λ={lambda}: k={k} c={coeff}"));
            }
        }
    }
    line("8 integer-λ dichotomy", ok, parts.join(", "))
}

fn criterion_9() -> Line {
    let mut worst: f64 = 0.0;
    for n in [1, 2] {
        let idx = MultiIndex::up_to_degree(n, 3);
        for a in &idx {
            for b in &idx {
                let oracle = if a == b { a.entries().iter().map(|&k| factorial(k)).product() } else { 0.0 };
                let q = gaussian_moment_quadrature(a, b, &Settings::default()).unwrap();
                worst = worst.max((q.value - c(oracle, 0.0)).norm());
            }
        }
    }
    let mut lap_ok = true;
    let mut lap_worst: f64 = 0.0;
    for (n, pts) in [
        (1, vec![vec![c(1.0, 1.0)], vec![c(-0.4, 0.2)]]),
        (2, vec![vec![c(0.3, -0.1), c(-0.7, 0.2)], vec![c(1.0, 0.5), c(0.2, 0.2)]]),
    ] {
        match laplacian_contradiction_check(n, &pts, &Settings::default()) {
            Ok(out) => {
                lap_ok &= out.passed;
                for d in out.details.iter().skip(1) {
                    lap_worst = lap_worst.max((d.measured - d.expected).abs());
                }
            }
            Err(_) => lap_ok = false,
        }
    }
    line(
        "9 Gaussian moments and Laplacian",
        worst <= 1e-8 && lap_ok && lap_worst <= 1e-6,
        format!("moments max error {worst:.1e} (tol 1e-8), Laplacian max error {lap_worst:.1e} (tol 1e-6)"),
    )
}

struct VerifyRun {
    code: Option<i32>,
    stdout: Vec<u8>,
    json: Vec<u8>,
}

fn verify(dir: &Path, tag: &str, profile: &str) -> VerifyRun {
    let json = dir.join(format!("{tag}.json"));
    let out = Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(["--reproducible", "verify", "--suite", "paper", "--tol-profile", profile, "--json"])
        .arg(&json)
        .output()
        .expect("bergman binary runs");
    VerifyRun {
        code: out.status.code(),
        stdout: out.stdout,
        json: std::fs::read(&json).unwrap_or_default(),
    }
}

fn criterion_10(a: &VerifyRun, b: &VerifyRun) -> Line {
    let rows = String::from_utf8_lossy(&a.stdout).lines().filter(|l| l.contains("| PASS")).count();
    let same = a.stdout == b.stdout && a.json == b.json && !a.json.is_empty();
    line(
        "10 determinism",
        same && a.code == Some(0) && b.code == Some(0) && rows >= 10,
        format!("two reproducible runs identical: {same}; exit {:?}/{:?}; {rows} PASS rows", a.code, b.code),
    )
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut runs = Vec::new();
    for alpha in [2.2, 2.5, 2.8] {
        let start = Instant::now();
        let run = dalpha_pipeline(alpha, 7, &Settings::default()).expect("sliver pipeline runs");
        runs.push((alpha, run, start.elapsed()));
    }
    let first = verify(dir.path(), "first", "default");
    let second = verify(dir.path(), "second", "default");
    let report: serde_json::Value = serde_json::from_slice(&first.json).unwrap_or(serde_json::Value::Null);
    let strict = verify(dir.path(), "strict", "strict");

    let lines = vec![
        criterion_1(&runs),
        criterion_2(&runs),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(&report),
        criterion_8(),
        criterion_9(),
        criterion_10(&first, &second),
        line(
            "strict tolerance profile",
            strict.code == Some(0),
            format!("verify --tol-profile strict exit {:?}", strict.code),
        ),
    ];
    let mut failed = 0;
    for l in &lines {
        println!("[{}] {}: {}", if l.passed { "PASS" } else { "FAIL" }, l.id, l.summary);
        failed += usize::from(!l.passed);
    }
    println!("acceptance: {}/{} passed", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

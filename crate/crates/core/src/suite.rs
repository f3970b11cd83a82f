//! The fixed verification suite behind `verify --suite paper`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::domains::{DomainSpec, ModelKind, Point};
use crate::error::Result;
use crate::geometry::{kernel_curvature_verdict, CurvatureReport};
use crate::kernel::KernelModel;
use crate::modeltests::{
    binomial_grid_check, dalpha_pipeline, flat_slice_check, gaussian_uniqueness_check,
    laplacian_contradiction_check, CheckOutcome, Detail, Relation,
};
use crate::moments::{moment_closed_form, moment_quadrature, MultiIndex};
use crate::settings::{tolerances, Settings};

pub const SUITE_SEED: u64 = 20240917;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub tol_profile: String,
    pub passed: bool,
    pub outcomes: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.outcomes.iter().filter(|o| !o.passed)
    }

    /// `name | passed | measured | expected | tol`, one row per check.
    pub fn to_table(&self) -> String {
        let width = self.outcomes.iter().map(|o| o.name.len()).max().unwrap_or(4).max(4);
        let mut out = format!("{:<width$} | passed | {:>12} | {:>12} | {:>9}\n", "name", "measured", "expected", "tol");
        for o in &self.outcomes {
            out.push_str(&format!(
                "{:<width$} | {:<6} | {:>12.5e} | {:>12.5e} | {:>9.1e}\n",
                o.name,
                if o.passed { "PASS" } else { "FAIL" },
                o.measured,
                o.expected,
                o.tol
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite report serialises")
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn anchor(name: &str, report: &CurvatureReport, value: f64, tol: f64) -> CheckOutcome {
    let dev = (report.global_max - value).abs().max((report.global_min - value).abs());
    CheckOutcome::new(
        name,
        vec![
            Detail::near("worst HSC", value + dev, value, tol),
            Detail::near("HSC min", report.global_min, value, tol),
            Detail::near("HSC max", report.global_max, value, tol),
        ],
    )
}

/// A kernel model together with the curvature it produced.
struct Sampled {
    label: String,
    report: CurvatureReport,
}

fn verdict(
    label: impl Into<String>,
    model: &KernelModel,
    points: &[Point],
    dirs: usize,
    settings: &Settings,
) -> Result<Sampled> {
    let label = label.into();
    let report = kernel_curvature_verdict(model, points, dirs, SUITE_SEED, settings.tol(tolerances::CONSTANCY), settings)
        .map_err(|e| e.in_stage(label.clone()))?;
    Ok(Sampled { label, report })
}

/// Quadrature against closed-form Gaussian Hartogs moments, `n = 1`.
pub fn hartogs_moment_check(settings: &Settings) -> Result<CheckOutcome> {
    let spec = DomainSpec::hartogs_gauss(1)?;
    let tol = settings.tol(tolerances::HARTOGS_MOMENT_REL);
    let mut details = Vec::new();
    for a in 0..=4u32 {
        for q in 0..=3u32 {
            let idx = MultiIndex::new(vec![a, q]);
            let exact = moment_closed_form(&spec, &idx)?.and_then(|r| r.value).unwrap_or(f64::NAN);
            let quad = moment_quadrature(&spec, &idx, settings)?;
            let value = quad.value.unwrap_or(f64::NAN);
            let rel = (value - exact).abs() / exact;
            details.push(Detail::new(format!("M({idx}) relative error"), rel, 0.0, tol, Relation::AtMost));
            let honest = (value - exact).abs() <= quad.abs_error.unwrap_or(0.0) + 1e-15 * exact;
            details.push(Detail::near(format!("M({idx}) error bound covers"), f64::from(u8::from(honest)), 1.0, 0.0));
        }
    }
    let worst = details
        .iter()
        .filter(|d| d.relation == Relation::AtMost)
        .map(|d| d.measured)
        .fold(0.0, f64::max);
    let mut all = vec![Detail::new("max relative error", worst, 0.0, tol, Relation::AtMost)];
    all.extend(details);
    Ok(CheckOutcome::new("hartogs_moments", all))
}

/// Automatically truncated Hartogs series against the closed form.
pub fn hartogs_kernel_check(settings: &Settings) -> Result<CheckOutcome> {
    let closed = KernelModel::hartogs_gauss(1)?;
    let series = KernelModel::hartogs_gauss_series(1, None)?;
    let tol = settings.tol(tolerances::HARTOGS_KERNEL_REL);
    let mut details = Vec::new();
    for z in [0.0, 1.0f64] {
        for k in 0..10 {
            let u = 0.1 * f64::from(k);
            let w = (u * (-z * z).exp()).sqrt();
            let p = [c(z, 0.0), c(w, 0.0)];
            let a = series.eval(&p)?;
            let b = closed.eval(&p)?;
            let rel = (a.log_k - b.log_k).exp_m1().abs();
            details.push(Detail::new(format!("z={z} u={u:.1}"), rel, 0.0, tol, Relation::AtMost));
        }
    }
    let worst = details.iter().map(|d| d.measured).fold(0.0, f64::max);
    let mut all = vec![Detail::new("max relative deviation", worst, 0.0, tol, Relation::AtMost)];
    all.extend(details);
    Ok(CheckOutcome::new("hartogs_kernel_series", all))
}

enum Job {
    Pipeline(f64),
    FlatSlice(usize),
    Gaussian(usize),
    Laplacian(usize),
    Binomial,
    HartogsMoments,
    HartogsKernel,
    FubiniStudy,
    Hyperbolic(usize),
    Euclidean,
    Ball(usize),
    HartogsSweep,
}

struct JobResult {
    outcome: CheckOutcome,
    /// Curvature samples that count toward the upper bound.
    bergman: Vec<Sampled>,
}

impl JobResult {
    fn plain(outcome: CheckOutcome) -> Self {
        JobResult {
            outcome,
            bergman: Vec::new(),
        }
    }
}

fn run_job(job: &Job, settings: &Settings) -> Result<JobResult> {
    match *job {
        Job::Pipeline(alpha) => {
            let run = dalpha_pipeline(alpha, SUITE_SEED, settings)?;
            let mut bergman = vec![Sampled {
                label: format!("DAlpha({alpha}) series"),
                report: run.report,
            }];
            for (i, r) in run.perturbed.into_iter().enumerate() {
                bergman.push(Sampled {
                    label: format!("DAlpha({alpha}) perturbed {i}"),
                    report: r,
                });
            }
            Ok(JobResult {
                outcome: run.outcome,
                bergman,
            })
        }
        Job::FlatSlice(1) => Ok(JobResult::plain(flat_slice_check(
            1,
            &[vec![c(0.0, 0.0)], vec![c(0.5, 0.0)], vec![c(1.0, 0.3)]],
            settings,
        )?)),
        Job::FlatSlice(n) => {
            let pts = vec![vec![c(0.0, 0.0); n], (0..n).map(|j| c(0.4 - 0.1 * j as f64, 0.2)).collect()];
            Ok(JobResult::plain(flat_slice_check(n, &pts, settings)?))
        }
        Job::Gaussian(n) => Ok(JobResult::plain(gaussian_uniqueness_check(n, 3, settings)?)),
        Job::Laplacian(n) => {
            let pts: Vec<Vec<Complex64>> = if n == 1 {
                vec![vec![c(1.0, 1.0)], vec![c(-0.3, 0.2)]]
            } else {
                vec![(0..n).map(|j| c(0.5 - 0.3 * j as f64, 0.1 * j as f64 - 0.2)).collect()]
            };
            Ok(JobResult::plain(laplacian_contradiction_check(n, &pts, settings)?))
        }
        Job::Binomial => {
            let grid: Vec<f64> = (1..=10).map(|k| 0.5 * f64::from(k)).collect();
            Ok(JobResult::plain(binomial_grid_check(&grid)?))
        }
        Job::HartogsMoments => Ok(JobResult::plain(hartogs_moment_check(settings)?)),
        Job::HartogsKernel => Ok(JobResult::plain(hartogs_kernel_check(settings)?)),
        Job::FubiniStudy => {
            let spec = DomainSpec::model(ModelKind::FubiniStudy, 1.0, 2)?;
            let model = KernelModel::model(ModelKind::FubiniStudy, 1.0, 2)?;
            let pts = spec.sample_interior(10, SUITE_SEED, 0.5)?;
            let s = verdict("FubiniStudy(1)", &model, &pts, 8, settings)?;
            let outcome = anchor("fubini_study_anchor", &s.report, 2.0, settings.tol(tolerances::MODEL_ANCHOR));
            Ok(JobResult {
                outcome,
                bergman: vec![s],
            })
        }
        Job::Hyperbolic(n) => {
            let scale = n as f64 + 1.0;
            let spec = DomainSpec::model(ModelKind::Hyperbolic, scale, n)?;
            let model = KernelModel::model(ModelKind::Hyperbolic, scale, n)?;
            let pts = spec.sample_interior(10, SUITE_SEED, 0.3)?;
            let s = verdict(format!("Hyperbolic({scale}, n {n})"), &model, &pts, 8, settings)?;
            let outcome = anchor(
                &format!("hyperbolic_anchor_n{n}"),
                &s.report,
                -2.0 / scale,
                settings.tol(tolerances::MODEL_ANCHOR),
            );
            Ok(JobResult::plain(outcome))
        }
        Job::Euclidean => {
            let spec = DomainSpec::model(ModelKind::Euclidean, 1.0, 2)?;
            let model = KernelModel::model(ModelKind::Euclidean, 1.0, 2)?;
            let pts = spec.sample_interior(10, SUITE_SEED, 0.5)?;
            let s = verdict("Euclidean", &model, &pts, 8, settings)?;
            let outcome = anchor("euclidean_anchor", &s.report, 0.0, settings.tol(tolerances::EUCLIDEAN_ANCHOR));
            Ok(JobResult::plain(outcome))
        }
        Job::Ball(n) => {
            let spec = DomainSpec::ball(n)?;
            let model = KernelModel::ball(n)?;
            let pts = spec.sample_interior(20, SUITE_SEED, 0.2)?;
            let s = verdict(format!("Ball({n})"), &model, &pts, 16, settings)?;
            let tol = settings.tol(tolerances::CONSTANCY);
            let value = -2.0 / (n as f64 + 1.0);
            let mid = 0.5 * (s.report.global_min + s.report.global_max);
            let outcome = CheckOutcome::new(
                format!("ball_constancy_n{n}"),
                vec![
                    Detail::new("HSC spread", s.report.max_deviation, 0.0, tol, Relation::AtMost),
                    Detail::near("HSC value", mid, value, tol),
                ],
            );
            Ok(JobResult {
                outcome,
                bergman: vec![s],
            })
        }
        Job::HartogsSweep => {
            let mut bergman = Vec::new();
            let mut details = Vec::new();
            for (label, model, n) in [
                ("HartogsGauss(1)", KernelModel::hartogs_gauss(1)?, 1),
                ("HartogsGauss(1) series", KernelModel::hartogs_gauss_series(1, None)?, 1),
                ("HartogsGauss(2)", KernelModel::hartogs_gauss(2)?, 2),
            ] {
                let pts = DomainSpec::hartogs_gauss(n)?.sample_interior(20, SUITE_SEED, 0.2)?;
                let s = verdict(label, &model, &pts, 16, settings)?;
                details.push(Detail::new(
                    format!("{label} spread"),
                    s.report.max_deviation,
                    settings.tol(tolerances::CONSTANCY),
                    0.0,
                    Relation::AtLeast,
                ));
                bergman.push(s);
            }
            Ok(JobResult {
                outcome: CheckOutcome::new("hartogs_not_constant", details),
                bergman,
            })
        }
    }
}

fn bergman_bound(samples: &[Sampled], settings: &Settings) -> CheckOutcome {
    let tol = settings.tol(tolerances::BERGMAN_BOUND);
    let mut details: Vec<Detail> = samples
        .iter()
        .map(|s| Detail::new(format!("{} max HSC", s.label), s.report.global_max, 2.0, tol, Relation::AtMost))
        .collect();
    let worst = samples.iter().map(|s| s.report.global_max).fold(f64::NEG_INFINITY, f64::max);
    details.insert(0, Detail::new("max sampled HSC", worst, 2.0, tol, Relation::AtMost));
    CheckOutcome::new("bergman_bound", details)
}

/// Runs every check; checks run concurrently, the report order is fixed.
pub fn run_paper_suite(settings: &Settings) -> Result<SuiteReport> {
    settings.validate()?;
    let jobs = [
        Job::Pipeline(2.2),
        Job::Pipeline(2.5),
        Job::Pipeline(2.8),
        Job::FlatSlice(1),
        Job::FlatSlice(2),
        Job::Gaussian(1),
        Job::Gaussian(2),
        Job::Laplacian(1),
        Job::Laplacian(2),
        Job::Binomial,
        Job::HartogsMoments,
        Job::HartogsKernel,
        Job::FubiniStudy,
        Job::Hyperbolic(1),
        Job::Hyperbolic(2),
        Job::Hyperbolic(3),
        Job::Euclidean,
        Job::Ball(1),
        Job::Ball(2),
        Job::HartogsSweep,
    ];
    let results: Vec<JobResult> = jobs.par_iter().map(|j| run_job(j, settings)).collect::<Result<_>>()?;
    let mut outcomes = Vec::with_capacity(results.len() + 1);
    let mut samples = Vec::new();
    for r in results {
        outcomes.push(r.outcome);
        samples.extend(r.bergman);
    }
    outcomes.push(bergman_bound(&samples, settings));
    Ok(SuiteReport {
        suite: "paper".into(),
        tol_profile: format!("{:?}", settings.tol_profile).to_lowercase(),
        passed: outcomes.iter().all(|o| o.passed),
        outcomes,
    })
}

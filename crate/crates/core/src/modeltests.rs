//! Verification procedures specific to the sliver domain, the Gaussian
//! Hartogs domain and the Gaussian moment problem.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::domains::{DomainSpec, Point};
use crate::error::{Error, Result};
use crate::geometry::{curvature_from_sample, kernel_curvature_verdict, metric_at, CurvatureReport};
use crate::kernel::KernelModel;
use crate::moments::{gaussian_moment, gaussian_moment_quadrature, MomentTable, MultiIndex, Verdict};
use crate::numdiff::{laplacian, scaled_step, FnPotential};
use crate::settings::{tolerances, Settings};

/// How a measurement is compared with its expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|measured − expected| ≤ tol`
    Near,
    /// `measured ≤ expected + tol`
    AtMost,
    /// `measured ≥ expected − tol`
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detail {
    pub label: String,
    pub measured: f64,
    pub expected: f64,
    pub tol: f64,
    pub relation: Relation,
}

impl Detail {
    pub fn new(label: impl Into<String>, measured: f64, expected: f64, tol: f64, relation: Relation) -> Self {
        Detail {
            label: label.into(),
            measured,
            expected,
            tol,
            relation,
        }
    }

    pub fn near(label: impl Into<String>, measured: f64, expected: f64, tol: f64) -> Self {
        Self::new(label, measured, expected, tol, Relation::Near)
    }

    /// NaN never passes.
    pub fn holds(&self) -> bool {
        match self.relation {
            Relation::Near => (self.measured - self.expected).abs() <= self.tol,
            Relation::AtMost => self.measured <= self.expected + self.tol,
            Relation::AtLeast => self.measured >= self.expected - self.tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Headline figures: the first failing detail, else the first detail.
    pub measured: f64,
    pub expected: f64,
    pub tol: f64,
    pub details: Vec<Detail>,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, details: Vec<Detail>) -> Self {
        let passed = !details.is_empty() && details.iter().all(Detail::holds);
        let head = details.iter().find(|d| !d.holds()).or(details.first());
        let (measured, expected, tol) = head.map_or((f64::NAN, f64::NAN, f64::NAN), |d| (d.measured, d.expected, d.tol));
        CheckOutcome {
            name: name.into(),
            passed,
            measured,
            expected,
            tol,
            details,
        }
    }

    /// Collapses many details into their worst `Near` deviation, keeping
    /// every detail.
    fn worst_of(name: impl Into<String>, label: &str, details: Vec<Detail>, expected: f64, tol: f64) -> Self {
        let worst = details
            .iter()
            .map(|d| (d.measured - d.expected).abs())
            .fold(0.0, f64::max);
        let mut all = vec![Detail::new(label, worst, 0.0, tol, Relation::AtMost)];
        all.extend(details);
        let mut out = Self::new(name, all);
        if out.passed {
            out.expected = expected;
        }
        out
    }
}

/// `λ(λ−1)…(λ−k+1)/k!`, numerator first.
pub fn binomial_coefficient(lambda: f64, k: usize) -> f64 {
    let mut num = 1.0;
    for i in 0..k {
        num *= lambda - i as f64;
    }
    let mut den = 1.0;
    for i in 2..=k {
        den *= i as f64;
    }
    num / den
}

/// Smallest `k ≤ k_max` whose coefficient in `(1 + x)^λ` is negative,
/// with that coefficient.
pub fn binomial_sign_test(lambda: f64, k_max: usize) -> Result<Option<(usize, f64)>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Input(format!("lambda must be positive, got {lambda}")));
    }
    if (k_max as f64) < lambda.ceil() + 1.0 {
        return Err(Error::Input(format!("k_max {k_max} must be at least ⌈λ⌉ + 1 for λ = {lambda}")));
    }
    Ok((1..=k_max)
        .map(|k| (k, binomial_coefficient(lambda, k)))
        .find(|&(_, c)| c < 0.0))
}

/// Runs the sign test over a grid of exponents; integers must report no
/// negative coefficient and the rest must report `k = ⌊λ⌋ + 2`.
pub fn binomial_grid_check(lambdas: &[f64]) -> Result<CheckOutcome> {
    let mut details = Vec::new();
    for &lambda in lambdas {
        let k_max = lambda.ceil() as usize + 3;
        let integer = lambda.fract() == 0.0;
        match binomial_sign_test(lambda, k_max)? {
            None => details.push(Detail::near(format!("λ={lambda} integer"), 1.0, f64::from(u8::from(integer)), 0.0)),
            Some((k, c)) => {
                details.push(Detail::near(format!("λ={lambda} integer"), 0.0, f64::from(u8::from(integer)), 0.0));
                details.push(Detail::near(format!("λ={lambda} first k"), k as f64, lambda.floor() + 2.0, 0.0));
                details.push(Detail::near(
                    format!("λ={lambda} coefficient"),
                    c,
                    binomial_coefficient(lambda, k),
                    0.0,
                ));
            }
        }
    }
    Ok(CheckOutcome::new("binomial_sign_grid", details))
}

fn slice_deviations(model: &KernelModel, point: &[Complex64], n: usize, settings: &Settings) -> Result<[f64; 3]> {
    let m = metric_at(model, point, settings)?;
    let r = curvature_from_sample(&m)?;
    let mixed = (0..n)
        .map(|j| m.g[(n, j)].norm().max(m.g[(j, n)].norm()))
        .fold(0.0, f64::max);
    let mut tangent: f64 = 0.0;
    let mut curv: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            tangent = tangent.max((m.g[(i, j)] - delta).norm());
            for k in 0..n {
                for l in 0..n {
                    curv = curv.max(r.get(i, j, k, l).norm());
                }
            }
        }
    }
    Ok([mixed, tangent, curv])
}

/// The slice `w = 0` of the Gaussian Hartogs domain is totally geodesic and
/// flat. An off-slice control at `|w|² = 0.09 e^(−|z|²)` must deviate by at
/// least `SLICE_POWER_RATIO` times more.
pub fn flat_slice_check(n: usize, z_points: &[Vec<Complex64>], settings: &Settings) -> Result<CheckOutcome> {
    if z_points.is_empty() {
        return Err(Error::Input("flat slice check needs at least one point".into()));
    }
    let model = KernelModel::hartogs_gauss(n)?;
    let mut details = Vec::new();
    let mut on_slice: f64 = 0.0;
    let mut control: f64 = f64::INFINITY;
    for z in z_points {
        if z.len() != n {
            return Err(Error::Input(format!("slice point {z:?} must have {n} coordinates")));
        }
        let label = format!("{z:?}");
        let mut p = z.clone();
        p.push(Complex64::new(0.0, 0.0));
        let [mixed, tangent, curv] =
            slice_deviations(&model, &p, n, settings).map_err(|e| e.in_stage(format!("slice at {label}")))?;
        details.push(Detail::new(format!("mixed g at {label}"), mixed, 0.0, settings.tol(tolerances::SLICE_MIXED_METRIC), Relation::AtMost));
        details.push(Detail::new(format!("tangent g − I at {label}"), tangent, 0.0, settings.tol(tolerances::SLICE_TANGENT_METRIC), Relation::AtMost));
        details.push(Detail::new(format!("tangent R at {label}"), curv, 0.0, settings.tol(tolerances::SLICE_CURVATURE), Relation::AtMost));
        on_slice = on_slice.max(mixed).max(tangent).max(curv);

        let z2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        let mut q = z.clone();
        q.push(Complex64::new(0.3 * (-0.5 * z2).exp(), 0.0));
        let [cm, ct, cc] =
            slice_deviations(&model, &q, n, settings).map_err(|e| e.in_stage(format!("control at {label}")))?;
        control = control.min(cm.max(ct).max(cc));
    }
    let ratio = control / on_slice.max(f64::MIN_POSITIVE);
    let mut all = vec![Detail::new(
        "control / on-slice deviation",
        ratio,
        tolerances::SLICE_POWER_RATIO,
        0.0,
        Relation::AtLeast,
    )];
    all.extend(details);
    Ok(CheckOutcome::new(format!("flat_slice_n{n}"), all))
}

/// `∫ z^α z̄^β dμ = α! δ_{αβ}` for the normalised Gaussian on `Cⁿ`, for all
/// pairs of degree at most `max_degree`.
pub fn gaussian_uniqueness_check(n: usize, max_degree: u32, settings: &Settings) -> Result<CheckOutcome> {
    if max_degree < 2 {
        return Err(Error::Input("gaussian check needs max_degree ≥ 2".into()));
    }
    let indices = MultiIndex::up_to_degree(n, max_degree);
    let tol = settings.tol(tolerances::GAUSSIAN_MOMENT);
    let mut details = Vec::with_capacity(indices.len() * indices.len());
    for a in &indices {
        for b in &indices {
            let est = gaussian_moment_quadrature(a, b, settings)?;
            let exact = gaussian_moment(a, b)?;
            let dev = (est.value - Complex64::new(exact, 0.0)).norm();
            details.push(Detail::near(format!("({a})·({b})"), exact + dev, exact, tol));
        }
    }
    Ok(CheckOutcome::worst_of(
        format!("gaussian_moments_n{n}"),
        "max |quadrature − α!δ|",
        details,
        0.0,
        tol,
    ))
}

/// Real Laplacians of `−|z|²` (must be `−4n`) and of `2 log|exp(Σ z_j)|`
/// (harmonic). Their disagreement is the contradiction `0 ≠ −4n`.
pub fn laplacian_contradiction_check(n: usize, points: &[Vec<Complex64>], settings: &Settings) -> Result<CheckOutcome> {
    if points.is_empty() {
        return Err(Error::Input("laplacian check needs at least one point".into()));
    }
    let tol = settings.tol(tolerances::LAPLACIAN);
    let u1 = FnPotential::new(n, |z: &[Complex64]| -z.iter().map(|c| c.norm_sqr()).sum::<f64>());
    let u2 = FnPotential::new(n, |z: &[Complex64]| 2.0 * z.iter().sum::<Complex64>().exp().norm().ln());
    let target = -4.0 * n as f64;
    let mut details = Vec::new();
    let mut gap = f64::INFINITY;
    for p in points {
        if p.len() != n {
            return Err(Error::Input(format!("laplacian point {p:?} must have {n} coordinates")));
        }
        let h = scaled_step(settings.fd_step, p);
        let a = laplacian(&u1, p, h)?;
        let b = laplacian(&u2, p, h)?;
        details.push(Detail::near(format!("Δ(−|z|²) at {p:?}"), a, target, tol));
        details.push(Detail::near(format!("Δ(2log|f|) at {p:?}"), b, 0.0, tol));
        gap = gap.min((a - b).abs());
    }
    let mut all = vec![Detail::near("Δ(2log|f|) − Δ(−|z|²)", gap, 4.0 * n as f64, n as f64 * 4.0 * tol)];
    all.extend(details);
    Ok(CheckOutcome::new(format!("laplacian_contradiction_n{n}"), all))
}

/// Everything the sliver pipeline produced, for reuse by later checks.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub outcome: CheckOutcome,
    pub table: MomentTable,
    pub kernel: KernelModel,
    pub report: CurvatureReport,
    pub perturbed: Vec<CurvatureReport>,
    pub points: Vec<Point>,
}

pub const PIPELINE_POINTS: usize = 20;
pub const PIPELINE_DIRECTIONS: usize = 16;
pub const PIPELINE_MARGIN: f64 = 0.1;

fn sliver_coefficients(kernel: &KernelModel) -> Result<(f64, f64)> {
    let terms = kernel
        .series_terms()
        .ok_or_else(|| Error::Numerics("sliver kernel is not a series".into()))?;
    let coeff = |e: &[u32]| {
        terms
            .iter()
            .find(|(idx, _)| idx.entries() == e)
            .map(|(_, c)| *c)
            .ok_or_else(|| Error::Numerics(format!("sliver kernel lacks the monomial {e:?}")))
    };
    let c0 = coeff(&[0, 0])?;
    Ok((c0, coeff(&[1, 0])? / c0))
}

/// Moments through degree 4, kernel assembly and the curvature verdict for
/// the sliver domain `D(alpha)`.
pub fn dalpha_pipeline(alpha: f64, seed: u64, settings: &Settings) -> Result<PipelineRun> {
    let spec = DomainSpec::dalpha(alpha)?;
    let table = MomentTable::build(&spec, 4, settings).map_err(|e| e.in_stage("moments"))?;
    let expected_basis = [vec![0, 0], vec![1, 0], vec![0, 1]];
    let convergent: Vec<Vec<u32>> = table.convergent().map(|(idx, _)| idx.entries().to_vec()).collect();
    let basis_ok = convergent.len() == 3 && expected_basis.iter().all(|e| convergent.contains(e));
    let mut details = vec![
        Detail::near("convergent indices", convergent.len() as f64, 3.0, 0.0),
        Detail::near("basis is {1, z, w}", f64::from(u8::from(basis_ok)), 1.0, 0.0),
    ];
    let divergent_high = table
        .entries
        .iter()
        .filter(|(idx, r)| idx.degree() >= 2 && r.verdict != Verdict::Divergent)
        .count();
    details.push(Detail::near("non-divergent indices of degree ≥ 2", divergent_high as f64, 0.0, 0.0));

    let moment = |e: [u32; 2]| {
        table
            .get(&MultiIndex::new(e.to_vec()))
            .and_then(|r| Some((r.value?, r.abs_error?)))
            .ok_or_else(|| Error::Numerics(format!("moment {e:?} missing")).in_stage("moments"))
    };
    let (m10, e10) = moment([1, 0])?;
    let (m01, e01) = moment([0, 1])?;
    details.push(Detail::new("M(1,0)", m10, 2.0 * PI * PI / (alpha - 2.0), 0.0, Relation::AtMost));
    details.push(Detail::near("M(1,0) − M(0,1)", m10 - m01, 0.0, e10 + e01));

    let kernel = KernelModel::assemble_series(&table, settings.truncation).map_err(|e| e.in_stage("kernel"))?;
    let points = spec
        .sample_interior(PIPELINE_POINTS, seed, PIPELINE_MARGIN)
        .map_err(|e| e.in_stage("sampling"))?;
    let tol = settings.tol(tolerances::CONSTANCY);
    let report = kernel_curvature_verdict(&kernel, &points, PIPELINE_DIRECTIONS, seed, tol, settings)
        .map_err(|e| e.in_stage("curvature"))?;
    details.insert(0, Detail::new("HSC spread", report.max_deviation, 0.0, tol, Relation::AtMost));
    let mid = 0.5 * (report.global_min + report.global_max);
    details.insert(1, Detail::near("HSC value", mid, 2.0, tol));

    let (c0, c1) = sliver_coefficients(&kernel).map_err(|e| e.in_stage("kernel"))?;
    let mut perturbed = Vec::new();
    for (f0, f1) in [(0.9, 0.9), (0.9, 1.1), (1.1, 0.9), (1.1, 1.1)] {
        let k = KernelModel::dalpha_affine(c0 * f0, c1 * f1)?;
        let r = kernel_curvature_verdict(&k, &points, PIPELINE_DIRECTIONS, seed, tol, settings)
            .map_err(|e| e.in_stage("perturbation"))?;
        let mid = 0.5 * (r.global_min + r.global_max);
        details.push(Detail::new(format!("perturbed ({f0}, {f1}) spread"), r.max_deviation, 0.0, tol, Relation::AtMost));
        details.push(Detail::near(format!("perturbed ({f0}, {f1}) value"), mid, 2.0, tol));
        perturbed.push(r);
    }
    Ok(PipelineRun {
        outcome: CheckOutcome::new(format!("dalpha_{alpha}"), details),
        table,
        kernel,
        report,
        perturbed,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial_sign_test(3.0, 5).unwrap(), None);
        assert_eq!(binomial_sign_test(2.5, 6).unwrap(), Some((4, -0.0390625)));
        assert_eq!(binomial_sign_test(0.5, 3).unwrap(), Some((2, -0.125)));
        assert!(binomial_sign_test(2.5, 3).is_err());
        assert!(binomial_sign_test(0.0, 3).is_err());
    }

    #[test]
    fn binomial_grid_passes() {
        let grid: Vec<f64> = (1..=10).map(|k| 0.5 * f64::from(k)).collect();
        let out = binomial_grid_check(&grid).unwrap();
        assert!(out.passed, "{out:?}");
    }

    #[test]
    fn outcome_is_function_of_details() {
        let ok = Detail::near("a", 1.0, 1.0 + 1e-9, 1e-8);
        let bad = Detail::new("b", 5.0, 1.0, 0.5, Relation::AtMost);
        let out = CheckOutcome::new("x", vec![ok.clone(), bad.clone()]);
        assert!(!out.passed);
        assert_eq!(out.measured, 5.0);
        assert!(CheckOutcome::new("y", vec![ok]).passed);
        assert!(!CheckOutcome::new("z", vec![]).passed);
        assert!(!Detail::near("nan", f64::NAN, 0.0, 1.0).holds());
        assert!(Detail::new("c", 3.0, 1.0, 0.0, Relation::AtLeast).holds());
    }

    #[test]
    fn laplacian_examples() {
        let s = Settings::default();
        let out = laplacian_contradiction_check(1, &[vec![Complex64::new(1.0, 1.0)]], &s).unwrap();
        assert!(out.passed, "{out:?}");
        assert!((out.details[1].measured + 4.0).abs() < 1e-6);
        let out = laplacian_contradiction_check(2, &[vec![Complex64::new(0.3, -0.1), Complex64::new(-0.7, 0.2)]], &s).unwrap();
        assert!(out.passed, "{out:?}");
    }

    #[test]
    fn gaussian_examples() {
        let s = Settings::default();
        let out = gaussian_uniqueness_check(1, 3, &s).unwrap();
        assert!(out.passed);
        assert_eq!(out.details.len(), 17);
        assert!(gaussian_uniqueness_check(1, 1, &s).is_err());
    }
}

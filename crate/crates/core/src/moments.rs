//! L² norms of monomials over the model domains.
//!
//! Reinhardt domains reduce to their shadow in `x = |z|²`, `y = |w|²`, with
//! `dv = π² dx dy` in C². The sliver domain is integrated over its true
//! (clipped) shadow: an 8-point Gauss–Legendre rule across the strip, adaptive
//! Gauss–Kronrod along it, and an analytic tail with an explicit error bound.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::{clip_threshold, shadow_strip, DomainSpec};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive, Rule};
use crate::rng;
use crate::settings::Settings;

/// Bisection tolerance for strip boundaries inside quadrature: run to
/// floating-point resolution.
const STRIP_TOL: f64 = 1e-300;
const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    entries: Vec<u32>,
    degree: u32,
}

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        let degree = entries.iter().sum();
        Self { entries, degree }
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn arity(&self) -> usize {
        self.entries.len()
    }

    pub fn factorial(&self) -> f64 {
        self.entries.iter().map(|&a| factorial(a)).product()
    }

    /// All indices of the given arity with degree at most `max_degree`.
    pub fn up_to_degree(arity: usize, max_degree: u32) -> Vec<MultiIndex> {
        fn rec(prefix: &mut Vec<u32>, left: usize, budget: u32, out: &mut Vec<MultiIndex>) {
            if left == 0 {
                out.push(MultiIndex::new(prefix.clone()));
                return;
            }
            for a in 0..=budget {
                prefix.push(a);
                rec(prefix, left - 1, budget - a, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), arity, max_degree, &mut out);
        out.sort();
        out
    }

    /// `∏ |z_j|^(2 a_j)` from the moduli squared.
    pub fn eval_moduli(&self, s: &[f64]) -> f64 {
        self.entries
            .iter()
            .zip(s)
            .map(|(&a, &x)| x.powi(a as i32))
            .product()
    }
}

impl From<&[u32]> for MultiIndex {
    fn from(e: &[u32]) -> Self {
        MultiIndex::new(e.to_vec())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| other.entries.cmp(&self.entries))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|a| a.to_string()).collect();
        f.write_str(&parts.join(":"))
    }
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Convergent,
    Divergent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentResult {
    pub value: Option<f64>,
    pub abs_error: Option<f64>,
    pub verdict: Verdict,
    /// Growth exponent of the partial integrals, when measured.
    pub evidence: Option<f64>,
}

impl MomentResult {
    pub fn exact(value: f64) -> Self {
        Self {
            value: Some(value),
            abs_error: Some(0.0),
            verdict: Verdict::Convergent,
            evidence: None,
        }
    }

    pub fn divergent(evidence: Option<f64>) -> Self {
        Self {
            value: None,
            abs_error: None,
            verdict: Verdict::Divergent,
            evidence,
        }
    }
}

/// Exact moments where a closed form exists. `Ok(None)` for the sliver domain.
pub fn moment_closed_form(spec: &DomainSpec, idx: &MultiIndex) -> Result<Option<MomentResult>> {
    match *spec {
        DomainSpec::HartogsGauss { n } => {
            spec.check_arity(idx.arity())?;
            let (alpha, q) = idx.entries().split_at(n);
            let alpha = MultiIndex::from(alpha);
            let q = f64::from(q[0]);
            let exponent = alpha.degree() as i32 + n as i32 + 1;
            let value = PI.powi(n as i32 + 1) * alpha.factorial() / (q + 1.0).powi(exponent);
            Ok(Some(MomentResult::exact(value)))
        }
        DomainSpec::Ball { n } => {
            spec.check_arity(idx.arity())?;
            let value = PI.powi(n as i32) * idx.factorial() / factorial(n as u32 + idx.degree());
            Ok(Some(MomentResult::exact(value)))
        }
        DomainSpec::DAlpha { .. } => Ok(None),
        DomainSpec::ModelPotential { .. } => Err(Error::Input(format!(
            "{spec} is a metric model without a volume"
        ))),
    }
}

fn pair(spec: &DomainSpec, idx: &MultiIndex) -> Result<(u32, u32)> {
    spec.check_arity(idx.arity())?;
    Ok((idx.entries()[0], idx.entries()[1]))
}

/// `t^p ∫ (t+u)^q du` across the sliver strip at `x = t`.
fn sliver_integrand(alpha: f64, p: u32, q: u32, t: f64, rule: &Rule) -> f64 {
    let strip = shadow_strip(alpha, t, STRIP_TOL).expect("t >= 0 inside quadrature");
    let inner = rule.integrate(strip.u_minus, strip.u_plus, |u| (t + u).max(0.0).powi(q as i32));
    t.powi(p as i32) * inner
}

/// Convergence of `∫ |z^p w^q|²` over the sliver domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    /// Measured growth exponent `log10(ΔI[10³,10⁴] / ΔI[10²,10³])`.
    pub slope: f64,
    /// Asymptotic exponent `p + q + 1 − alpha`.
    pub expected_slope: f64,
}

const SLOPE_AGREEMENT: f64 = 0.05;

pub fn classify_convergence(spec: &DomainSpec, idx: &MultiIndex) -> Result<Classification> {
    let DomainSpec::DAlpha { alpha } = *spec else {
        return Err(Error::Input(format!("{spec}: classification applies to the sliver domain")));
    };
    let (p, q) = pair(spec, idx)?;
    let k = f64::from(p + q);
    let verdict = if k < alpha - 1.0 {
        Verdict::Convergent
    } else {
        Verdict::Divergent
    };

    let rule = Rule::gauss_legendre(8);
    let f = |t: f64| sliver_integrand(alpha, p, q, t, &rule);
    let lower = adaptive(f, &[1e2, 1e3], 0.0, 1e-10, MAX_PANELS)?.value;
    let upper = adaptive(f, &[1e3, 1e4], 0.0, 1e-10, MAX_PANELS)?.value;
    let slope = (upper / lower).log10();
    let expected_slope = k + 1.0 - alpha;
    if !((slope - expected_slope).abs() <= SLOPE_AGREEMENT) {
        return Err(Error::Consistency {
            index: idx.to_string(),
            detail: format!("measured growth exponent {slope}, analytic {expected_slope}"),
        });
    }
    Ok(Classification {
        verdict,
        slope,
        expected_slope,
    })
}

/// `∫_T^∞ t^k (1 + 2t)^(−alpha) dt`, valid for `k < alpha − 1`.
fn power_tail(k: u32, alpha: f64, big_t: f64) -> f64 {
    // t = (s − 1)/2 expanded binomially
    let s = 1.0 + 2.0 * big_t;
    let mut total = 0.0;
    let mut binom = 1.0;
    for j in 0..=k {
        if j > 0 {
            binom *= f64::from(k - j + 1) / f64::from(j);
        }
        let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
        let e = f64::from(j) + 1.0 - alpha;
        total += sign * binom * s.powf(e) / (alpha - f64::from(j) - 1.0);
    }
    total / 2f64.powi(k as i32 + 1)
}

/// Tail correction `∫_T^∞ 2 t^(p+q) (1+2t)^(−alpha) dt` and a bound on its
/// distance to the true tail of the strip integrand.
fn sliver_tail(alpha: f64, p: u32, q: u32, big_t: f64) -> (f64, f64) {
    let correction = 2.0 * power_tail(p + q, alpha, big_t);
    let s = 1.0 + 2.0 * big_t;
    let b0 = (1.0 + big_t).powf(-alpha);
    // |width − 2(1+2t)^(−alpha)| ≤ (1+2t)^(−alpha) · eps(T) for t ≥ T
    let eps = (1.0 - b0 / s).powf(-alpha) - 1.0;
    let mut bound = eps * correction;
    if q == 1 {
        let e = f64::from(p) + 1.0 - 2.0 * alpha;
        bound += 0.5 * (1.0 + big_t).powf(e) / (-e);
    }
    (correction, bound)
}

/// Quadrature moment `∫ |z^p w^q|²` over the sliver domain or over the
/// one-dimensional Gaussian Hartogs domain.
pub fn moment_quadrature(spec: &DomainSpec, idx: &MultiIndex, settings: &Settings) -> Result<MomentResult> {
    settings.validate()?;
    match *spec {
        DomainSpec::DAlpha { alpha } => {
            let class = classify_convergence(spec, idx)?;
            if class.verdict == Verdict::Divergent {
                return Err(Error::Divergent {
                    spec: spec.to_string(),
                    index: idx.to_string(),
                });
            }
            let (p, q) = pair(spec, idx)?;
            debug_assert!(p + q <= 1);
            let rel = settings.quad_tol;
            let mut big_t = 16.0;
            let (mut correction, mut bound) = sliver_tail(alpha, p, q, big_t);
            while bound > 0.1 * rel * correction && big_t < 1e4 {
                big_t = (2.0 * big_t).min(1e4);
                (correction, bound) = sliver_tail(alpha, p, q, big_t);
            }
            let rule = Rule::gauss_legendre(8);
            let t_clip = clip_threshold(alpha);
            let est = adaptive(
                |t| sliver_integrand(alpha, p, q, t, &rule),
                &[0.0, t_clip, big_t],
                0.0,
                0.5 * rel,
                MAX_PANELS,
            )?;
            Ok(MomentResult {
                value: Some(PI * PI * (est.value + correction)),
                abs_error: Some(PI * PI * (est.abs_error + bound)),
                verdict: Verdict::Convergent,
                evidence: Some(class.slope),
            })
        }
        DomainSpec::HartogsGauss { n: 1 } => {
            let (a, q) = pair(spec, idx)?;
            let rule = Rule::gauss_legendre(8);
            let f = |t: f64| t.powi(a as i32) * rule.integrate(0.0, (-t).exp(), |y| y.powi(q as i32));
            let b = f64::from(q) + 1.0;
            let mut big_t = (2.0 * f64::from(a) / b).max(8.0);
            loop {
                let est = adaptive(f, &[0.0, big_t], 0.0, 0.5 * settings.quad_tol, MAX_PANELS)?;
                // ∫_T^∞ t^a e^(−bt)/b dt ≤ T^a e^(−bT) / (b (b − a/T))
                let tail = big_t.powi(a as i32) * (-b * big_t).exp() / (b * (b - f64::from(a) / big_t));
                if tail <= 0.1 * settings.quad_tol * est.value {
                    return Ok(MomentResult {
                        value: Some(PI * PI * (est.value + 0.5 * tail)),
                        abs_error: Some(PI * PI * (est.abs_error + 0.5 * tail)),
                        verdict: Verdict::Convergent,
                        evidence: None,
                    });
                }
                big_t *= 2.0;
            }
        }
        _ => Err(Error::Input(format!(
            "moment quadrature is implemented for the sliver domain and HartogsGauss(1), not {spec}"
        ))),
    }
}

/// Moments of every multi-index up to a degree, under one settings snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub domain: DomainSpec,
    pub entries: BTreeMap<MultiIndex, MomentResult>,
    pub settings: Settings,
}

impl MomentTable {
    pub fn build(domain: &DomainSpec, max_degree: u32, settings: &Settings) -> Result<Self> {
        settings.validate()?;
        let indices = MultiIndex::up_to_degree(domain.dimension(), max_degree);
        let results: Result<Vec<(MultiIndex, MomentResult)>> = indices
            .into_par_iter()
            .map(|idx| {
                let res = match domain {
                    DomainSpec::DAlpha { .. } => {
                        let class = classify_convergence(domain, &idx)?;
                        match class.verdict {
                            Verdict::Divergent => MomentResult::divergent(Some(class.slope)),
                            Verdict::Convergent => moment_quadrature(domain, &idx, settings)?,
                        }
                    }
                    _ => moment_closed_form(domain, &idx)?.expect("closed form exists"),
                };
                Ok((idx, res))
            })
            .collect();
        Ok(Self {
            domain: domain.clone(),
            entries: results?.into_iter().collect(),
            settings: settings.clone(),
        })
    }

    pub fn get(&self, idx: &MultiIndex) -> Option<&MomentResult> {
        self.entries.get(idx)
    }

    pub fn convergent(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.entries
            .iter()
            .filter_map(|(k, v)| v.value.map(|val| (k, val)))
    }

    pub fn max_degree(&self) -> u32 {
        self.entries.keys().map(|k| k.degree()).max().unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("indices,value,abs_error,verdict,evidence\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        for (idx, r) in &self.entries {
            out.push_str(&format!(
                "{},{},{},{:?},{}\n",
                idx,
                opt(r.value),
                opt(r.abs_error),
                r.verdict,
                opt(r.evidence)
            ));
        }
        out
    }
}

/// `∫ z^alpha z̄^beta dμ` for `dμ = π^(−n) e^(−|z|²) dv`: `alpha! δ`.
pub fn gaussian_moment(alpha: &MultiIndex, beta: &MultiIndex) -> Result<f64> {
    if alpha.arity() != beta.arity() {
        return Err(Error::Input("gaussian moment indices differ in arity".into()));
    }
    Ok(if alpha == beta { alpha.factorial() } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEstimate {
    pub value: Complex64,
    pub abs_error: f64,
}

/// The Gaussian moment by quadrature: Gauss–Laguerre in `r²`, trapezoid in
/// the angle (exact for trigonometric polynomials of low degree).
pub fn gaussian_moment_quadrature(
    alpha: &MultiIndex,
    beta: &MultiIndex,
    settings: &Settings,
) -> Result<ComplexEstimate> {
    if alpha.arity() != beta.arity() {
        return Err(Error::Input("gaussian moment indices differ in arity".into()));
    }
    settings.validate()?;
    let fine = Rule::gauss_laguerre(32);
    let coarse = Rule::gauss_laguerre(16);
    const ANGLES: usize = 64;
    let radial = |rule: &Rule, k: f64| -> f64 {
        // π^(−1) ∫ r^(k+1) e^(−r²) dr dθ-part is handled separately; here
        // ∫_0^∞ r^(k+1) e^(−r²) dr = ½ ∫_0^∞ s^(k/2) e^(−s) ds
        0.5 * rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(s, w)| w * s.powf(0.5 * k))
            .sum::<f64>()
    };
    let mut value = Complex64::new(1.0, 0.0);
    let mut coarse_value = Complex64::new(1.0, 0.0);
    for (&a, &b) in alpha.entries().iter().zip(beta.entries()) {
        let k = f64::from(a + b);
        let d = f64::from(a) - f64::from(b);
        let angular: Complex64 = (0..ANGLES)
            .map(|j| Complex64::from_polar(1.0, d * std::f64::consts::TAU * j as f64 / ANGLES as f64))
            .sum::<Complex64>()
            * (std::f64::consts::TAU / ANGLES as f64);
        value *= angular * radial(&fine, k) / PI;
        coarse_value *= angular * radial(&coarse, k) / PI;
    }
    Ok(ComplexEstimate {
        value,
        abs_error: (value - coarse_value).norm(),
    })
}

/// Monte Carlo estimate of `|∫ z^alpha z̄^beta dv|`, normalised by the
/// geometric mean of the two diagonal moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalityResidual {
    pub residual: f64,
    pub std_error: f64,
}

fn diagonal_moment(spec: &DomainSpec, idx: &MultiIndex) -> Result<f64> {
    match moment_closed_form(spec, idx)? {
        Some(r) => Ok(r.value.expect("closed forms converge")),
        None => moment_quadrature(spec, idx, &Settings::default())?
            .value
            .ok_or_else(|| Error::Numerics("convergent moment without value".into())),
    }
}

pub fn orthogonality_residual(
    spec: &DomainSpec,
    alpha: &MultiIndex,
    beta: &MultiIndex,
    samples: usize,
    seed: u64,
) -> Result<OrthogonalityResidual> {
    spec.check_arity(alpha.arity())?;
    spec.check_arity(beta.arity())?;
    if alpha == beta {
        return Err(Error::Input("orthogonality needs two distinct indices".into()));
    }
    if samples < 2 {
        return Err(Error::Input("need at least two samples".into()));
    }
    let norm = (diagonal_moment(spec, alpha)? * diagonal_moment(spec, beta)?).sqrt();
    let mut rng = rng::stream(seed, 0);
    let n = spec.dimension();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let (point, weight) = weighted_sample(spec, &mut rng)?;
        let val = match point {
            Some(p) => {
                let mut v = Complex64::new(weight, 0.0);
                for j in 0..n {
                    v *= p[j].powu(alpha.entries()[j]) * p[j].conj().powu(beta.entries()[j]);
                }
                v
            }
            None => Complex64::new(0.0, 0.0),
        };
        sum += val;
        sum_sq += val.norm_sqr();
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = (sum_sq / m - mean.norm_sqr()).max(0.0) * m / (m - 1.0);
    Ok(OrthogonalityResidual {
        residual: mean.norm() / norm,
        std_error: (var / m).sqrt() / norm,
    })
}

/// One importance sample `(point or rejection, weight)` with `E[f·w] = ∫_D f dv`.
fn weighted_sample<R: Rng>(spec: &DomainSpec, rng: &mut R) -> Result<(Option<Vec<Complex64>>, f64)> {
    match *spec {
        DomainSpec::Ball { n } => {
            let dir = rng::unit_direction(rng, n);
            let r = rng.random::<f64>().powf(1.0 / (2.0 * n as f64));
            let vol = PI.powi(n as i32) / factorial(n as u32);
            Ok((Some(dir.into_iter().map(|c| c * r).collect()), vol))
        }
        DomainSpec::HartogsGauss { n } => {
            use rand_distr::StandardNormal;
            let sd = std::f64::consts::FRAC_1_SQRT_2;
            let mut p: Vec<Complex64> = (0..n)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re * sd, im * sd)
                })
                .collect();
            let z2: f64 = p.iter().map(|c| c.norm_sqr()).sum();
            let w2 = rng.random::<f64>() * (-z2).exp();
            p.push(rng::phase(rng) * w2.sqrt());
            Ok((Some(p), PI.powi(n as i32 + 1)))
        }
        DomainSpec::DAlpha { alpha } => {
            // t ~ (beta−1)(1+t)^(−beta) with beta = alpha − 1 keeps the
            // variance of degree-one integrands finite
            let beta = alpha - 1.0;
            let t = (1.0 - rng.random::<f64>()).powf(-1.0 / (beta - 1.0)) - 1.0;
            let half = (1.0 + t).powf(-alpha);
            let u = half * (2.0 * rng.random::<f64>() - 1.0);
            let y = t + u;
            let density = (beta - 1.0) * (1.0 + t).powf(-beta);
            let weight = PI * PI * 2.0 * half / density;
            if y < 0.0 || u.abs() >= (1.0 + t + y).powf(-alpha) {
                return Ok((None, weight));
            }
            let p = vec![rng::phase(rng) * t.sqrt(), rng::phase(rng) * y.sqrt()];
            Ok((Some(p), weight))
        }
        DomainSpec::ModelPotential { .. } => Err(Error::Input(format!("{spec} has no volume"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::from(e)
    }

    #[test]
    fn hartogs_closed_forms() {
        let h = DomainSpec::hartogs_gauss(1).unwrap();
        let v = moment_closed_form(&h, &mi(&[1, 2])).unwrap().unwrap().value.unwrap();
        assert!((v - PI * PI / 27.0).abs() < 1e-15);
        let v = moment_closed_form(&h, &mi(&[0, 0])).unwrap().unwrap().value.unwrap();
        assert!((v - PI * PI).abs() < 1e-15);
        assert!(moment_closed_form(&h, &mi(&[1])).is_err());
    }

    #[test]
    fn ball_closed_form_against_radial_oracle() {
        // ∫_0^1 r^(2k+1) 2π dr, integrated numerically
        let b = DomainSpec::ball(1).unwrap();
        let rule = Rule::gauss_legendre(20);
        for k in 0..6u32 {
            let oracle = rule.integrate(0.0, 1.0, |r| 2.0 * PI * r.powi(2 * k as i32 + 1));
            let v = moment_closed_form(&b, &mi(&[k])).unwrap().unwrap().value.unwrap();
            assert!((v - oracle).abs() < 1e-13, "{k}");
            assert!((v - PI / (k as f64 + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn sliver_has_no_closed_form() {
        let d = DomainSpec::dalpha(2.5).unwrap();
        assert!(moment_closed_form(&d, &mi(&[0, 0])).unwrap().is_none());
    }

    #[test]
    fn index_enumeration() {
        let all = MultiIndex::up_to_degree(2, 4);
        assert_eq!(all.len(), 15);
        assert_eq!(all[0], mi(&[0, 0]));
        assert_eq!(all[1], mi(&[1, 0]));
        assert_eq!(all[2], mi(&[0, 1]));
        assert_eq!(mi(&[2, 0, 1]).to_string(), "2:0:1");
        assert_eq!(mi(&[2, 0, 1]).degree(), 3);
    }

    #[test]
    fn classification_examples() {
        let d = DomainSpec::dalpha(2.5).unwrap();
        let c = classify_convergence(&d, &mi(&[0, 0])).unwrap();
        assert_eq!(c.verdict, Verdict::Convergent);
        assert_eq!(
            classify_convergence(&d, &mi(&[1, 0])).unwrap().verdict,
            Verdict::Convergent
        );
        let c = classify_convergence(&d, &mi(&[1, 1])).unwrap();
        assert_eq!(c.verdict, Verdict::Divergent);
        assert!(c.slope > 0.0);
    }

    #[test]
    fn power_tail_matches_quadrature() {
        for (k, alpha) in [(0u32, 2.5), (1, 2.5), (1, 2.2), (0, 2.9)] {
            let t0 = 20.0;
            let exact = power_tail(k, alpha, t0);
            // substitute t = t0 / v on (0, 1]
            let num = adaptive(
                |v: f64| {
                    let t = t0 / v;
                    t.powi(k as i32) * (1.0 + 2.0 * t).powf(-alpha) * t0 / (v * v)
                },
                &[1e-12, 1.0],
                0.0,
                1e-11,
                4000,
            );
            if let Ok(num) = num {
                let rel = (num.value - exact).abs() / exact;
                // the (0, 1e-12) sliver is missing for slowly decaying tails
                assert!(rel < 1e-2, "{k} {alpha} {rel}");
            }
            assert!(exact > 0.0);
        }
    }

    #[test]
    fn divergent_quadrature_is_refused() {
        let d = DomainSpec::dalpha(2.5).unwrap();
        let err = moment_quadrature(&d, &mi(&[2, 0]), &Settings::default()).unwrap_err();
        assert!(matches!(err, Error::Divergent { .. }));
    }

    #[test]
    fn gaussian_exact_values() {
        assert_eq!(gaussian_moment(&mi(&[2, 0]), &mi(&[2, 0])).unwrap(), 2.0);
        assert_eq!(gaussian_moment(&mi(&[1, 0]), &mi(&[0, 1])).unwrap(), 0.0);
        assert_eq!(gaussian_moment(&mi(&[0, 0, 0]), &mi(&[0, 0, 0])).unwrap(), 1.0);
        assert!(gaussian_moment(&mi(&[0]), &mi(&[0, 0])).is_err());
    }

    #[test]
    fn gaussian_quadrature_matches() {
        let s = Settings::default();
        let e = gaussian_moment_quadrature(&mi(&[1, 1]), &mi(&[1, 1]), &s).unwrap();
        assert!((e.value.re - 1.0).abs() < 1e-12 && e.value.im.abs() < 1e-12);
        let e = gaussian_moment_quadrature(&mi(&[3]), &mi(&[3]), &s).unwrap();
        assert!((e.value.re - 6.0).abs() < 1e-11);
        let e = gaussian_moment_quadrature(&mi(&[2, 0]), &mi(&[0, 2]), &s).unwrap();
        assert!(e.value.norm() < 1e-12);
    }

    #[test]
    fn orthogonality_examples() {
        let cases = [
            (DomainSpec::dalpha(2.5).unwrap(), mi(&[1, 0]), mi(&[0, 1])),
            (DomainSpec::hartogs_gauss(1).unwrap(), mi(&[0, 0]), mi(&[1, 0])),
            (DomainSpec::ball(2).unwrap(), mi(&[1, 0]), mi(&[0, 1])),
        ];
        for (spec, a, b) in cases {
            let r = orthogonality_residual(&spec, &a, &b, 200_000, 11).unwrap();
            assert!(r.residual < 3.0 * r.std_error, "{spec}: {r:?}");
            assert!(r.std_error < 0.05, "{spec}: {r:?}");
        }
    }

    #[test]
    fn orthogonality_sampler_reproduces_diagonal() {
        // the same sampler with alpha == beta integrand recovers the volume
        let spec = DomainSpec::hartogs_gauss(1).unwrap();
        let mut rng = rng::stream(5, 0);
        let m = 200_000;
        let mut acc = 0.0;
        for _ in 0..m {
            let (p, w) = weighted_sample(&spec, &mut rng).unwrap();
            if p.is_some() {
                acc += w;
            }
        }
        assert!((acc / m as f64 - PI * PI).abs() < 1e-9);
    }
}

//! Diagonal Bergman kernels `K(z, z̄)`: orthonormal-monomial series built from
//! a moment table, and closed forms for the model domains.
//!
//! Every kernel here is a function of the moduli squared `s_j = |z_j|²`, so it
//! is evaluated through [`Scalar`] and can run on floats or on jets.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domains::{DomainSpec, ModelKind};
use crate::error::{Error, Result};
use crate::jet::{moduli_jets, Jet, Scalar};
use crate::moments::{factorial, MomentTable, MultiIndex, Verdict};

/// Relative tail target for automatically truncated Hartogs series.
pub const HARTOGS_AUTO_REL_TAIL: f64 = 1e-12;
pub const HARTOGS_MAX_TRUNCATION: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KernelSource {
    /// `Σ |z^α|² / M(α)` over convergent indices of degree ≤ `truncation`.
    Series {
        terms: Vec<(MultiIndex, f64)>,
        truncation: usize,
    },
    Ball { n: usize },
    /// Gaussian Hartogs kernel summed in closed form.
    HartogsGauss { n: usize },
    /// Gaussian Hartogs kernel as a partial sum; `None` picks the truncation
    /// per point from the tail bound.
    HartogsGaussSeries { n: usize, truncation: Option<usize> },
    /// `c0 (1 + c1 |z|² + c1 |w|²)`
    DAlphaAffine { c0: f64, c1: f64 },
    Model { kind: ModelKind, scale: f64, n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    source: KernelSource,
    dimension: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub log_k: f64,
    /// Relative bound on the dropped series tail (0 for exact forms).
    pub tail_bound: f64,
}

impl KernelModel {
    pub fn assemble_series(table: &MomentTable, truncation: usize) -> Result<KernelModel> {
        if (table.max_degree() as usize) < truncation {
            return Err(Error::Input(format!(
                "moment table reaches degree {}, truncation {truncation} requested",
                table.max_degree()
            )));
        }
        let terms: Vec<(MultiIndex, f64)> = table
            .entries
            .iter()
            .filter(|(idx, r)| idx.degree() as usize <= truncation && r.verdict == Verdict::Convergent)
            .map(|(idx, r)| {
                let m = r.value.expect("convergent entries carry a value");
                (idx.clone(), 1.0 / m)
            })
            .collect();
        if terms.is_empty() {
            return Err(Error::EmptyKernel { truncation });
        }
        Ok(KernelModel {
            source: KernelSource::Series { terms, truncation },
            dimension: table.domain.dimension(),
        })
    }

    pub fn ball(n: usize) -> Result<KernelModel> {
        let d = DomainSpec::ball(n)?;
        Ok(Self::new(KernelSource::Ball { n }, d.dimension()))
    }

    pub fn hartogs_gauss(n: usize) -> Result<KernelModel> {
        let d = DomainSpec::hartogs_gauss(n)?;
        Ok(Self::new(KernelSource::HartogsGauss { n }, d.dimension()))
    }

    pub fn hartogs_gauss_series(n: usize, truncation: Option<usize>) -> Result<KernelModel> {
        let d = DomainSpec::hartogs_gauss(n)?;
        Ok(Self::new(
            KernelSource::HartogsGaussSeries { n, truncation },
            d.dimension(),
        ))
    }

    pub fn dalpha_affine(c0: f64, c1: f64) -> Result<KernelModel> {
        if !(c0 > 0.0 && c1 > 0.0) {
            return Err(Error::Input(format!("affine constants must be positive: {c0}, {c1}")));
        }
        Ok(Self::new(KernelSource::DAlphaAffine { c0, c1 }, 2))
    }

    /// The potential of a metric model (`FubiniStudy`, `Hyperbolic`, `Euclidean`).
    pub fn model(kind: ModelKind, scale: f64, n: usize) -> Result<KernelModel> {
        DomainSpec::model(kind, scale, n)?;
        Ok(Self::new(KernelSource::Model { kind, scale, n }, n))
    }

    /// Closed-form model for a domain spec; the sliver domain needs a table.
    pub fn closed_form_for(spec: &DomainSpec) -> Result<KernelModel> {
        match *spec {
            DomainSpec::Ball { n } => Self::ball(n),
            DomainSpec::HartogsGauss { n } => Self::hartogs_gauss(n),
            DomainSpec::ModelPotential { kind, scale, n } => Self::model(kind, scale, n),
            DomainSpec::DAlpha { .. } => Err(Error::Input(
                "the sliver kernel is assembled from its moment table".into(),
            )),
        }
    }

    fn new(source: KernelSource, dimension: usize) -> Self {
        Self { source, dimension }
    }

    pub fn source(&self) -> &KernelSource {
        &self.source
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn series_terms(&self) -> Option<&[(MultiIndex, f64)]> {
        match &self.source {
            KernelSource::Series { terms, .. } => Some(terms),
            _ => None,
        }
    }

    /// Hartogs auxiliary variable `u = e^(|z|²) |w|²`.
    fn hartogs_u(n: usize, s: &[f64]) -> f64 {
        s[..n].iter().sum::<f64>().exp() * s[n]
    }

    /// Checks arity and the evaluation domain.
    pub fn check_point(&self, point: &[Complex64]) -> Result<()> {
        if point.len() != self.dimension {
            return Err(Error::Input(format!(
                "kernel of dimension {} evaluated at {} coordinates",
                self.dimension,
                point.len()
            )));
        }
        let s: Vec<f64> = point.iter().map(|c| c.norm_sqr()).collect();
        self.check_moduli(&s)
    }

    fn check_moduli(&self, s: &[f64]) -> Result<()> {
        let total: f64 = s.iter().sum();
        match self.source {
            KernelSource::Ball { .. }
            | KernelSource::Model {
                kind: ModelKind::Hyperbolic,
                ..
            } if total >= 1.0 => Err(Error::Domain(format!("|z|² = {total} ≥ 1"))),
            KernelSource::HartogsGauss { n } | KernelSource::HartogsGaussSeries { n, .. } => {
                let u = Self::hartogs_u(n, s);
                if u >= 1.0 {
                    Err(Error::Domain(format!("e^(|z|²)|w|² = {u} ≥ 1")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Truncation used at moduli `s` (Hartogs series only).
    fn hartogs_truncation(&self, n: usize, s: &[f64]) -> usize {
        match self.source {
            KernelSource::HartogsGaussSeries {
                truncation: Some(t),
                ..
            } => t,
            _ => auto_truncation(n, Self::hartogs_u(n, s)),
        }
    }

    /// `log K` as a function of the moduli squared.
    pub fn log_kernel_moduli<S: Scalar>(&self, s: &[S]) -> S {
        let one = s[0].lift(1.0);
        let sum = |xs: &[S]| xs.iter().cloned().fold(one.lift(0.0), |a, b| a + b);
        match &self.source {
            KernelSource::Series { terms, .. } => {
                let mut k = one.lift(0.0);
                for (idx, c) in terms {
                    let mut mono = one.clone();
                    for (x, &a) in s.iter().zip(idx.entries()) {
                        if a > 0 {
                            mono = mono * x.powi(a);
                        }
                    }
                    k = k + mono.scale(*c);
                }
                k.ln()
            }
            KernelSource::Ball { n } => {
                let nf = *n as f64;
                let c = factorial(*n as u32).ln() - nf * PI.ln();
                (one.clone() - sum(s)).ln().scale(-(nf + 1.0)) + one.lift(c)
            }
            KernelSource::HartogsGauss { n } => {
                let (z, w) = s.split_at(*n);
                let z2 = sum(z);
                let u = z2.exp() * w[0].clone();
                let m = *n as u32 + 1;
                let num = eulerian(m)
                    .iter()
                    .rev()
                    .fold(one.lift(0.0), |acc, &e| acc * u.clone() + one.lift(e));
                let den = (one.clone() - u).ln().scale(-(f64::from(m) + 1.0));
                z2 + one.lift(-(f64::from(m)) * PI.ln()) + num.ln() + den
            }
            KernelSource::HartogsGaussSeries { n, .. } => {
                let base: Vec<f64> = s.iter().map(|x| x.base()).collect();
                let trunc = self.hartogs_truncation(*n, &base);
                let (z, w) = s.split_at(*n);
                let z2 = sum(z);
                let u = z2.exp() * w[0].clone();
                let m = *n as i32 + 1;
                let mut acc = one.lift(0.0);
                for p in (0..=trunc).rev() {
                    acc = acc * u.clone() + one.lift((p as f64 + 1.0).powi(m));
                }
                z2 + one.lift(-(m as f64) * PI.ln()) + acc.ln()
            }
            KernelSource::DAlphaAffine { c0, c1 } => {
                (one.clone() + sum(s).scale(*c1)).ln() + one.lift(c0.ln())
            }
            KernelSource::Model { kind, scale, .. } => match kind {
                ModelKind::FubiniStudy => (one.clone() + sum(s)).ln().scale(*scale),
                ModelKind::Hyperbolic => (one.clone() - sum(s)).ln().scale(-*scale),
                ModelKind::Euclidean => sum(s).scale(*scale),
            },
        }
    }

    pub fn eval_log_kernel(&self, point: &[Complex64]) -> Result<f64> {
        self.check_point(point)?;
        let s: Vec<f64> = point.iter().map(|c| c.norm_sqr()).collect();
        let log_k = self.log_kernel_moduli(&s);
        if !log_k.is_finite() {
            return Err(Error::Domain(format!("log K not finite at {point:?}")));
        }
        Ok(log_k)
    }

    pub fn eval(&self, point: &[Complex64]) -> Result<KernelValue> {
        let log_k = self.eval_log_kernel(point)?;
        let tail_bound = match self.source {
            KernelSource::HartogsGaussSeries { .. } => self.truncation_error_bound(point)?,
            _ => 0.0,
        };
        Ok(KernelValue { log_k, tail_bound })
    }

    /// `log K` as a jet in `(dz, dz̄)` around `point`.
    pub fn log_kernel_jet(&self, point: &[Complex64]) -> Result<Jet> {
        self.check_point(point)?;
        Ok(self.log_kernel_moduli(&moduli_jets(point)))
    }

    /// Relative bound on the tail dropped by a Hartogs series at `point`.
    pub fn truncation_error_bound(&self, point: &[Complex64]) -> Result<f64> {
        let KernelSource::HartogsGaussSeries { n, .. } = self.source else {
            return Err(Error::Input("truncation bounds apply to Hartogs series".into()));
        };
        self.check_point(point)?;
        let s: Vec<f64> = point.iter().map(|c| c.norm_sqr()).collect();
        let u = Self::hartogs_u(n, &s);
        let trunc = self.hartogs_truncation(n, &s);
        Ok(hartogs_tail_bound(n, trunc, u) / hartogs_partial_sum(n, trunc, u))
    }

    /// The same kernel with any automatic truncation frozen at the value
    /// needed over the polydisc of radius `radius` around `point`, so that
    /// finite-difference stencils see one smooth function.
    pub fn frozen_near(&self, point: &[Complex64], radius: f64) -> KernelModel {
        match self.source {
            KernelSource::HartogsGaussSeries { n, truncation: None } => {
                let z2: f64 = point[..n].iter().map(|c| (c.norm() + radius).powi(2)).sum();
                let w2 = (point[n].norm() + radius).powi(2);
                let u = (z2.exp() * w2).min(0.999);
                KernelModel::new(
                    KernelSource::HartogsGaussSeries {
                        n,
                        truncation: Some(auto_truncation(n, u)),
                    },
                    self.dimension,
                )
            }
            _ => self.clone(),
        }
    }
}

/// Eulerian numbers `A(m, k)`, `k = 0..m−1`: `Σ_p (p+1)^m u^p = Σ_k A(m,k) u^k / (1−u)^(m+1)`.
pub fn eulerian(m: u32) -> Vec<f64> {
    let mut row = vec![1.0];
    for mm in 2..=m {
        let mut next = vec![0.0; mm as usize];
        for k in 0..mm as usize {
            let a = if k < row.len() { (k as f64 + 1.0) * row[k] } else { 0.0 };
            let b = if k >= 1 && k - 1 < row.len() {
                (f64::from(mm) - k as f64) * row[k - 1]
            } else {
                0.0
            };
            next[k] = a + b;
        }
        row = next;
    }
    row
}

pub fn hartogs_partial_sum(n: usize, truncation: usize, u: f64) -> f64 {
    let m = n as i32 + 1;
    (0..=truncation)
        .rev()
        .fold(0.0, |acc, p| acc * u + (p as f64 + 1.0).powi(m))
}

/// Upper bound on `Σ_{p>N} (p+1)^(n+1) u^p`. Each `N' ≤ N` gives
/// `c^(n+1) u^(N'+1) / (1−u)^(n+2)` with `c = max(N'+2, n+1)`; the smallest is
/// returned, which keeps the bound monotone in `N`.
pub fn hartogs_tail_bound(n: usize, truncation: usize, u: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let m = n as i32 + 1;
    let single = |t: usize| {
        let c = ((t + 2).max(n + 1)) as f64;
        c.powi(m) * u.powi(t as i32 + 1) / (1.0 - u).powi(m + 1)
    };
    (0..=truncation).map(single).fold(f64::INFINITY, f64::min)
}

fn auto_truncation(n: usize, u: f64) -> usize {
    (1..=HARTOGS_MAX_TRUNCATION)
        .find(|&t| hartogs_tail_bound(n, t, u) < HARTOGS_AUTO_REL_TAIL * hartogs_partial_sum(n, t, u))
        .unwrap_or(HARTOGS_MAX_TRUNCATION)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::settings::Settings;

    fn pt(v: &[(f64, f64)]) -> Vec<Complex64> {
        v.iter().map(|&(a, b)| Complex64::new(a, b)).collect()
    }

    #[test]
    fn eulerian_rows() {
        assert_eq!(eulerian(1), vec![1.0]);
        assert_eq!(eulerian(2), vec![1.0, 1.0]);
        assert_eq!(eulerian(3), vec![1.0, 4.0, 1.0]);
        assert_eq!(eulerian(4), vec![1.0, 11.0, 11.0, 1.0]);
    }

    #[test]
    fn hartogs_closed_form_at_origin() {
        let k = KernelModel::hartogs_gauss(1).unwrap();
        let v = k.eval_log_kernel(&pt(&[(0.0, 0.0), (0.0, 0.0)])).unwrap();
        assert!((v - (1.0 / (PI * PI)).ln()).abs() < 1e-15);
    }

    #[test]
    fn hartogs_closed_form_matches_printed_n1_formula() {
        let k = KernelModel::hartogs_gauss(1).unwrap();
        for &(z, w) in &[(0.3, 0.2), (1.0, 0.1), (0.0, 0.9)] {
            let p = pt(&[(z, 0.0), (0.0, w)]);
            let z2: f64 = z * z;
            let u = z2.exp() * w * w;
            let printed = z2.exp() / (PI * PI) * (1.0 + u) / (1.0 - u).powi(3);
            assert!((k.eval_log_kernel(&p).unwrap() - printed.ln()).abs() < 1e-13);
        }
    }

    #[test]
    fn series_matches_closed_form() {
        let exact = KernelModel::hartogs_gauss(1).unwrap();
        let series = KernelModel::hartogs_gauss_series(1, Some(60)).unwrap();
        let p = pt(&[(0.0, 0.0), (0.5f64.sqrt(), 0.0)]);
        let d = series.eval_log_kernel(&p).unwrap() - exact.eval_log_kernel(&p).unwrap();
        assert!(d.abs() < 1e-10);
    }

    #[test]
    fn tail_bound_examples() {
        assert!(hartogs_tail_bound(1, 60, 0.5) < 1e-12);
        assert_eq!(hartogs_tail_bound(1, 60, 0.0), 0.0);
        let mut prev = f64::INFINITY;
        for n in 1..80 {
            let b = hartogs_tail_bound(1, n, 0.7);
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn tail_bound_dominates_true_tail() {
        for n in 1..=3usize {
            for &u in &[0.1, 0.5, 0.9] {
                for trunc in [0usize, 1, 5, 20] {
                    let exact_tail: f64 = (trunc + 1..5000)
                        .map(|p| (p as f64 + 1.0).powi(n as i32 + 1) * f64::powi(u, p as i32))
                        .sum();
                    assert!(hartogs_tail_bound(n, trunc, u) >= exact_tail * (1.0 - 1e-12));
                }
            }
        }
    }

    #[test]
    fn out_of_domain_points() {
        let k = KernelModel::hartogs_gauss_series(1, None).unwrap();
        assert!(matches!(
            k.eval(&pt(&[(0.0, 0.0), (1.0, 0.0)])),
            Err(Error::Domain(_))
        ));
        let b = KernelModel::ball(2).unwrap();
        assert!(matches!(
            b.eval(&pt(&[(0.8, 0.0), (0.0, 0.7)])),
            Err(Error::Domain(_))
        ));
        assert!(matches!(b.eval(&pt(&[(0.1, 0.0)])), Err(Error::Input(_))));
    }

    #[test]
    fn euclidean_model_is_modulus_squared() {
        let e = KernelModel::model(ModelKind::Euclidean, 1.0, 2).unwrap();
        let p = pt(&[(0.3, -1.2), (2.0, 0.5)]);
        let expect: f64 = p.iter().map(|c| c.norm_sqr()).sum();
        assert!((e.eval_log_kernel(&p).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn ball_series_from_table() {
        let table = MomentTable::build(&DomainSpec::ball(1).unwrap(), 1, &Settings::default()).unwrap();
        let k = KernelModel::assemble_series(&table, 1).unwrap();
        for r in [0.0, 0.3, 0.7] {
            let v = k.eval_log_kernel(&pt(&[(r, 0.0)])).unwrap();
            assert!((v - ((1.0 + 2.0 * r * r) / PI).ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn hartogs_series_coefficients_from_table() {
        let table =
            MomentTable::build(&DomainSpec::hartogs_gauss(1).unwrap(), 2, &Settings::default()).unwrap();
        let k = KernelModel::assemble_series(&table, 2).unwrap();
        let terms = k.series_terms().unwrap();
        assert_eq!(terms.len(), 6);
        for (idx, c) in terms {
            let (a, q) = (idx.entries()[0], idx.entries()[1]);
            let expect = (q as f64 + 1.0).powi(a as i32 + 2) / (PI * PI * factorial(a));
            assert!((c / expect - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn empty_table_is_rejected() {
        let mut table =
            MomentTable::build(&DomainSpec::ball(1).unwrap(), 1, &Settings::default()).unwrap();
        for r in table.entries.values_mut() {
            *r = crate::moments::MomentResult::divergent(None);
        }
        assert!(matches!(
            KernelModel::assemble_series(&table, 1),
            Err(Error::EmptyKernel { .. })
        ));
    }

    #[test]
    fn jet_value_agrees_with_float_path() {
        let models = [
            KernelModel::hartogs_gauss(2).unwrap(),
            KernelModel::hartogs_gauss_series(1, Some(40)).unwrap(),
            KernelModel::dalpha_affine(0.2, 0.7).unwrap(),
            KernelModel::ball(3).unwrap(),
        ];
        let points = [
            pt(&[(0.2, 0.1), (-0.3, 0.2), (0.1, 0.1)]),
            pt(&[(0.2, 0.1), (0.3, -0.2)]),
            pt(&[(1.2, 0.1), (0.9, 0.5)]),
            pt(&[(0.2, 0.1), (0.3, -0.2), (0.0, 0.4)]),
        ];
        for (m, p) in models.iter().zip(&points) {
            let f = m.eval_log_kernel(p).unwrap();
            let j = m.log_kernel_jet(p).unwrap();
            assert!((j.value().re - f).abs() < 1e-13 && j.value().im.abs() < 1e-14);
        }
    }
}

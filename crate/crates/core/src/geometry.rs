//! Bergman metric `g_{ij̄} = ∂_i ∂_j̄ log K`, its derivatives, the curvature
//! tensor and holomorphic sectional curvature.
//!
//! Conventions: `R_{ij̄kl̄} = −∂_k ∂_l̄ g_{ij̄} + g^{pq̄} (∂_k g_{iq̄}) (∂_l̄ g_{pj̄})`
//! and `H(v) = R(v, v̄, v, v̄) / g(v, v̄)²`. With these the potential
//! `log(1 + |z|²)` has `H ≡ 2`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::kernel::KernelModel;
use crate::numdiff::{scaled_step, Potential, RealPartials};
use crate::rng;
use crate::settings::{tolerances, DerivativeMethod, Settings};

type CMat = DMatrix<Complex64>;

impl Potential for KernelModel {
    fn dimension(&self) -> usize {
        KernelModel::dimension(self)
    }
    fn value(&self, z: &[Complex64]) -> Result<f64> {
        self.eval_log_kernel(z)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HessianEstimate {
    pub matrix: CMat,
    /// `max |H(h) − H(h/2)|`.
    pub abs_error: f64,
}

/// Complex Hessian `∂²φ/∂z_i∂z̄_j` by finite differences at steps `h` and
/// `h/2`, extrapolated; `abs_error` is the unextrapolated difference.
pub fn wirtinger_hessian<P: Potential + ?Sized>(
    potential: &P,
    point: &[Complex64],
    h: f64,
) -> Result<HessianEstimate> {
    check_arity(potential, point)?;
    let n = point.len();
    let mut coarse = RealPartials::new(potential, point, h);
    let mut fine = RealPartials::new(potential, point, 0.5 * h);
    let mut matrix = CMat::zeros(n, n);
    let mut abs_error: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let ops = [(i, false), (j, true)];
            let a = coarse.wirtinger(&ops)?;
            let b = fine.wirtinger(&ops)?;
            matrix[(i, j)] = richardson(a, b);
            abs_error = abs_error.max((a - b).norm());
        }
    }
    Ok(HessianEstimate { matrix, abs_error })
}

/// Combines fourth-order estimates at `h` and `h/2`.
fn richardson(coarse: Complex64, fine: Complex64) -> Complex64 {
    fine + (fine - coarse) / 15.0
}

fn check_arity<P: Potential + ?Sized>(potential: &P, point: &[Complex64]) -> Result<()> {
    if point.len() != potential.dimension() {
        return Err(Error::Input(format!(
            "potential of dimension {} evaluated at {} coordinates",
            potential.dimension(),
            point.len()
        )));
    }
    Ok(())
}

/// Metric and its first two derivative tensors at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSample {
    pub point: Vec<Complex64>,
    /// `g[(i, j)] = g_{ij̄}`
    pub g: CMat,
    /// `g_inv = g⁻¹` as a matrix, so `g^{pq̄} = g_inv[(q, p)]`.
    pub g_inv: CMat,
    /// `dg[k][(i, j)] = ∂_k g_{ij̄}`
    pub dg: Vec<CMat>,
    /// `ddg[k][l][(i, j)] = ∂_k ∂_l̄ g_{ij̄}`
    pub ddg: Vec<Vec<CMat>>,
    pub cond: f64,
    pub min_eigenvalue: f64,
    /// Derivative error estimates (zero on the exact path).
    pub err_g: f64,
    pub err_dg: f64,
    pub err_ddg: f64,
}

struct Derivs {
    g: CMat,
    dg: Vec<CMat>,
    ddg: Vec<Vec<CMat>>,
    errs: [f64; 3],
}

/// Step multipliers tried around the base step; consecutive entries form the
/// Richardson pairs.
const STEP_LADDER: [f64; 7] = [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

fn wirtinger_ops(n: usize) -> [Vec<Vec<(usize, bool)>>; 3] {
    let mut ops: [Vec<Vec<(usize, bool)>>; 3] = Default::default();
    for i in 0..n {
        for j in 0..n {
            ops[0].push(vec![(i, false), (j, true)]);
            for k in 0..n {
                ops[1].push(vec![(i, false), (j, true), (k, false)]);
                for l in 0..n {
                    ops[2].push(vec![(i, false), (j, true), (k, false), (l, true)]);
                }
            }
        }
    }
    ops
}

/// For each derivative order, evaluates every entry on the step ladder,
/// extrapolates consecutive pairs and keeps the extrapolant that best agrees
/// with its coarser neighbour. Steps whose stencil leaves the domain are
/// skipped.
fn fd_derivatives<P: Potential + ?Sized>(potential: &P, point: &[Complex64], h: f64) -> Result<Derivs> {
    let n = point.len();
    let mut grids: Vec<RealPartials<P>> = STEP_LADDER
        .iter()
        .map(|m| RealPartials::new(potential, point, m * h))
        .collect();
    let mut failed: Vec<Option<Error>> = (0..grids.len()).map(|_| None).collect();
    let mut chosen: Vec<Vec<Complex64>> = Vec::with_capacity(3);
    let mut errs = [0.0f64; 3];
    for (order, entries) in wirtinger_ops(n).iter().enumerate() {
        let mut vals: Vec<Option<Vec<Complex64>>> = Vec::with_capacity(grids.len());
        for (g, grid) in grids.iter_mut().enumerate() {
            if failed[g].is_some() {
                vals.push(None);
                continue;
            }
            match entries.iter().map(|ops| grid.wirtinger(ops)).collect::<Result<Vec<_>>>() {
                Ok(v) => vals.push(Some(v)),
                Err(e) => {
                    failed[g] = Some(e);
                    vals.push(None);
                }
            }
        }
        let extrapolated: Vec<Option<Vec<Complex64>>> = (0..vals.len() - 1)
            .map(|k| match (&vals[k], &vals[k + 1]) {
                (Some(fine), Some(coarse)) => {
                    Some(coarse.iter().zip(fine).map(|(&c, &f)| richardson(c, f)).collect())
                }
                _ => None,
            })
            .collect();
        let spread = |a: &[Complex64], b: &[Complex64]| {
            a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
        };
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for k in 0..extrapolated.len() - 1 {
            if let (Some(r), Some(next)) = (&extrapolated[k], &extrapolated[k + 1]) {
                let e = spread(r, next);
                if best.as_ref().map_or(true, |b| e < b.0) {
                    best = Some((e, r.clone()));
                }
            }
        }
        if best.is_none() {
            // a single usable pair: fall back on its raw disagreement
            for k in 0..extrapolated.len() {
                if let (Some(r), Some(fine), Some(coarse)) = (&extrapolated[k], &vals[k], &vals[k + 1]) {
                    best = Some((spread(fine, coarse), r.clone()));
                    break;
                }
            }
        }
        let Some((diff, merged)) = best else {
            return Err(failed.into_iter().flatten().next().unwrap_or_else(|| {
                Error::Numerics(format!("no usable finite-difference step at {point:?}"))
            }));
        };
        errs[order] = diff;
        chosen.push(merged);
    }
    let mut g = CMat::zeros(n, n);
    let mut dg = vec![CMat::zeros(n, n); n];
    let mut ddg = vec![vec![CMat::zeros(n, n); n]; n];
    let (mut a, mut b, mut c) = (0, 0, 0);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = chosen[0][a];
            a += 1;
            for k in 0..n {
                dg[k][(i, j)] = chosen[1][b];
                b += 1;
                for l in 0..n {
                    ddg[k][l][(i, j)] = chosen[2][c];
                    c += 1;
                }
            }
        }
    }
    Ok(Derivs { g, dg, ddg, errs })
}

fn exact_derivatives(jet: &Jet, n: usize) -> Derivs {
    let e = |ops: &[(usize, bool)]| {
        let mut exps = vec![0u8; 2 * n];
        for &(j, conj) in ops {
            exps[2 * j + usize::from(conj)] += 1;
        }
        jet.derivative(&exps)
    };
    let mut g = CMat::zeros(n, n);
    let mut dg = vec![CMat::zeros(n, n); n];
    let mut ddg = vec![vec![CMat::zeros(n, n); n]; n];
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = e(&[(i, false), (j, true)]);
            for k in 0..n {
                dg[k][(i, j)] = e(&[(i, false), (j, true), (k, false)]);
                for l in 0..n {
                    ddg[k][l][(i, j)] = e(&[(i, false), (j, true), (k, false), (l, true)]);
                }
            }
        }
    }
    Derivs {
        g,
        dg,
        ddg,
        errs: [0.0; 3],
    }
}

fn finish_sample(point: &[Complex64], d: Derivs) -> Result<MetricSample> {
    let scale = d.g.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let herm = (&d.g - d.g.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if herm > tolerances::METRIC_HERMITIAN * scale + 10.0 * d.errs[0] {
        return Err(Error::Numerics(format!("metric not Hermitian: residual {herm}")));
    }
    let g = (&d.g + d.g.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(g.clone());
    let min_eigenvalue = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_eigenvalue = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(min_eigenvalue > 1e-12 * max_eigenvalue.abs().max(1e-300)) {
        return Err(Error::DegenerateMetric {
            point: format!("{point:?}"),
            min_eigenvalue,
        });
    }
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateMetric {
            point: format!("{point:?}"),
            min_eigenvalue,
        })?;
    Ok(MetricSample {
        point: point.to_vec(),
        g,
        g_inv,
        dg: d.dg,
        ddg: d.ddg,
        cond: max_eigenvalue / min_eigenvalue,
        min_eigenvalue,
        err_g: d.errs[0],
        err_dg: d.errs[1],
        err_ddg: d.errs[2],
    })
}

/// Finite-difference metric sample for any potential; the base step is
/// `settings.fd_step · max(1, |z|)`.
pub fn metric_at_potential<P: Potential + ?Sized>(
    potential: &P,
    point: &[Complex64],
    settings: &Settings,
) -> Result<MetricSample> {
    check_arity(potential, point)?;
    let h = scaled_step(settings.fd_step, point);
    let d = fd_derivatives(potential, point, h)?;
    finish_sample(point, d)
}

pub fn metric_at(model: &KernelModel, point: &[Complex64], settings: &Settings) -> Result<MetricSample> {
    model.check_point(point)?;
    match settings.derivative {
        DerivativeMethod::Exact => {
            let jet = model.log_kernel_jet(point)?;
            finish_sample(point, exact_derivatives(&jet, point.len()))
        }
        DerivativeMethod::FiniteDifference => {
            let h = scaled_step(settings.fd_step, point);
            // the largest ladder steps see a slightly larger tail; they are
            // only chosen when their error estimate wins
            let local = model.frozen_near(point, 16.0 * h);
            metric_at_potential(&local, point, settings)
        }
    }
}

/// `R_{ij̄kl̄}` stored as `r[i][j][k][l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    pub n: usize,
    data: Vec<Complex64>,
    /// Largest Kähler-symmetry residual found.
    pub symmetry_residual: f64,
    /// Propagated derivative error estimate.
    pub error_estimate: f64,
}

impl CurvatureTensor {
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        let n = self.n;
        self.data[((i * n + j) * n + k) * n + l]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `R(v, v̄, v, v̄)`.
    pub fn contract(&self, v: &[Complex64]) -> f64 {
        let n = self.n;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        acc += self.get(i, j, k, l) * v[i] * v[j].conj() * v[k] * v[l].conj();
                    }
                }
            }
        }
        acc.re
    }
}

pub fn curvature_from_sample(sample: &MetricSample) -> Result<CurvatureTensor> {
    let n = sample.g.nrows();
    let mut data = vec![Complex64::new(0.0, 0.0); n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut r = -sample.ddg[k][l][(i, j)];
                    for p in 0..n {
                        for q in 0..n {
                            let inv = sample.g_inv[(q, p)];
                            let dk = sample.dg[k][(i, q)];
                            // ∂_l̄ g_{pj̄} = conj(∂_l g_{jp̄})
                            let dl = sample.dg[l][(j, p)].conj();
                            r += inv * dk * dl;
                        }
                    }
                    data[((i * n + j) * n + k) * n + l] = r;
                }
            }
        }
    }
    let dg_max = sample.dg.iter().flat_map(|m| m.iter()).map(|c| c.norm()).fold(0.0, f64::max);
    let inv_max = sample.g_inv.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let nn = (n * n) as f64;
    let error_estimate = sample.err_ddg + 2.0 * nn * inv_max * dg_max * sample.err_dg;

    let mut tensor = CurvatureTensor {
        n,
        data,
        symmetry_residual: 0.0,
        error_estimate,
    };
    let mut residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let r = tensor.get(i, j, k, l);
                    residual = residual
                        .max((r - tensor.get(k, j, i, l)).norm())
                        .max((r - tensor.get(i, l, k, j)).norm())
                        .max((r - tensor.get(j, i, l, k).conj()).norm());
                }
            }
        }
    }
    tensor.symmetry_residual = residual;
    let scale = tensor.max_abs().max(1.0);
    let allowed = (10.0 * error_estimate).max(tolerances::CURVATURE_SYMMETRY * scale);
    if residual > allowed {
        return Err(Error::Numerics(format!(
            "curvature symmetry residual {residual} exceeds {allowed} at {:?}",
            sample.point
        )));
    }
    Ok(tensor)
}

pub fn curvature_tensor(model: &KernelModel, point: &[Complex64], settings: &Settings) -> Result<CurvatureTensor> {
    curvature_from_sample(&metric_at(model, point, settings)?)
}

fn hsc_from(sample: &MetricSample, tensor: &CurvatureTensor, v: &[Complex64]) -> Result<f64> {
    if v.len() != sample.g.nrows() {
        return Err(Error::Input("direction arity mismatch".into()));
    }
    if v.iter().all(|c| c.norm() == 0.0) {
        return Err(Error::Input("holomorphic sectional curvature needs a nonzero direction".into()));
    }
    let n = v.len();
    let mut gvv = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            gvv += sample.g[(i, j)] * v[i] * v[j].conj();
        }
    }
    Ok(tensor.contract(v) / (gvv.re * gvv.re))
}

/// Holomorphic sectional curvature of an already sampled metric.
pub fn hsc_at_sample(sample: &MetricSample, v: &[Complex64]) -> Result<f64> {
    let t = curvature_from_sample(sample)?;
    hsc_from(sample, &t, v)
}

pub fn hsc(model: &KernelModel, point: &[Complex64], v: &[Complex64], settings: &Settings) -> Result<f64> {
    let sample = metric_at(model, point, settings)?;
    hsc_at_sample(&sample, v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointCurvature {
    pub point: Vec<(f64, f64)>,
    pub hsc_min: f64,
    pub hsc_max: f64,
}

impl PointCurvature {
    pub fn spread(&self) -> f64 {
        self.hsc_max - self.hsc_min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub points: Vec<PointCurvature>,
    pub is_constant: bool,
    pub constant_value: Option<f64>,
    /// `max − min` over every sampled direction at every point.
    pub max_deviation: f64,
    pub global_min: f64,
    pub global_max: f64,
    pub tol: f64,
}

/// Samples `H` along Haar-random directions at every point and decides
/// whether it is constant within `tol`.
pub fn constant_curvature_verdict<P>(
    potential: &P,
    points: &[Vec<Complex64>],
    directions_per_point: usize,
    seed: u64,
    tol: f64,
    sampler: impl Fn(&P, &[Complex64]) -> Result<MetricSample> + Sync,
) -> Result<CurvatureReport>
where
    P: Sync + ?Sized,
{
    if points.len() < 2 {
        return Err(Error::Input("constancy verdict needs at least 2 points".into()));
    }
    if directions_per_point < 8 {
        return Err(Error::Input("constancy verdict needs at least 8 directions per point".into()));
    }
    let per_point: Result<Vec<PointCurvature>> = points
        .par_iter()
        .enumerate()
        .map(|(idx, p)| {
            let annotate = |e: Error| e.in_stage(format!("curvature at point {idx} {p:?}"));
            let sample = sampler(potential, p).map_err(annotate)?;
            let tensor = curvature_from_sample(&sample).map_err(annotate)?;
            let mut r = rng::stream(seed, idx as u64);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for _ in 0..directions_per_point {
                let v = rng::unit_direction(&mut r, p.len());
                let h = hsc_from(&sample, &tensor, &v).map_err(annotate)?;
                lo = lo.min(h);
                hi = hi.max(h);
            }
            Ok(PointCurvature {
                point: p.iter().map(|c| (c.re, c.im)).collect(),
                hsc_min: lo,
                hsc_max: hi,
            })
        })
        .collect();
    let points = per_point?;
    let global_min = points.iter().map(|p| p.hsc_min).fold(f64::INFINITY, f64::min);
    let global_max = points.iter().map(|p| p.hsc_max).fold(f64::NEG_INFINITY, f64::max);
    let max_deviation = global_max - global_min;
    let is_constant = max_deviation <= tol;
    Ok(CurvatureReport {
        points,
        is_constant,
        constant_value: is_constant.then_some(0.5 * (global_min + global_max)),
        max_deviation,
        global_min,
        global_max,
        tol,
    })
}

/// [`constant_curvature_verdict`] for a kernel model with the configured
/// derivative method.
pub fn kernel_curvature_verdict(
    model: &KernelModel,
    points: &[Vec<Complex64>],
    directions_per_point: usize,
    seed: u64,
    tol: f64,
    settings: &Settings,
) -> Result<CurvatureReport> {
    constant_curvature_verdict(model, points, directions_per_point, seed, tol, |m, p| {
        metric_at(m, p, settings)
    })
}

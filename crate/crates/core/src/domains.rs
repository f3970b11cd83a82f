//! Model domains and model potentials, membership tests, the modulus-squared
//! ("shadow") description of the sliver domain, and seeded interior sampling.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub type Point = Vec<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `scale · log(1 + |z|²)`
    FubiniStudy,
    /// `−scale · log(1 − |z|²)`
    Hyperbolic,
    /// `|z|²`
    Euclidean,
}

/// A model domain, or a model Kähler potential with no underlying volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
#[serde(try_from = "RawSpec")]
pub enum DomainSpec {
    Ball { n: usize },
    /// `{ (z,w) : ||w|² − |z|²| < (1 + |z|² + |w|²)^(−alpha) }`
    #[serde(rename = "dalpha")]
    DAlpha { alpha: f64 },
    /// `{ (z,w) ∈ Cⁿ × C : |w|² < exp(−|z|²) }`
    HartogsGauss { n: usize },
    #[serde(rename = "model")]
    ModelPotential { kind: ModelKind, scale: f64, n: usize },
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RawSpec {
    Ball { n: usize },
    #[serde(rename = "dalpha")]
    DAlpha { alpha: f64 },
    HartogsGauss { n: usize },
    #[serde(rename = "model")]
    ModelPotential { kind: ModelKind, scale: f64, n: usize },
}

impl TryFrom<RawSpec> for DomainSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        match raw {
            RawSpec::Ball { n } => DomainSpec::ball(n),
            RawSpec::DAlpha { alpha } => DomainSpec::dalpha(alpha),
            RawSpec::HartogsGauss { n } => DomainSpec::hartogs_gauss(n),
            RawSpec::ModelPotential { kind, scale, n } => DomainSpec::model(kind, scale, n),
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Input("dimension n must be at least 1".into()));
    }
    Ok(())
}

impl DomainSpec {
    pub fn ball(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(DomainSpec::Ball { n })
    }

    pub fn dalpha(alpha: f64) -> Result<Self> {
        if !(alpha > 2.0 && alpha < 3.0) {
            return Err(Error::Input(format!(
                "dalpha exponent must lie strictly inside (2,3), got {alpha}"
            )));
        }
        Ok(DomainSpec::DAlpha { alpha })
    }

    pub fn hartogs_gauss(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(DomainSpec::HartogsGauss { n })
    }

    pub fn model(kind: ModelKind, scale: f64, n: usize) -> Result<Self> {
        check_dim(n)?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Input(format!("model scale must be positive, got {scale}")));
        }
        Ok(DomainSpec::ModelPotential { kind, scale, n })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("domain specs always serialise")
    }

    /// Complex dimension of the ambient chart.
    pub fn dimension(&self) -> usize {
        match *self {
            DomainSpec::Ball { n } => n,
            DomainSpec::DAlpha { .. } => 2,
            DomainSpec::HartogsGauss { n } => n + 1,
            DomainSpec::ModelPotential { n, .. } => n,
        }
    }

    /// Complete Reinhardt domains have an orthogonal monomial basis.
    pub fn is_reinhardt_domain(&self) -> bool {
        !matches!(self, DomainSpec::ModelPotential { .. })
    }

    pub fn check_arity(&self, len: usize) -> Result<()> {
        if len != self.dimension() {
            return Err(Error::Input(format!(
                "{self}: expected {} coordinates, got {len}",
                self.dimension()
            )));
        }
        Ok(())
    }

    /// Slack of the defining inequality at `point`: strictly below one
    /// exactly when the point is inside. Model potentials other than the
    /// hyperbolic one have slack zero everywhere.
    fn slack(&self, point: &[Complex64]) -> f64 {
        let s: Vec<f64> = point.iter().map(|c| c.norm_sqr()).collect();
        match *self {
            DomainSpec::Ball { .. } => s.iter().sum::<f64>(),
            DomainSpec::DAlpha { alpha } => {
                let (x, y) = (s[0], s[1]);
                (y - x).abs() * (1.0 + x + y).powf(alpha)
            }
            DomainSpec::HartogsGauss { n } => {
                let z2: f64 = s[..n].iter().sum();
                s[n] * z2.exp()
            }
            DomainSpec::ModelPotential { kind, .. } => match kind {
                ModelKind::Hyperbolic => s.iter().sum::<f64>(),
                _ => 0.0,
            },
        }
    }

    pub fn contains(&self, point: &[Complex64]) -> Result<bool> {
        self.check_arity(point.len())?;
        Ok(self.slack(point) < 1.0)
    }

    pub fn shadow_strip(&self, t: f64, tol: f64) -> Result<ShadowStrip> {
        match *self {
            DomainSpec::DAlpha { alpha } => shadow_strip(alpha, t, tol),
            _ => Err(Error::Input(format!("{self} has no sliver shadow"))),
        }
    }

    pub fn sample_interior(&self, count: usize, seed: u64, margin: f64) -> Result<Vec<Point>> {
        self.sample_interior_in(count, seed, margin, SampleBox::default_for(self))
    }

    /// Deterministic interior samples whose defining ratio is below
    /// `1 − margin` (for the ball and the hyperbolic model `|p| < 1 − margin`).
    pub fn sample_interior_in(
        &self,
        count: usize,
        seed: u64,
        margin: f64,
        bx: SampleBox,
    ) -> Result<Vec<Point>> {
        if count == 0 {
            return Err(Error::Input("sample count must be at least 1".into()));
        }
        if !(margin > 0.0 && margin < 1.0) {
            return Err(Error::Input(format!("margin must lie in (0,1), got {margin}")));
        }
        (0..count)
            .map(|i| {
                let mut rng = rng::stream(seed, i as u64);
                self.sample_one(&mut rng, margin, bx)
            })
            .collect()
    }

    fn sample_one<R: Rng>(&self, rng: &mut R, margin: f64, bx: SampleBox) -> Result<Point> {
        match *self {
            DomainSpec::Ball { n }
            | DomainSpec::ModelPotential {
                kind: ModelKind::Hyperbolic,
                n,
                ..
            } => Ok(ball_point(rng, n, 1.0 - margin)),
            DomainSpec::ModelPotential { n, .. } => Ok(ball_point(rng, n, bx.z_radius)),
            DomainSpec::HartogsGauss { n } => {
                let mut p = ball_point(rng, n, bx.z_radius);
                let z2: f64 = p.iter().map(|c| c.norm_sqr()).sum();
                let w2 = (1.0 - margin) * (-z2).exp() * rng.random::<f64>();
                p.push(rng::phase(rng) * w2.sqrt());
                Ok(p)
            }
            DomainSpec::DAlpha { alpha } => {
                let r2 = bx.z_radius * bx.z_radius;
                let w_max2 = bx.w_radius * bx.w_radius;
                for _ in 0..MAX_SAMPLE_ATTEMPTS {
                    let x = r2 * rng.random::<f64>();
                    let half = (1.0 + x).powf(-alpha);
                    let u = half * (2.0 * rng.random::<f64>() - 1.0);
                    let y = x + u;
                    if y < 0.0 || y > w_max2 {
                        continue;
                    }
                    if u.abs() < (1.0 - margin) * (1.0 + x + y).powf(-alpha) {
                        return Ok(vec![rng::phase(rng) * x.sqrt(), rng::phase(rng) * y.sqrt()]);
                    }
                }
                Err(Error::Sampling {
                    spec: self.to_string(),
                    attempts: MAX_SAMPLE_ATTEMPTS,
                })
            }
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Ball { n } => write!(f, "Ball({n})"),
            DomainSpec::DAlpha { alpha } => write!(f, "DAlpha({alpha})"),
            DomainSpec::HartogsGauss { n } => write!(f, "HartogsGauss({n})"),
            DomainSpec::ModelPotential { kind, scale, n } => {
                write!(f, "{kind:?}(scale {scale}, n {n})")
            }
        }
    }
}

const MAX_SAMPLE_ATTEMPTS: usize = 100_000;

/// Radius caps used when sampling unbounded domains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub z_radius: f64,
    pub w_radius: f64,
}

impl SampleBox {
    pub fn default_for(spec: &DomainSpec) -> Self {
        match spec {
            DomainSpec::DAlpha { .. } => SampleBox { z_radius: 3.0, w_radius: 3.0 },
            // keeps the fiber radius e^(-|z|²/2) above the nested stencil reach
            DomainSpec::HartogsGauss { .. } => SampleBox { z_radius: 1.0, w_radius: 1.0 },
            _ => SampleBox { z_radius: 2.0, w_radius: 2.0 },
        }
    }
}

fn ball_point<R: Rng>(rng: &mut R, n: usize, radius: f64) -> Point {
    let dir = rng::unit_direction(rng, n);
    // volume-uniform radius in R^{2n}
    let r = radius * rng.random::<f64>().powf(1.0 / (2.0 * n as f64));
    dir.into_iter().map(|c| c * r).collect()
}

/// Cross-section of the sliver domain at `x = |z|² = t`, in the variable
/// `u = |w|² − |z|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowStrip {
    pub t: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    /// `|w|² ≥ 0` is the active lower bound, so `u_minus = −t`.
    pub clipped: bool,
}

impl ShadowStrip {
    pub fn width(&self) -> f64 {
        self.u_plus - self.u_minus
    }
}

/// Solves the two boundary equations `u = ±(1 + 2t + u)^(−alpha)` by bisection.
pub fn shadow_strip(alpha: f64, t: f64, tol: f64) -> Result<ShadowStrip> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Input(format!("strip abscissa must be >= 0, got {t}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Input(format!("strip tolerance must be positive, got {tol}")));
    }
    let s = 1.0 + 2.0 * t;
    let a = s.powf(-alpha);
    let upper = |u: f64| u - (s + u).powf(-alpha);
    let u_plus = bisect(upper, 0.0, a.min(1.0), tol);

    // −u < (s + u)^(−alpha) holds on all of [−t, 0] iff it holds at u = −t
    let lower = |u: f64| u + (s + u).powf(-alpha);
    let (u_minus, clipped) = if lower(-t) > 0.0 {
        (-t, true)
    } else {
        (bisect(lower, -t, 0.0, tol), false)
    };
    Ok(ShadowStrip {
        t,
        u_minus,
        u_plus,
        clipped,
    })
}

/// Largest `t` at which the strip is clipped: the root of `t = (1 + t)^(−alpha)`.
pub fn clip_threshold(alpha: f64) -> f64 {
    bisect(|t| t - (1.0 + t).powf(-alpha), 0.0, 1.0, 1e-300)
}

/// Bisection for an increasing sign change `f(lo) ≤ 0 < f(hi)`. Stops at
/// `tol` or when the bracket can no longer be split in floating point.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

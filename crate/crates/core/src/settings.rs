//! Numerical settings shared by every stage, plus the tolerance profile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TolProfile {
    #[default]
    Default,
    /// Every verdict tolerance halved.
    Strict,
}

impl TolProfile {
    pub fn factor(self) -> f64 {
        match self {
            TolProfile::Default => 1.0,
            TolProfile::Strict => 0.5,
        }
    }
}

/// How third and fourth Wirtinger derivatives of a potential are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMethod {
    #[default]
    FiniteDifference,
    /// Truncated Taylor arithmetic in (dz, dz̄); only for kernel models.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// Relative target accuracy of moment quadrature.
    pub quad_tol: f64,
    /// Base finite-difference step, scaled by `max(1, |z|)`.
    pub fd_step: f64,
    /// Series truncation degree.
    pub truncation: usize,
    pub tol_profile: TolProfile,
    pub derivative: DerivativeMethod,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            quad_tol: 1e-10,
            fd_step: 1e-2,
            truncation: 4,
            tol_profile: TolProfile::Default,
            derivative: DerivativeMethod::FiniteDifference,
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<()> {
        if !(self.quad_tol > 0.0 && self.quad_tol.is_finite()) {
            return Err(Error::Input(format!("quad_tol must be positive, got {}", self.quad_tol)));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(Error::Input(format!("fd_step must be positive, got {}", self.fd_step)));
        }
        if self.truncation < 1 {
            return Err(Error::Input("truncation must be at least 1".into()));
        }
        Ok(())
    }

    /// Scales a nominal verdict tolerance by the active profile.
    pub fn tol(&self, nominal: f64) -> f64 {
        nominal * self.tol_profile.factor()
    }
}

/// Nominal verdict tolerances. Profiles scale these, never the numerics.
pub mod tolerances {
    pub const METRIC_HERMITIAN: f64 = 1e-8;
    pub const CURVATURE_SYMMETRY: f64 = 1e-6;
    pub const CONSTANCY: f64 = 1e-3;
    pub const MODEL_ANCHOR: f64 = 1e-6;
    pub const EUCLIDEAN_ANCHOR: f64 = 1e-8;
    pub const BERGMAN_BOUND: f64 = 1e-3;
    pub const HARTOGS_MOMENT_REL: f64 = 1e-6;
    pub const HARTOGS_KERNEL_REL: f64 = 1e-8;
    pub const SLICE_MIXED_METRIC: f64 = 1e-8;
    pub const SLICE_TANGENT_METRIC: f64 = 1e-6;
    pub const SLICE_CURVATURE: f64 = 1e-5;
    pub const SLICE_POWER_RATIO: f64 = 1e3;
    pub const GAUSSIAN_MOMENT: f64 = 1e-8;
    pub const LAPLACIAN: f64 = 1e-6;
}

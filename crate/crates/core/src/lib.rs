//! Numerical Bergman kernels, Bergman metrics and holomorphic sectional
//! curvature for a handful of model domains, with the verification checks
//! that go with them.

pub mod domains;
pub mod error;
pub mod geometry;
pub mod jet;
pub mod kernel;
pub mod modeltests;
pub mod moments;
pub mod numdiff;
pub mod quadrature;
pub mod rng;
pub mod settings;
pub mod suite;

pub use domains::{DomainSpec, ModelKind, Point, SampleBox, ShadowStrip};
pub use error::{Error, Result};
pub use moments::{MomentResult, MomentTable, MultiIndex, Verdict};
pub use settings::{DerivativeMethod, Settings, TolProfile};
pub use kernel::{KernelModel, KernelSource, KernelValue};
pub use geometry::{CurvatureReport, MetricSample};
pub use modeltests::CheckOutcome;
pub use suite::{run_paper_suite, SuiteReport};

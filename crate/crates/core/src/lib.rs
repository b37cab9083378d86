//! Detecting sparse dependence between paired samples: a Gaussian mixture
//! model, parametric and rank-based tests, calibration, and power studies.

pub mod calibration;
pub mod error;
pub mod model;
pub mod normal;
pub mod parametric;
pub mod power;
pub mod rank;
pub mod rng;

pub use calibration::{CalibrationMethod, CalibrationPlan, NullTable, NullTableCache, Statistic, TestKind, TestOutcome};
pub use error::{Error, Result};
pub use model::{MarginalTransform, ModelParams, PairedSample, Regime, RegimeSpec, SampleView};
pub use power::{Boundary, ExperimentConfig, PowerCurve, PowerPoint};

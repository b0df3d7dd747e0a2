//! Max-margin linear classification on synthetic high-dimensional mixtures:
//! seeded data generators with label noise, an exact hard-margin solver with
//! checkable optimality residuals, gradient descent on the exponential loss,
//! risk/concentration diagnostics, and a sweep harness behind the `marginlab`
//! binary.
//!
//! Everything numeric is generic over [`Scalar`] (f32 or f64); the aliases
//! below fix f64, which is what the CLI and the experiment artifacts use.

pub mod datagen;
pub mod diagnostics;
pub mod gdflow;
pub mod harness;
pub mod linalg;
pub mod rng;
pub mod scalar;
pub mod solver;

pub use scalar::Scalar;

/// Default scalar for the command-line tools and experiment records.
pub type Real = f64;

pub type Matrix = linalg::Matrix<Real>;
pub type ModelSpec = datagen::ModelSpec<Real>;
pub type NoiseSpec = datagen::NoiseSpec<Real>;
pub type Dataset = datagen::Dataset<Real>;
pub type Manifest = datagen::Manifest<Real>;
pub type AssumptionReport = datagen::AssumptionReport<Real>;
pub type SolverConfig = solver::SolverConfig<Real>;
pub type Classifier = solver::Classifier<Real>;
pub type KktResiduals = solver::KktResiduals<Real>;
pub type MarginStats = solver::MarginStats<Real>;
pub type GdConfig = gdflow::GdConfig<Real>;
pub type TrainTrace = gdflow::TrainTrace<Real>;
pub type EventReport = diagnostics::EventReport<Real>;
pub type RiskReport = diagnostics::RiskReport<Real>;
pub type McRisk = diagnostics::McRisk<Real>;
pub type SweepConfig = harness::SweepConfig<Real>;
pub type ResolvedPoint = harness::ResolvedPoint<Real>;
pub type TrialRecord = harness::TrialRecord<Real>;
pub type SweepResult = harness::SweepResult<Real>;

//! Stability of parametrized quantum circuits under leave-one-out
//! importance pruning.
//!
//! The pipeline: [`circuit::generate_uniform`] builds structurally-uniform
//! ensembles, [`pruning`] ranks gates by causal importance and deletes the
//! least important ones, [`stats`] classifies the outcome and measures the
//! angle statistics behind it, and [`protocol`] runs whole ensembles and
//! compression-ratio sweeps.

pub mod circuit;
pub mod error;
pub mod protocol;
pub mod pruning;
pub mod report;
pub mod simulator;
pub mod stats;

pub use circuit::{generate_uniform, Circuit, Gate, GenerationParams, Provenance, RotationAxis};
pub use error::{Error, Result};
pub use pruning::{
    aware_prune, causal_prune, importance_profile, risk_assess, BrittlenessReport,
    BrittlenessThresholds, CompressionResult, ImportanceProfile,
};
pub use simulator::{fidelity, run, StateVector};
pub use stats::{ClassLabel, TestResult};

//! Detection of EPR steering in two-qubit states.
//!
//! The crate decides steerability of a state by testing whether the assemblage
//! Bob observes admits a local-hidden-state (LHS) model, trains feedforward
//! classifiers on oracle-labeled random states, and compares the predicted
//! steerability bound of generalized Werner states against the closed-form
//! bound.
//!
//! Module map:
//! - [`qstate`]: two-qubit state algebra (construction, Bloch decomposition,
//!   canonical-form map, random/Werner generators)
//! - [`measure`]: projective qubit measurements, deterministic response
//!   strategies, assemblage construction
//! - [`oracle`]: LHS feasibility solver, steering witnesses, multi-trial
//!   labeling, Werner threshold bisection
//! - [`features`]: the four feature schemes F1-F4
//! - [`nnet`]: from-scratch multilayer network with backprop and Adam
//! - [`pipeline`]: dataset generation, splits, cross-validation, Werner test
//!   sets, bound prediction

pub mod error;
pub mod features;
pub mod measure;
pub mod nnet;
pub mod oracle;
pub mod pipeline;
pub mod qstate;
pub(crate) mod rng;

pub use error::{Error, Result};
pub use features::{extract, FeatureScheme, FeatureVector};
pub use measure::{
    assemblage, enumerate_strategies, mub_measurements, random_measurements, Assemblage,
    DeterministicStrategySet, MeasurementSet,
};
pub use nnet::model::TrainedModel;
pub use nnet::{LabeledBatch, NetworkParams, TrainConfig, TrainHistory};
pub use oracle::{
    lhs_feasibility, steering_decision, werner_threshold, Label, LhsModel, OracleConfig,
    SteeringWitness,
};
pub use pipeline::{
    accuracy, generate_dataset, kfold_cv, predict_bound, split, theoretical_bound,
    werner_test_set, Dataset, Example, GenConfig, Manifest,
};
pub use qstate::{
    bloch_decompose, canonical_form, matrix_sqrt, partial_trace_a, random_density, werner_state,
    BlochDecomposition, CanonicalMode, ComplexMatrix, DensityMatrix, QubitDensity, WernerParams,
};

//! Host-city impact evaluation toolkit.
//!
//! Subjective (AHP) and objective (entropy) indicator weighting, their
//! ordered-ratio combination, feature-factor selection and the weighted
//! evaluation function, GM(1,1) grey forecasting, multi-stage host-city
//! screening, scheme comparison, and sensitivity / response-surface analysis.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ahp;
pub mod combined;
pub mod entropy;
pub mod error;
pub mod format;
pub mod grey;
pub mod host;
pub mod indicator;
pub mod sensitivity;

pub use error::{Error, ErrorKind, Result};
pub use indicator::{
    load_decision_matrix, load_decision_matrix_json, validate_hierarchy, Category, DecisionMatrix, IndicatorHierarchy,
    IndicatorId, IndicatorSpec, LoadOptions, MissingPolicy, Polarity, WeightSet,
};

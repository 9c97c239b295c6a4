//! Weak-signal regression pipeline for aeromagnetic navigation.
//!
//! The crate extracts the Earth's crustal anomaly field (a ~100 nT signal
//! buried in tens of thousands of nT of core field and cockpit interference)
//! from multi-sensor flight data, and regresses the aircraft position
//! directly from the same features. It provides:
//!
//! * [`dataset`] — flight-data tables, imputation, chronological splits, and
//!   the named feature-set presets,
//! * [`preprocess`] — min-max / standard scaling, low-variance feature
//!   exclusion, and Pearson correlation matrices,
//! * [`pca`] — principal-component analysis on the feature covariance,
//! * [`models`] — CART regression trees, bootstrap-aggregated random
//!   forests, and k-nearest-neighbor regression for scalar and 3-vector
//!   targets,
//! * [`tolles_lawson`] — the classical 18-term linear aeromagnetic
//!   compensation model,
//! * [`selection`] — forward sequential feature selection, permutation and
//!   drop-column importance, and the `max_depth` grid sweep,
//! * [`metrics`] — RMSE, 3-D DRMS, and experiment summaries,
//! * [`synth`] — a synthetic-flight generator with known ground truth used
//!   to verify every stage at desk scale.

pub mod dataset;
pub mod error;
pub mod metrics;
pub mod models;
pub mod pca;
pub mod preprocess;
pub mod rng;
pub mod selection;
pub mod synth;
pub mod textio;
pub mod tolles_lawson;

pub use error::{Error, Result};

// Matrices appear throughout the public API; re-export the crate so
// callers don't have to pin a matching version themselves.
pub use nalgebra;

//! Regression models: CART decision trees, bootstrap-aggregated random
//! forests, and k-nearest-neighbor regression.
//!
//! All three handle scalar (anomaly field) and 3-vector (position) targets.
//! Multi-output targets are handled inside a single tree: split impurity is
//! the sum of per-dimension squared errors, so all coordinates share one
//! split structure.

mod forest;
mod io;
mod knn;
mod tree;

pub use forest::{bootstrap_indices, fit_forest, oob_indices, ForestConfig, ForestModel};
pub use io::{load_model, read_model, save_model, write_model};
pub use knn::{fit_knn, KnnConfig, KnnModel};
pub use tree::{fit_tree, DecisionTreeModel, Node, TreeConfig};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// How an ensemble (or neighbor set) combines member predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Mean,
    Median,
}

impl Aggregation {
    pub fn name(&self) -> &'static str {
        match self {
            Aggregation::Mean => "mean",
            Aggregation::Median => "median",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "mean" => Ok(Aggregation::Mean),
            "median" => Ok(Aggregation::Median),
            other => Err(Error::invalid(format!("unknown aggregation `{other}`"))),
        }
    }

    /// Combine the values in `buf` (consumed; median sorts in place).
    pub(crate) fn combine(&self, buf: &mut [f64]) -> f64 {
        match self {
            Aggregation::Mean => buf.iter().sum::<f64>() / buf.len() as f64,
            Aggregation::Median => {
                buf.sort_by(f64::total_cmp);
                let n = buf.len();
                if n % 2 == 1 {
                    buf[n / 2]
                } else {
                    0.5 * (buf[n / 2 - 1] + buf[n / 2])
                }
            }
        }
    }
}

/// Number of candidate features examined per split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxFeatures {
    /// Every feature (the default; no per-split subsampling).
    All,
    Count(usize),
    Fraction(f64),
}

impl MaxFeatures {
    /// Resolve to a concrete count for `p` features.
    pub fn resolve(&self, p: usize) -> Result<usize> {
        let m = match *self {
            MaxFeatures::All => p,
            MaxFeatures::Count(c) => {
                if c == 0 {
                    return Err(Error::invalid("max_features count must be >= 1"));
                }
                c.min(p)
            }
            MaxFeatures::Fraction(f) => {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(Error::invalid("max_features fraction must be in (0,1]"));
                }
                ((f * p as f64).ceil() as usize).clamp(1, p)
            }
        };
        Ok(m)
    }
}

/// Configuration for one of the three model families.
#[derive(Debug, Clone)]
pub enum ModelConfig {
    Tree(TreeConfig),
    Forest(ForestConfig),
    Knn(KnnConfig),
}

impl ModelConfig {
    pub fn tag(&self) -> &'static str {
        match self {
            ModelConfig::Tree(_) => "tree",
            ModelConfig::Forest(_) => "forest",
            ModelConfig::Knn(_) => "knn",
        }
    }
}

/// A fitted model of any family.
#[derive(Debug, Clone)]
pub enum Model {
    Tree(DecisionTreeModel),
    Forest(ForestModel),
    Knn(KnnModel),
}

impl Model {
    pub fn fit(config: &ModelConfig, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<Model> {
        match config {
            ModelConfig::Tree(c) => Ok(Model::Tree(fit_tree(x, y, c)?)),
            ModelConfig::Forest(c) => Ok(Model::Forest(fit_forest(x, y, c)?)),
            ModelConfig::Knn(c) => Ok(Model::Knn(fit_knn(x, y, c)?)),
        }
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match self {
            Model::Tree(m) => m.predict(x),
            Model::Forest(m) => m.predict(x),
            Model::Knn(m) => m.predict(x),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Model::Tree(_) => "tree",
            Model::Forest(_) => "forest",
            Model::Knn(_) => "knn",
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Tree(m) => m.n_features,
            Model::Forest(m) => m.n_features,
            Model::Knn(m) => m.n_features(),
        }
    }

    pub fn target_dim(&self) -> usize {
        match self {
            Model::Tree(m) => m.target_dim,
            Model::Forest(m) => m.target_dim,
            Model::Knn(m) => m.target_dim(),
        }
    }
}

pub(crate) fn check_target_dim(d: usize) -> Result<()> {
    if d == 1 || d == 3 {
        Ok(())
    } else {
        Err(Error::shape(format!(
            "target must have 1 or 3 dimensions, got {d}"
        )))
    }
}

pub(crate) fn check_xy(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::invalid("training data is empty"));
    }
    if x.nrows() != y.nrows() {
        return Err(Error::shape(format!(
            "{} feature rows vs {} target rows",
            x.nrows(),
            y.nrows()
        )));
    }
    check_target_dim(y.ncols())
}

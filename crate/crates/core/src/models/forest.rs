//! Bootstrap-aggregated random forests.
//!
//! Every tree draws its bootstrap sample and its per-split feature subsets
//! from streams keyed by `(master_seed, tree_index, purpose)`, so training
//! with one worker or many produces bit-identical models.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::tree::fit_tree_on_samples;
use crate::models::{check_xy, Aggregation, DecisionTreeModel, MaxFeatures, TreeConfig};
use crate::rng::{derive_seed, purpose, stream};

#[derive(Debug, Clone)]
pub struct ForestConfig {
    pub n_estimators: usize,
    pub tree: TreeConfig,
    pub master_seed: u64,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub aggregation: Aggregation,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_estimators: 100,
            tree: TreeConfig::default(),
            master_seed: 0,
            max_features: MaxFeatures::All,
            bootstrap: true,
            aggregation: Aggregation::Mean,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ForestModel {
    pub trees: Vec<DecisionTreeModel>,
    /// Bootstrap seed of each tree, derived from `(master_seed, i)`.
    pub tree_seeds: Vec<u64>,
    pub config: ForestConfig,
    pub target_dim: usize,
    pub n_features: usize,
}

/// Draw `n` indices uniformly with replacement from `[0, n)`. Deterministic
/// in `seed`; the out-of-bag set is the complement.
pub fn bootstrap_indices(n: usize, seed: u64) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::invalid("cannot bootstrap from 0 samples"));
    }
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| rng.gen_range(0..n)).collect())
}

/// The complement of a bootstrap draw: indices in `[0, n)` absent from
/// `in_bag`, ascending.
pub fn oob_indices(n: usize, in_bag: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; n];
    for &i in in_bag {
        seen[i] = true;
    }
    (0..n).filter(|&i| !seen[i]).collect()
}

/// Train `n_estimators` trees, each on its own bootstrap sample. Trees are
/// trained in parallel; the result does not depend on the worker count.
pub fn fit_forest(x: &DMatrix<f64>, y: &DMatrix<f64>, config: &ForestConfig) -> Result<ForestModel> {
    check_xy(x, y)?;
    if config.n_estimators == 0 {
        return Err(Error::invalid("n_estimators must be >= 1"));
    }
    let n = x.nrows();
    let p = x.ncols();
    let m_try = config.max_features.resolve(p)?;

    let tree_seeds: Vec<u64> = (0..config.n_estimators)
        .map(|i| derive_seed(config.master_seed, i as u64, purpose::BOOTSTRAP))
        .collect();

    let trees: Vec<DecisionTreeModel> = (0..config.n_estimators)
        .into_par_iter()
        .map(|i| {
            let samples = if config.bootstrap {
                bootstrap_indices(n, tree_seeds[i]).expect("n >= 1 checked above")
            } else {
                (0..n).collect()
            };
            let sampling = if m_try < p {
                Some((m_try, stream(config.master_seed, i as u64, purpose::FEATURE_SUBSET)))
            } else {
                None
            };
            fit_tree_on_samples(x, y, &config.tree, samples, sampling)
        })
        .collect();

    Ok(ForestModel {
        trees,
        tree_seeds,
        config: config.clone(),
        target_dim: y.ncols(),
        n_features: p,
    })
}

impl ForestModel {
    /// Aggregate per-tree predictions by mean or median, per target
    /// dimension. Rows may be predicted in parallel; each row combines the
    /// trees in index order, so results are worker-count independent.
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.n_features {
            return Err(Error::shape(format!(
                "forest was fit on {} features, input has {}",
                self.n_features,
                x.ncols()
            )));
        }
        let n = x.nrows();
        let d = self.target_dim;
        let t = self.trees.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut buf = vec![0.0; t];
                let mut out = vec![0.0; d];
                for k in 0..d {
                    for (ti, tree) in self.trees.iter().enumerate() {
                        buf[ti] = tree.predict_row(|j| x[(i, j)])[k];
                    }
                    out[k] = self.config.aggregation.combine(&mut buf);
                }
                out
            })
            .collect();
        let mut out = DMatrix::zeros(n, d);
        for (i, row) in rows.iter().enumerate() {
            for k in 0..d {
                out[(i, k)] = row[k];
            }
        }
        Ok(out)
    }
}

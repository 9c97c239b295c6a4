//! k-nearest-neighbor regression with the Euclidean metric.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{check_xy, Aggregation};

#[derive(Debug, Clone)]
pub struct KnnConfig {
    pub k: usize,
    pub aggregation: Aggregation,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig {
            k: 5,
            aggregation: Aggregation::Mean,
        }
    }
}

/// Stores the training set verbatim; prediction aggregates the targets of
/// the `k` nearest training rows, distance ties broken by the lower
/// training-row index.
#[derive(Debug, Clone)]
pub struct KnnModel {
    pub config: KnnConfig,
    train_x: DMatrix<f64>,
    train_y: DMatrix<f64>,
}

pub fn fit_knn(x: &DMatrix<f64>, y: &DMatrix<f64>, config: &KnnConfig) -> Result<KnnModel> {
    KnnModel::from_parts(config.clone(), x.clone(), y.clone())
}

impl KnnModel {
    pub(crate) fn from_parts(
        config: KnnConfig,
        train_x: DMatrix<f64>,
        train_y: DMatrix<f64>,
    ) -> Result<KnnModel> {
        check_xy(&train_x, &train_y)?;
        if config.k == 0 || config.k > train_x.nrows() {
            return Err(Error::invalid(format!(
                "k must be in 1..={}, got {}",
                train_x.nrows(),
                config.k
            )));
        }
        Ok(KnnModel {
            config,
            train_x,
            train_y,
        })
    }

    pub fn n_features(&self) -> usize {
        self.train_x.ncols()
    }

    pub fn target_dim(&self) -> usize {
        self.train_y.ncols()
    }

    pub fn n_train(&self) -> usize {
        self.train_x.nrows()
    }

    pub fn train_x(&self) -> &DMatrix<f64> {
        &self.train_x
    }

    pub fn train_y(&self) -> &DMatrix<f64> {
        &self.train_y
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.train_x.ncols() {
            return Err(Error::shape(format!(
                "knn was fit on {} features, input has {}",
                self.train_x.ncols(),
                x.ncols()
            )));
        }
        let n = x.nrows();
        let n_train = self.train_x.nrows();
        let p = self.train_x.ncols();
        let d = self.train_y.ncols();
        let k = self.config.k;

        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                // Squared distances keep the ordering; ties fall back to the
                // training-row index so the k-set is a total order.
                let mut dist: Vec<(f64, usize)> = (0..n_train)
                    .map(|t| {
                        let mut d2 = 0.0;
                        for j in 0..p {
                            let diff = x[(i, j)] - self.train_x[(t, j)];
                            d2 += diff * diff;
                        }
                        (d2, t)
                    })
                    .collect();
                let cmp = |a: &(f64, usize), b: &(f64, usize)| {
                    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
                };
                if k < n_train {
                    dist.select_nth_unstable_by(k - 1, cmp);
                }
                let neighbors = &mut dist[..k];
                neighbors.sort_by(cmp);

                let mut out = vec![0.0; d];
                let mut buf = vec![0.0; k];
                for dim in 0..d {
                    for (b, (_, t)) in buf.iter_mut().zip(neighbors.iter()) {
                        *b = self.train_y[(*t, dim)];
                    }
                    out[dim] = self.config.aggregation.combine(&mut buf);
                }
                out
            })
            .collect();

        let mut out = DMatrix::zeros(n, d);
        for (i, row) in rows.iter().enumerate() {
            for dim in 0..d {
                out[(i, dim)] = row[dim];
            }
        }
        Ok(out)
    }
}

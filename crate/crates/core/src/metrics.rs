//! Evaluation metrics and experiment summaries.
//!
//! DRMS here is the root-mean-square *3-D* distance between predicted and
//! true positions, `sqrt((1/n)·Σ‖pred−truth‖²)`. Navigation literature also
//! uses 2-D DRMS conventions; this crate always means the 3-D form.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Root-mean-square error of a scalar series.
pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::shape(format!(
            "rmse length mismatch: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::invalid("rmse of empty series"));
    }
    let ss: f64 = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok((ss / pred.len() as f64).sqrt())
}

/// Distance root-mean-square of n×3 position matrices.
pub fn drms(pred: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<f64> {
    if pred.shape() != truth.shape() {
        return Err(Error::shape(format!(
            "drms shape mismatch: {:?} vs {:?}",
            pred.shape(),
            truth.shape()
        )));
    }
    if pred.ncols() != 3 {
        return Err(Error::shape(format!(
            "drms expects n×3 positions, got {} columns",
            pred.ncols()
        )));
    }
    let n = pred.nrows();
    if n == 0 {
        return Err(Error::invalid("drms of empty series"));
    }
    let mut ss = 0.0;
    for i in 0..n {
        for j in 0..3 {
            let d = pred[(i, j)] - truth[(i, j)];
            ss += d * d;
        }
    }
    Ok((ss / n as f64).sqrt())
}

/// RMSE for 1-column targets, DRMS for 3-column targets.
pub fn score_matrix(pred: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<f64> {
    match truth.ncols() {
        1 => rmse(pred.as_slice(), truth.as_slice()),
        3 => drms(pred, truth),
        d => Err(Error::shape(format!("unsupported target dimension {d}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// Anomaly-field error in nanotesla.
    RmseNt,
    /// 3-D positioning error in meters.
    DrmsM,
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::RmseNt => "rmse_nT",
            MetricKind::DrmsM => "drms_m",
        }
    }
}

/// One evaluated (model, split, flight) measurement.
#[derive(Debug, Clone)]
pub struct EvalResult {
    pub split: Split,
    pub metric: MetricKind,
    pub value: f64,
    pub flight_ids: Vec<String>,
    pub model_tag: String,
    pub config_hash: String,
}

/// Mean/std aggregate of one `(model_tag, split)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model_tag: String,
    pub split: Split,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

/// Group results by `(model_tag, split)` and report mean and population
/// std per group. Every group must hold at least two results.
pub fn experiment_summary(results: &[EvalResult]) -> Result<Vec<SummaryRow>> {
    if results.is_empty() {
        return Err(Error::invalid("no results to summarize"));
    }
    let mut groups: BTreeMap<(String, Split), Vec<f64>> = BTreeMap::new();
    for r in results {
        groups
            .entry((r.model_tag.clone(), r.split))
            .or_default()
            .push(r.value);
    }
    let mut rows = Vec::with_capacity(groups.len());
    for ((tag, split), values) in groups {
        if values.len() < 2 {
            return Err(Error::invalid(format!(
                "group ({tag}, {}) has a single value; std undefined",
                split.name()
            )));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        rows.push(SummaryRow {
            model_tag: tag,
            split,
            mean,
            std: var.sqrt(),
            count: values.len(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn result(tag: &str, split: Split, value: f64) -> EvalResult {
        EvalResult {
            split,
            metric: MetricKind::DrmsM,
            value,
            flight_ids: vec!["f".into()],
            model_tag: tag.into(),
            config_hash: "h".into(),
        }
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(rmse(&[1.0, -1.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(rmse(&[3.0], &[0.0]).unwrap(), 3.0);
        assert!(rmse(&[], &[]).is_err());
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn drms_examples() {
        let truth = DMatrix::zeros(2, 3);
        assert_eq!(drms(&truth, &truth).unwrap(), 0.0);

        let pred = DMatrix::from_row_slice(2, 3, &[3.0, 4.0, 0.0, 0.0, 0.0, 0.0]);
        assert!((drms(&pred, &truth).unwrap() - 12.5f64.sqrt()).abs() < 1e-12);

        let single = DMatrix::from_row_slice(1, 3, &[0.0, 0.0, 5.0]);
        assert_eq!(drms(&single, &DMatrix::zeros(1, 3)).unwrap(), 5.0);

        assert!(drms(&DMatrix::zeros(2, 2), &DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn drms_squared_equals_mean_squared_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pred = DMatrix::from_fn(40, 3, |_, _| rng.gen_range(-10.0..10.0));
        let truth = DMatrix::from_fn(40, 3, |_, _| rng.gen_range(-10.0..10.0));
        let d = drms(&pred, &truth).unwrap();
        let mean_sq: f64 = (0..40)
            .map(|i| {
                (0..3)
                    .map(|j| (pred[(i, j)] - truth[(i, j)]).powi(2))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / 40.0;
        assert!((d * d - mean_sq).abs() < 1e-9);
    }

    #[test]
    fn metrics_invariant_under_common_translation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pred = DMatrix::from_fn(25, 3, |_, _| rng.gen_range(-5.0..5.0));
        let truth = DMatrix::from_fn(25, 3, |_, _| rng.gen_range(-5.0..5.0));
        let offset = DMatrix::from_fn(25, 3, |_, j| [100.0, -40.0, 7.0][j]);
        let base = drms(&pred, &truth).unwrap();
        let moved = drms(&(&pred + &offset), &(&truth + &offset)).unwrap();
        assert!((base - moved).abs() < 1e-9);
    }

    #[test]
    fn summary_mean_and_population_std() {
        let rows = experiment_summary(&[
            result("forest", Split::Test, 5.0),
            result("forest", Split::Test, 5.0),
            result("forest", Split::Test, 5.0),
            result("knn", Split::Test, 4.0),
            result("knn", Split::Test, 6.0),
        ])
        .unwrap();
        let forest = rows.iter().find(|r| r.model_tag == "forest").unwrap();
        assert_eq!(forest.mean, 5.0);
        assert_eq!(forest.std, 0.0);
        let knn = rows.iter().find(|r| r.model_tag == "knn").unwrap();
        assert_eq!(knn.mean, 5.0);
        assert_eq!(knn.std, 1.0);
    }

    #[test]
    fn summary_rejects_singleton_group() {
        let err = experiment_summary(&[result("forest", Split::Test, 5.0)]).unwrap_err();
        assert!(matches!(err, Error::InvalidArg(_)));
    }
}

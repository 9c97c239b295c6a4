//! Forward sequential feature selection, permutation/drop importance, and
//! the `max_depth` grid sweep.
//!
//! All cross-validation here uses contiguous time blocks, never shuffled
//! folds: the rows are time series, and shuffling would leak adjacent
//! samples between train and test.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::dataset::{FlightFrame, TargetKind, TargetSpec, TARGET_EQUIVALENT_FEATURES};
use crate::error::{Error, Result};
use crate::metrics::score_matrix;
use crate::models::{ForestConfig, Model, ModelConfig};
use crate::preprocess::{apply_scaler, fit_scaler, ScalerKind};
use crate::rng::{purpose, stream};

/// Estimator budget used while searching; the final model is refit at the
/// full configuration afterwards.
const SFS_MAX_ESTIMATORS: usize = 25;

#[derive(Debug, Clone, Copy)]
pub struct CvConfig {
    /// Number of contiguous blocks.
    pub folds: usize,
    pub scaler: ScalerKind,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 5,
            scaler: ScalerKind::MinMax,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SelectionStep {
    pub feature: String,
    /// Mean cross-validated score (RMSE or DRMS) after adding the feature.
    pub cv_score: f64,
}

#[derive(Debug, Clone)]
pub struct SelectionReport {
    pub steps: Vec<SelectionStep>,
    pub selected: Vec<String>,
    pub folds: usize,
}

/// Mean blocked-CV score of a feature set: each fold holds out one
/// contiguous block, fits the scaler on the remaining rows, trains, and
/// scores the held-out block.
pub fn cv_score(
    frame: &FlightFrame,
    features: &[String],
    target: &TargetSpec,
    model: &ModelConfig,
    cv: &CvConfig,
) -> Result<f64> {
    let n = frame.n_rows();
    if cv.folds < 2 || cv.folds > n {
        return Err(Error::invalid(format!(
            "folds must be in 2..={n}, got {}",
            cv.folds
        )));
    }
    let x = frame.matrix(features)?;
    let y = target.matrix(frame)?;

    let mut total = 0.0;
    for fold in 0..cv.folds {
        let lo = fold * n / cv.folds;
        let hi = (fold + 1) * n / cv.folds;
        let test_rows: Vec<usize> = (lo..hi).collect();
        let train_rows: Vec<usize> = (0..lo).chain(hi..n).collect();

        let x_train = gather_rows(&x, &train_rows);
        let y_train = gather_rows(&y, &train_rows);
        let x_test = gather_rows(&x, &test_rows);
        let y_test = gather_rows(&y, &test_rows);

        let scaler = fit_scaler(&x_train, cv.scaler)?;
        let x_train = apply_scaler(&scaler, &x_train)?;
        let x_test = apply_scaler(&scaler, &x_test)?;

        let fitted = Model::fit(model, &x_train, &y_train)?;
        let pred = fitted.predict(&x_test)?;
        total += score_matrix(&pred, &y_test)?;
    }
    Ok(total / cv.folds as f64)
}

fn gather_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

/// Greedy forward selection: at each step add the candidate that minimizes
/// the cross-validated score, stopping at `max_features` or when no
/// candidate strictly improves. Forest searches run with at most
/// [`SFS_MAX_ESTIMATORS`] trees.
pub fn forward_sfs(
    frame: &FlightFrame,
    candidates: &[String],
    target: &TargetSpec,
    model: &ModelConfig,
    max_features: usize,
    cv: &CvConfig,
) -> Result<SelectionReport> {
    if candidates.is_empty() {
        return Err(Error::invalid("candidate list is empty"));
    }
    if max_features == 0 {
        return Err(Error::invalid("max_features must be >= 1"));
    }
    for name in candidates {
        if !frame.has_column(name) {
            return Err(Error::UnknownFeature(name.clone()));
        }
        if target.kind() == TargetKind::Position3d
            && TARGET_EQUIVALENT_FEATURES.contains(&name.as_str())
        {
            return Err(Error::TargetEquivalentFeature(name.clone()));
        }
    }
    target.validate(frame)?;

    let search_model = capped_model(model);
    let mut remaining: Vec<String> = candidates.to_vec();
    let mut selected: Vec<String> = Vec::new();
    let mut steps: Vec<SelectionStep> = Vec::new();
    let mut best_score = f64::INFINITY;

    while selected.len() < max_features && !remaining.is_empty() {
        let scores: Vec<Result<f64>> = remaining
            .par_iter()
            .map(|candidate| {
                let mut trial = selected.clone();
                trial.push(candidate.clone());
                cv_score(frame, &trial, target, &search_model, cv)
            })
            .collect();

        let mut winner: Option<(usize, f64)> = None;
        for (i, score) in scores.into_iter().enumerate() {
            let score = score?;
            if winner.map_or(true, |(_, s)| score < s) {
                winner = Some((i, score));
            }
        }
        let (idx, score) = winner.expect("remaining is non-empty");
        if score >= best_score {
            break;
        }
        best_score = score;
        let feature = remaining.remove(idx);
        selected.push(feature.clone());
        steps.push(SelectionStep {
            feature,
            cv_score: score,
        });
    }

    Ok(SelectionReport {
        steps,
        selected,
        folds: cv.folds,
    })
}

fn capped_model(model: &ModelConfig) -> ModelConfig {
    match model {
        ModelConfig::Forest(f) => {
            let mut capped = f.clone();
            capped.n_estimators = capped.n_estimators.min(SFS_MAX_ESTIMATORS);
            ModelConfig::Forest(capped)
        }
        other => other.clone(),
    }
}

// ── Importance ───────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImportanceMode {
    Permutation,
    Drop,
    Both,
}

#[derive(Debug, Clone, Copy)]
pub struct ImportanceSpec {
    pub mode: ImportanceMode,
    pub repeats: usize,
    pub seed: u64,
    pub scaler: ScalerKind,
}

impl Default for ImportanceSpec {
    fn default() -> Self {
        ImportanceSpec {
            mode: ImportanceMode::Both,
            repeats: 5,
            seed: 0,
            scaler: ScalerKind::MinMax,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ImportanceEntry {
    pub feature: String,
    /// Mean test-score increase over `repeats` shuffles of this feature.
    pub permutation_delta: Option<f64>,
    /// Spread of the per-repeat permutation deltas (population std).
    pub permutation_std: Option<f64>,
    /// Test-score increase after retraining without this feature.
    pub drop_delta: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ImportanceReport {
    /// Test score of the model trained on all listed features.
    pub baseline: f64,
    pub entries: Vec<ImportanceEntry>,
    pub repeats: usize,
    pub seed: u64,
}

/// Permutation and drop-column importance against a held-out test frame.
///
/// The baseline model is fit on `train` over `features` (scaler fit on the
/// training rows). Permutation shuffles one test column at a time; drop
/// retrains without the feature. Deltas may be negative when removing a
/// feature helps.
pub fn feature_importance(
    train: &FlightFrame,
    test: &FlightFrame,
    model: &ModelConfig,
    features: &[String],
    target: &TargetSpec,
    spec: &ImportanceSpec,
) -> Result<ImportanceReport> {
    if features.is_empty() {
        return Err(Error::invalid("feature list is empty"));
    }
    if spec.repeats == 0 {
        return Err(Error::invalid("repeats must be >= 1"));
    }
    for name in features {
        if !train.has_column(name) || !test.has_column(name) {
            return Err(Error::UnknownFeature(name.clone()));
        }
    }
    let drop_requested = matches!(spec.mode, ImportanceMode::Drop | ImportanceMode::Both);
    if drop_requested && features.len() < 2 {
        return Err(Error::invalid(
            "drop importance needs at least 2 features (dropping the only feature leaves an empty set)",
        ));
    }

    let x_train_raw = train.matrix(features)?;
    let y_train = target.matrix(train)?;
    let x_test_raw = test.matrix(features)?;
    let y_test = target.matrix(test)?;

    let scaler = fit_scaler(&x_train_raw, spec.scaler)?;
    let x_train = apply_scaler(&scaler, &x_train_raw)?;
    let x_test = apply_scaler(&scaler, &x_test_raw)?;

    let fitted = Model::fit(model, &x_train, &y_train)?;
    let baseline = score_matrix(&fitted.predict(&x_test)?, &y_test)?;

    let permutation_requested =
        matches!(spec.mode, ImportanceMode::Permutation | ImportanceMode::Both);

    let entries: Vec<Result<ImportanceEntry>> = (0..features.len())
        .into_par_iter()
        .map(|j| {
            let mut permutation_delta = None;
            let mut permutation_std = None;
            if permutation_requested {
                let mut deltas = Vec::with_capacity(spec.repeats);
                for r in 0..spec.repeats {
                    let mut rng =
                        stream(spec.seed, (j as u64) << 20 | r as u64, purpose::PERMUTE);
                    let mut column: Vec<f64> =
                        (0..x_test.nrows()).map(|i| x_test[(i, j)]).collect();
                    column.shuffle(&mut rng);
                    let mut shuffled = x_test.clone();
                    for (i, v) in column.into_iter().enumerate() {
                        shuffled[(i, j)] = v;
                    }
                    let score = score_matrix(&fitted.predict(&shuffled)?, &y_test)?;
                    deltas.push(score - baseline);
                }
                let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
                let var = deltas.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>()
                    / deltas.len() as f64;
                permutation_delta = Some(mean);
                permutation_std = Some(var.sqrt());
            }

            let mut drop_delta = None;
            if drop_requested {
                let reduced: Vec<String> = features
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != j)
                    .map(|(_, f)| f.clone())
                    .collect();
                let xr_train_raw = train.matrix(&reduced)?;
                let xr_test_raw = test.matrix(&reduced)?;
                let r_scaler = fit_scaler(&xr_train_raw, spec.scaler)?;
                let xr_train = apply_scaler(&r_scaler, &xr_train_raw)?;
                let xr_test = apply_scaler(&r_scaler, &xr_test_raw)?;
                let refit = Model::fit(model, &xr_train, &y_train)?;
                let score = score_matrix(&refit.predict(&xr_test)?, &y_test)?;
                drop_delta = Some(score - baseline);
            }

            Ok(ImportanceEntry {
                feature: features[j].clone(),
                permutation_delta,
                permutation_std,
                drop_delta,
            })
        })
        .collect();

    let entries = entries.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ImportanceReport {
        baseline,
        entries,
        repeats: spec.repeats,
        seed: spec.seed,
    })
}

// ── max_depth sweep ──────────────────────────────────────────────────────

/// Cross-validate the forest at each depth and return the best depth with
/// the full score curve. Ties go to the smallest depth.
pub fn tune_max_depth(
    frame: &FlightFrame,
    features: &[String],
    target: &TargetSpec,
    base: &ForestConfig,
    depths: &[usize],
    cv: &CvConfig,
) -> Result<(usize, Vec<(usize, f64)>)> {
    if depths.is_empty() {
        return Err(Error::invalid("depth list is empty"));
    }
    if depths.iter().any(|&d| d == 0) {
        return Err(Error::invalid("depths must be >= 1"));
    }
    let scores: Vec<Result<f64>> = depths
        .par_iter()
        .map(|&depth| {
            let mut config = base.clone();
            config.tree.max_depth = Some(depth);
            cv_score(frame, features, target, &ModelConfig::Forest(config), cv)
        })
        .collect();

    let mut curve = Vec::with_capacity(depths.len());
    for (&depth, score) in depths.iter().zip(scores) {
        curve.push((depth, score?));
    }
    let mut best = curve[0];
    for &(depth, score) in &curve[1..] {
        if score < best.1 || (score == best.1 && depth < best.0) {
            best = (depth, score);
        }
    }
    Ok((best.0, curve))
}

//! Subcommand implementations. Each writes its artifacts under the config's
//! output directory; evaluation results additionally append to the ledger.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use magnav::nalgebra::DMatrix;

use magnav::dataset::{
    chronological_split, impute_missing, load_flight, mask_outliers, FlightFrame, SplitMode,
    SplitSpec, TargetKind, TargetSpec, TARGET_EQUIVALENT_FEATURES,
};
use magnav::metrics::score_matrix;
use magnav::models::{load_model, save_model, Model};
use magnav::pca::{fit_pca, project};
use magnav::preprocess::{apply_scaler, correlation_matrix, fit_scaler, variance_filter, ScalerKind, ScalerParams};
use magnav::selection::{
    feature_importance, forward_sfs, tune_max_depth, CvConfig, ImportanceMode, ImportanceSpec,
};
use magnav::synth::{gen_flight, write_truth};
use magnav::textio::{fmt_f64, parse_f64};
use magnav::tolles_lawson::{compensate, fit_tl, load_tl, save_tl, BandPass, TlOptions};

use crate::config::RunConfig;
use crate::ledger::{self, LedgerRow};
use crate::plot;

/// Config/validation problems exit with code 2, runtime failures with 1.
pub enum CliError {
    Config(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<magnav::Error> for CliError {
    fn from(e: magnav::Error) -> Self {
        CliError::Runtime(anyhow::Error::new(e))
    }
}

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

type CliResult<T = ()> = Result<T, CliError>;

// ── Shared pipeline pieces ───────────────────────────────────────────────

/// Load the configured flight, verify every needed column up front (naming
/// all missing ones), mask outliers, and impute.
fn load_clean(config: &RunConfig, required: &[String]) -> CliResult<FlightFrame> {
    let path = config.flight_path();
    if !path.exists() {
        return Err(config_err(format!(
            "input flight file {} does not exist (run `synth` or set data.flight)",
            path.display()
        )));
    }
    let raw = load_flight(&path, &[])?;
    let missing: Vec<&str> = required
        .iter()
        .map(|s| s.as_str())
        .filter(|name| !raw.has_column(name))
        .collect();
    if !missing.is_empty() {
        return Err(config_err(format!(
            "{} is missing required columns: {}",
            path.display(),
            missing.join(", ")
        )));
    }
    let (masked, _) = mask_outliers(&raw, config.preprocess.outlier_iqr_multiple)?;
    Ok(impute_missing(&masked)?)
}

fn required_columns(config: &RunConfig) -> CliResult<Vec<String>> {
    let mut required = config.feature_list().map_err(config_err)?;
    let target = config.target_spec().map_err(config_err)?;
    for c in target.column_names() {
        if !required.contains(c) {
            required.push(c.clone());
        }
    }
    Ok(required)
}

struct SplitData {
    train: FlightFrame,
    test: FlightFrame,
    features: Vec<String>,
    target: TargetSpec,
    scaler_kind: ScalerKind,
}

struct ModelData {
    x_train: DMatrix<f64>,
    x_test: DMatrix<f64>,
    y_train: DMatrix<f64>,
    y_test: DMatrix<f64>,
    flight_id: String,
}

fn split_pipeline(config: &RunConfig) -> CliResult<SplitData> {
    let features = config.feature_list().map_err(config_err)?;
    let target = config.target_spec().map_err(config_err)?;
    let frame = load_clean(config, &required_columns(config)?)?;
    let spec = SplitSpec {
        test_fraction: config.split.test_fraction,
        mode: SplitMode::ChronologicalTail,
    };
    let (train, test) = chronological_split(&frame, &spec)?;
    Ok(SplitData {
        train,
        test,
        features,
        target,
        scaler_kind: config.scaler_kind().map_err(config_err)?,
    })
}

/// Scale with statistics fit on the training rows only.
fn model_matrices(data: &SplitData) -> CliResult<(ModelData, ScalerParams)> {
    let x_train_raw = data.train.matrix(&data.features)?;
    let x_test_raw = data.test.matrix(&data.features)?;
    let scaler = fit_scaler(&x_train_raw, data.scaler_kind)?;
    Ok((
        ModelData {
            x_train: apply_scaler(&scaler, &x_train_raw)?,
            x_test: apply_scaler(&scaler, &x_test_raw)?,
            y_train: data.target.matrix(&data.train)?,
            y_test: data.target.matrix(&data.test)?,
            flight_id: data.train.flight_id().to_string(),
        },
        scaler,
    ))
}

fn metric_name(target: &TargetSpec) -> &'static str {
    match target.kind() {
        TargetKind::AnomalyField => "rmse_nT",
        TargetKind::Position3d => "drms_m",
    }
}

fn write_text(path: &Path, content: &str) -> CliResult {
    std::fs::write(path, content)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(CliError::from)
}

// ── synth ────────────────────────────────────────────────────────────────

pub fn cmd_synth(config: &RunConfig) -> CliResult {
    let synth_config = config.synth_config().map_err(config_err)?;
    let flight = gen_flight(&synth_config)?;
    let flight_path = config.out_dir.join("flight.csv");
    let truth_path = config.out_dir.join("truth.txt");
    flight.frame.write_csv(&flight_path)?;
    write_truth(&flight.truth, &truth_path)?;
    println!(
        "synth: wrote {} ({} rows, {} columns) and {}",
        flight_path.display(),
        flight.frame.n_rows(),
        flight.frame.n_columns(),
        truth_path.display()
    );
    Ok(())
}

// ── preprocess ───────────────────────────────────────────────────────────

pub fn cmd_preprocess(config: &RunConfig) -> CliResult {
    let data = split_pipeline(config)?;
    let frame = data.train.concat(&data.test)?;

    // Audit columns: everything except the time index and target columns.
    let target_cols = data.target.column_names();
    let audit: Vec<String> = frame
        .names()
        .iter()
        .filter(|n| n.as_str() != "t" && !target_cols.contains(n))
        .cloned()
        .collect();

    // The variance table is a dataset-level audit, so the normalization
    // pools every row; model paths always refit on training rows only.
    let matrix = frame.matrix(&audit)?;
    let pooled = fit_scaler(&matrix, ScalerKind::MinMax)?;
    let normalized = apply_scaler(&pooled, &matrix)?;
    let report = variance_filter(&normalized, &audit, config.preprocess.variance_threshold)?;

    let mut variance_csv = String::from("feature,std,excluded\n");
    for (name, std) in &report.stds {
        let excluded = report.excluded.contains(name);
        writeln!(variance_csv, "{name},{},{excluded}", fmt_f64(*std)).unwrap();
    }
    write_text(&config.out_dir.join("variance_report.csv"), &variance_csv)?;

    // Correlation over the active feature set.
    let feature_matrix = frame.matrix(&data.features)?;
    let pooled_features = fit_scaler(&feature_matrix, data.scaler_kind)?;
    let corr = correlation_matrix(&apply_scaler(&pooled_features, &feature_matrix)?)?;
    let mut corr_csv = String::from("feature");
    for f in &data.features {
        write!(corr_csv, ",{f}").unwrap();
    }
    corr_csv.push('\n');
    for (i, f) in data.features.iter().enumerate() {
        write!(corr_csv, "{f}").unwrap();
        for j in 0..data.features.len() {
            write!(corr_csv, ",{}", fmt_f64(corr.matrix[(i, j)])).unwrap();
        }
        corr_csv.push('\n');
    }
    write_text(&config.out_dir.join("correlation.csv"), &corr_csv)?;

    data.train.write_csv(config.out_dir.join("train.csv"))?;
    data.test.write_csv(config.out_dir.join("test.csv"))?;

    println!(
        "preprocess: {} of {} audited features excluded below variance {}; wrote variance_report.csv, correlation.csv, train.csv, test.csv",
        report.excluded.len(),
        audit.len(),
        config.preprocess.variance_threshold
    );
    Ok(())
}

// ── select-features ──────────────────────────────────────────────────────

pub fn cmd_select_features(config: &RunConfig) -> CliResult {
    let target = config.target_spec().map_err(config_err)?;
    let candidates = if config.sfs.candidates.is_empty() {
        default_candidates(config, &target)?
    } else {
        config.sfs.candidates.clone()
    };
    let frame = load_clean(config, &{
        let mut req = candidates.clone();
        req.extend(target.column_names().iter().cloned());
        req
    })?;
    let cv = CvConfig {
        folds: config.sfs.folds,
        scaler: config.scaler_kind().map_err(config_err)?,
    };
    let model = config.model_config().map_err(config_err)?;
    let report = forward_sfs(&frame, &candidates, &target, &model, config.sfs.max_features, &cv)?;

    let mut csv = String::from("step,feature,cv_score\n");
    for (i, step) in report.steps.iter().enumerate() {
        writeln!(csv, "{},{},{}", i + 1, step.feature, fmt_f64(step.cv_score)).unwrap();
    }
    write_text(&config.out_dir.join("sfs_report.csv"), &csv)?;
    println!(
        "select-features: chose {} of {} candidates: {}",
        report.selected.len(),
        candidates.len(),
        report.selected.join(", ")
    );
    Ok(())
}

/// All sensor columns, minus time, targets, synthetic truth columns, and
/// (for position targets) the target-equivalent INS position channels.
fn default_candidates(config: &RunConfig, target: &TargetSpec) -> CliResult<Vec<String>> {
    let path = config.flight_path();
    if !path.exists() {
        return Err(config_err(format!(
            "input flight file {} does not exist",
            path.display()
        )));
    }
    let raw = load_flight(&path, &[])?;
    let target_cols = target.column_names();
    let truth_cols = ["t", "anomaly", "core", "aircraft_tl", "utm_x", "utm_y", "utm_z"];
    Ok(raw
        .names()
        .iter()
        .filter(|n| !target_cols.contains(n))
        .filter(|n| !truth_cols.contains(&n.as_str()))
        .filter(|n| {
            target.kind() != TargetKind::Position3d
                || !TARGET_EQUIVALENT_FEATURES.contains(&n.as_str())
        })
        .cloned()
        .collect())
}

// ── pca ──────────────────────────────────────────────────────────────────

pub fn cmd_pca(config: &RunConfig) -> CliResult {
    let data = split_pipeline(config)?;
    let (matrices, _) = model_matrices(&data)?;
    let p = data.features.len();
    let k_max = p.min(matrices.x_train.nrows().saturating_sub(1));
    let k = config.pca.components.min(k_max).max(1);
    let model = fit_pca(&matrices.x_train, k)?;

    let mut model_txt = String::from("magnav-pca v1\n");
    writeln!(model_txt, "n_features {p}").unwrap();
    writeln!(model_txt, "n_components {k}").unwrap();
    for j in 0..p {
        writeln!(model_txt, "mean {} {}", data.features[j], fmt_f64(model.mean[j])).unwrap();
    }
    for c in 0..k {
        write!(model_txt, "component {c} {}", fmt_f64(model.explained_variance[c])).unwrap();
        for j in 0..p {
            write!(model_txt, " {}", fmt_f64(model.components[(c, j)])).unwrap();
        }
        model_txt.push('\n');
    }
    model_txt.push_str("end\n");
    write_text(&config.out_dir.join("pca_model.txt"), &model_txt)?;

    // Scores for the whole flight with the normalized-distance color column.
    let n_train = matrices.x_train.nrows();
    let n_test = matrices.x_test.nrows();
    let x_all = DMatrix::from_fn(n_train + n_test, p, |i, j| {
        if i < n_train {
            matrices.x_train[(i, j)]
        } else {
            matrices.x_test[(i - n_train, j)]
        }
    });
    let scores = project(&model, &x_all)?;
    let norms: Vec<f64> = (0..scores.nrows())
        .map(|i| (0..k).map(|j| scores[(i, j)].powi(2)).sum::<f64>().sqrt())
        .collect();
    let max_norm = norms.iter().cloned().fold(0.0f64, f64::max).max(1e-300);

    let mut csv = String::from(
        (1..=k).map(|i| format!("pc{i}")).collect::<Vec<_>>().join(",") + ",norm_dist\n",
    );
    for i in 0..scores.nrows() {
        for j in 0..k {
            if j > 0 {
                csv.push(',');
            }
            csv.push_str(&fmt_f64(scores[(i, j)]));
        }
        writeln!(csv, ",{}", fmt_f64(norms[i] / max_norm)).unwrap();
    }
    write_text(&config.out_dir.join("pca_scores.csv"), &csv)?;

    let total: f64 = model.explained_variance.iter().sum();
    println!(
        "pca: {k} components, leading explained-variance ratio {:.3}; wrote pca_model.txt, pca_scores.csv",
        model.explained_variance.first().map_or(0.0, |v| v / total.max(1e-300))
    );
    Ok(())
}

// ── tl-fit / tl-apply ────────────────────────────────────────────────────

pub fn cmd_tl_fit(config: &RunConfig) -> CliResult {
    let mut required = vec![config.tl.scalar_column.clone()];
    required.extend(config.tl.fluxgate.iter().cloned());
    let frame = load_clean(config, &required)?;
    let scalar = frame.column(&config.tl.scalar_column)?;
    let flux = frame.matrix(&config.tl.fluxgate)?;
    let options = TlOptions {
        ridge: config.tl.ridge,
        band_pass: config.tl.band_pass.then(BandPass::default),
    };
    let coeffs = fit_tl(scalar, &flux, frame.sample_period(), &options)?;
    let path = config.out_dir.join("tl_model.txt");
    save_tl(&coeffs, &path)?;
    println!(
        "tl-fit: fitted 18 coefficients from `{}`; wrote {}",
        config.tl.scalar_column,
        path.display()
    );
    Ok(())
}

pub fn cmd_tl_apply(config: &RunConfig) -> CliResult {
    let mut required = config.tl.apply_to.clone();
    required.extend(config.tl.fluxgate.iter().cloned());
    let frame = load_clean(config, &required)?;
    let coeffs = load_tl(config.out_dir.join("tl_model.txt"))?;
    let flux = frame.matrix(&config.tl.fluxgate)?;

    let mut columns: Vec<(String, Vec<f64>)> = frame
        .names()
        .iter()
        .map(|n| Ok((n.clone(), frame.column(n)?.to_vec())))
        .collect::<Result<_, magnav::Error>>()?;
    let mut replaced = 0usize;
    for column in &config.tl.apply_to {
        let compensated = compensate(frame.column(column)?, &flux, frame.sample_period(), &coeffs)?;
        let new_name = match column.strip_suffix("_uc") {
            Some(stem) => format!("{stem}_c"),
            None => format!("{column}_c"),
        };
        if let Some(slot) = columns.iter_mut().find(|(n, _)| *n == new_name) {
            slot.1 = compensated;
            replaced += 1;
        } else {
            columns.push((new_name, compensated));
        }
    }
    let out = FlightFrame::new(frame.flight_id().to_string(), frame.sample_period(), columns)?;
    let path = config.out_dir.join("flight_tl.csv");
    out.write_csv(&path)?;
    if replaced > 0 {
        println!("tl-apply: replaced {replaced} existing compensated columns");
    }
    println!(
        "tl-apply: compensated {} columns; wrote {}",
        config.tl.apply_to.len(),
        path.display()
    );
    Ok(())
}

// ── train / evaluate ─────────────────────────────────────────────────────

pub fn cmd_train(config: &RunConfig) -> CliResult {
    let data = split_pipeline(config)?;
    let (matrices, _) = model_matrices(&data)?;
    let model_config = config.model_config().map_err(config_err)?;
    let model = Model::fit(&model_config, &matrices.x_train, &matrices.y_train)?;

    let model_path = config.out_dir.join("model.txt");
    save_model(&model, &model_path)?;

    let train_pred = model.predict(&matrices.x_train)?;
    let train_score = score_matrix(&train_pred, &matrices.y_train)?;
    ledger::append(
        &config.out_dir,
        &[LedgerRow {
            timestamp: ledger::now_epoch_seconds(),
            flight_id: matrices.flight_id.clone(),
            model: model.tag().to_string(),
            split: "train".to_string(),
            metric: metric_name(&data.target).to_string(),
            value: train_score,
            config_hash: config.config_hash(),
        }],
    )?;
    println!(
        "train: {} fitted on {} rows x {} features; train {} = {:.4}; wrote {}",
        model.tag(),
        matrices.x_train.nrows(),
        data.features.len(),
        metric_name(&data.target),
        train_score,
        model_path.display()
    );
    Ok(())
}

pub fn cmd_evaluate(
    config: &RunConfig,
    model_path: Option<PathBuf>,
    pred: Option<PathBuf>,
    truth: Option<PathBuf>,
) -> CliResult {
    if let (Some(pred), Some(truth)) = (pred.as_ref(), truth.as_ref()) {
        return evaluate_files(config, pred, truth);
    }
    if pred.is_some() != truth.is_some() {
        return Err(config_err("--pred and --truth must be given together"));
    }

    let data = split_pipeline(config)?;
    let (matrices, _) = model_matrices(&data)?;
    let path = model_path.unwrap_or_else(|| config.out_dir.join("model.txt"));
    if !path.exists() {
        return Err(config_err(format!(
            "model file {} does not exist (run `train` first or pass --model)",
            path.display()
        )));
    }
    let model = load_model(&path)?;
    if model.n_features() != data.features.len() {
        return Err(config_err(format!(
            "model at {} expects {} features but the config selects {}",
            path.display(),
            model.n_features(),
            data.features.len()
        )));
    }

    let train_score = score_matrix(&model.predict(&matrices.x_train)?, &matrices.y_train)?;
    let test_pred = model.predict(&matrices.x_test)?;
    let test_score = score_matrix(&test_pred, &matrices.y_test)?;

    let hash = config.config_hash();
    let stamp = ledger::now_epoch_seconds();
    ledger::append(
        &config.out_dir,
        &[
            LedgerRow {
                timestamp: stamp,
                flight_id: matrices.flight_id.clone(),
                model: model.tag().to_string(),
                split: "train".to_string(),
                metric: metric_name(&data.target).to_string(),
                value: train_score,
                config_hash: hash.clone(),
            },
            LedgerRow {
                timestamp: stamp,
                flight_id: matrices.flight_id.clone(),
                model: model.tag().to_string(),
                split: "test".to_string(),
                metric: metric_name(&data.target).to_string(),
                value: test_score,
                config_hash: hash,
            },
        ],
    )?;

    // Held-out predictions next to the truth for audit.
    let mut csv = String::new();
    let d = data.target.dim();
    for j in 0..d {
        if j > 0 {
            csv.push(',');
        }
        write!(csv, "pred_{}", data.target.column_names()[j]).unwrap();
    }
    for j in 0..d {
        write!(csv, ",true_{}", data.target.column_names()[j]).unwrap();
    }
    csv.push('\n');
    for i in 0..test_pred.nrows() {
        for j in 0..d {
            if j > 0 {
                csv.push(',');
            }
            csv.push_str(&fmt_f64(test_pred[(i, j)]));
        }
        for j in 0..d {
            write!(csv, ",{}", fmt_f64(matrices.y_test[(i, j)])).unwrap();
        }
        csv.push('\n');
    }
    write_text(&config.out_dir.join("predictions.csv"), &csv)?;

    println!(
        "evaluate: {} {} train = {:.4}, test = {:.4}",
        model.tag(),
        metric_name(&data.target),
        train_score,
        test_score
    );
    Ok(())
}

/// Compare a predictions file against a truth file on the target columns.
fn evaluate_files(config: &RunConfig, pred_path: &Path, truth_path: &Path) -> CliResult {
    let target = config.target_spec().map_err(config_err)?;
    let columns: Vec<&str> = target.column_names().iter().map(|s| s.as_str()).collect();
    let pred = load_flight(pred_path, &columns)?;
    let truth = load_flight(truth_path, &columns)?;
    let p = target.matrix(&pred)?;
    let t = target.matrix(&truth)?;
    let value = score_matrix(&p, &t)?;
    ledger::append(
        &config.out_dir,
        &[LedgerRow {
            timestamp: ledger::now_epoch_seconds(),
            flight_id: pred.flight_id().to_string(),
            model: "file".to_string(),
            split: "test".to_string(),
            metric: metric_name(&target).to_string(),
            value,
            config_hash: config.config_hash(),
        }],
    )?;
    println!("evaluate: {} = {}", metric_name(&target), fmt_f64(value));
    Ok(())
}

// ── importance / tune ────────────────────────────────────────────────────

pub fn cmd_importance(config: &RunConfig) -> CliResult {
    let data = split_pipeline(config)?;
    let mode = match config.importance.mode.as_str() {
        "permutation" => ImportanceMode::Permutation,
        "drop" => ImportanceMode::Drop,
        "both" => ImportanceMode::Both,
        other => {
            return Err(config_err(format!(
                "importance.mode must be permutation|drop|both, got `{other}`"
            )))
        }
    };
    let report = feature_importance(
        &data.train,
        &data.test,
        &config.model_config().map_err(config_err)?,
        &data.features,
        &data.target,
        &ImportanceSpec {
            mode,
            repeats: config.importance.repeats,
            seed: config.seed,
            scaler: data.scaler_kind,
        },
    )?;

    let fmt_opt = |v: Option<f64>| v.map_or(String::new(), fmt_f64);
    let mut csv = String::from("feature,baseline,permutation_delta,permutation_std,drop_delta\n");
    for e in &report.entries {
        writeln!(
            csv,
            "{},{},{},{},{}",
            e.feature,
            fmt_f64(report.baseline),
            fmt_opt(e.permutation_delta),
            fmt_opt(e.permutation_std),
            fmt_opt(e.drop_delta)
        )
        .unwrap();
    }
    write_text(&config.out_dir.join("importance_report.csv"), &csv)?;
    println!(
        "importance: baseline {} = {:.4} over {} features; wrote importance_report.csv",
        metric_name(&data.target),
        report.baseline,
        report.entries.len()
    );
    Ok(())
}

pub fn cmd_tune(config: &RunConfig) -> CliResult {
    let features = config.feature_list().map_err(config_err)?;
    let target = config.target_spec().map_err(config_err)?;
    let frame = load_clean(config, &required_columns(config)?)?;
    let cv = CvConfig {
        folds: config.tune.folds,
        scaler: config.scaler_kind().map_err(config_err)?,
    };
    let base = config.forest_config().map_err(config_err)?;
    let (best, curve) = tune_max_depth(&frame, &features, &target, &base, &config.tune.depths, &cv)?;

    let mut csv = String::from("max_depth,cv_score\n");
    for (depth, score) in &curve {
        writeln!(csv, "{depth},{}", fmt_f64(*score)).unwrap();
    }
    write_text(&config.out_dir.join("tune_curve.csv"), &csv)?;
    println!("tune: best max_depth = {best}; wrote tune_curve.csv");
    Ok(())
}

// ── report ───────────────────────────────────────────────────────────────

pub fn cmd_report(config: &RunConfig) -> CliResult {
    let rows = ledger::read(&config.out_dir)?;
    if rows.is_empty() {
        return Err(CliError::Runtime(anyhow!("ledger is empty; nothing to report")));
    }
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(String, String, String), Vec<f64>> = BTreeMap::new();
    for row in &rows {
        groups
            .entry((row.model.clone(), row.split.clone(), row.metric.clone()))
            .or_default()
            .push(row.value);
    }
    let mut csv = String::from("model,split,metric,count,mean,std\n");
    println!("model      split  metric   count  mean        std");
    for ((model, split, metric), values) in groups {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() >= 2 {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            Some(var.sqrt())
        } else {
            None
        };
        writeln!(
            csv,
            "{model},{split},{metric},{},{},{}",
            values.len(),
            fmt_f64(mean),
            std.map_or(String::new(), fmt_f64)
        )
        .unwrap();
        println!(
            "{model:<10} {split:<6} {metric:<8} {:<6} {mean:<11.4} {}",
            values.len(),
            std.map_or("-".to_string(), |s| format!("{s:.4}"))
        );
    }
    write_text(&config.out_dir.join("summary.csv"), &csv)?;
    Ok(())
}

// ── plot ─────────────────────────────────────────────────────────────────

pub fn cmd_plot(config: &RunConfig, kind: Option<String>) -> CliResult {
    let kinds: Vec<String> = match kind {
        Some(k) => vec![k],
        None => ["importance", "tune", "correlation", "pca"]
            .iter()
            .filter(|k| report_input(config, k).exists())
            .map(|k| k.to_string())
            .collect(),
    };
    if kinds.is_empty() {
        return Err(config_err(
            "no report files found to plot; run the analysis subcommands first",
        ));
    }
    for kind in &kinds {
        let input = report_input(config, kind);
        if !input.exists() {
            return Err(config_err(format!(
                "missing {} (run the matching subcommand first)",
                input.display()
            )));
        }
        let output = config.out_dir.join(format!("{kind}.png"));
        match kind.as_str() {
            "importance" => plot_importance(&input, &output)?,
            "tune" => plot_tune(&input, &output)?,
            "correlation" => plot_correlation(&input, &output)?,
            "pca" => plot_pca(&input, &output)?,
            other => return Err(config_err(format!("unknown plot kind `{other}`"))),
        }
        println!("plot: wrote {}", output.display());
    }
    Ok(())
}

fn report_input(config: &RunConfig, kind: &str) -> PathBuf {
    let file = match kind {
        "importance" => "importance_report.csv",
        "tune" => "tune_curve.csv",
        "correlation" => "correlation.csv",
        "pca" => "pca_scores.csv",
        other => return config.out_dir.join(other),
    };
    config.out_dir.join(file)
}

fn read_csv(path: &Path) -> CliResult<Vec<Vec<String>>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(CliError::from)?;
    Ok(text
        .lines()
        .map(|l| l.split(',').map(|c| c.trim().to_string()).collect())
        .collect())
}

fn plot_importance(input: &Path, output: &Path) -> CliResult {
    let rows = read_csv(input)?;
    let mut entries = Vec::new();
    for row in rows.iter().skip(1) {
        if row.len() < 5 {
            continue;
        }
        let mut bars = Vec::new();
        if let Some(v) = parse_f64(&row[2]) {
            bars.push((v, plot::BLUE));
        }
        if let Some(v) = parse_f64(&row[4]) {
            bars.push((v, plot::ORANGE));
        }
        entries.push((row[0].clone(), bars));
    }
    plot::bar_chart("importance (blue permutation, orange drop)", &entries, output)
        .map_err(CliError::from)
}

fn plot_tune(input: &Path, output: &Path) -> CliResult {
    let rows = read_csv(input)?;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .skip(1)
        .filter_map(|row| Some((parse_f64(row.first()?)?, parse_f64(row.get(1)?)?)))
        .collect();
    plot::curve("cv score vs max_depth", &points, output).map_err(CliError::from)
}

fn plot_correlation(input: &Path, output: &Path) -> CliResult {
    let rows = read_csv(input)?;
    if rows.len() < 2 {
        return Err(config_err("correlation.csv is empty"));
    }
    let labels: Vec<String> = rows[0][1..].to_vec();
    let matrix: Vec<Vec<f64>> = rows[1..]
        .iter()
        .map(|row| row[1..].iter().filter_map(|c| parse_f64(c)).collect())
        .collect();
    plot::heatmap("feature correlation", &labels, &matrix, output).map_err(CliError::from)
}

fn plot_pca(input: &Path, output: &Path) -> CliResult {
    let rows = read_csv(input)?;
    if rows.len() < 2 || rows[0].len() < 3 {
        return Err(config_err("pca_scores.csv needs at least pc1, pc2, norm_dist"));
    }
    let color_col = rows[0].len() - 1;
    let points: Vec<(f64, f64, f64)> = rows
        .iter()
        .skip(1)
        .filter_map(|row| {
            Some((
                parse_f64(row.first()?)?,
                parse_f64(row.get(1)?)?,
                parse_f64(row.get(color_col)?)?,
            ))
        })
        .collect();
    plot::scatter("pca scores (pc1 vs pc2)", &points, output).map_err(CliError::from)
}

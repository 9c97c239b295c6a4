//! Feature scaling, low-variance exclusion, and correlation analysis.
//!
//! Scalers are always fit on training rows only and then applied to test
//! rows. All standard deviations use the population denominator `n`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalerKind {
    MinMax,
    Standard,
}

impl ScalerKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScalerKind::MinMax => "minmax",
            ScalerKind::Standard => "standard",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "minmax" => Ok(ScalerKind::MinMax),
            "standard" => Ok(ScalerKind::Standard),
            other => Err(Error::invalid(format!("unknown scaler `{other}`"))),
        }
    }
}

/// Per-feature scaling statistics, fit on training rows.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalerParams {
    /// Train min / max per feature; maps min→0, max→1.
    MinMax { min: Vec<f64>, max: Vec<f64> },
    /// Train mean / population std per feature; maps mean→0, std→1.
    Standard { mean: Vec<f64>, std: Vec<f64> },
}

impl ScalerParams {
    pub fn kind(&self) -> ScalerKind {
        match self {
            ScalerParams::MinMax { .. } => ScalerKind::MinMax,
            ScalerParams::Standard { .. } => ScalerKind::Standard,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            ScalerParams::MinMax { min, .. } => min.len(),
            ScalerParams::Standard { mean, .. } => mean.len(),
        }
    }
}

/// Fit scaling statistics column-by-column.
pub fn fit_scaler(matrix: &DMatrix<f64>, kind: ScalerKind) -> Result<ScalerParams> {
    let (n, p) = matrix.shape();
    if n == 0 || p == 0 {
        return Err(Error::invalid("cannot fit scaler on an empty matrix"));
    }
    match kind {
        ScalerKind::MinMax => {
            let mut min = vec![f64::INFINITY; p];
            let mut max = vec![f64::NEG_INFINITY; p];
            for j in 0..p {
                for i in 0..n {
                    let v = matrix[(i, j)];
                    if v < min[j] {
                        min[j] = v;
                    }
                    if v > max[j] {
                        max[j] = v;
                    }
                }
            }
            Ok(ScalerParams::MinMax { min, max })
        }
        ScalerKind::Standard => {
            let mut mean = vec![0.0; p];
            let mut std = vec![0.0; p];
            for j in 0..p {
                let mut sum = 0.0;
                for i in 0..n {
                    sum += matrix[(i, j)];
                }
                let mu = sum / n as f64;
                let mut ss = 0.0;
                for i in 0..n {
                    let d = matrix[(i, j)] - mu;
                    ss += d * d;
                }
                mean[j] = mu;
                std[j] = (ss / n as f64).sqrt();
            }
            Ok(ScalerParams::Standard { mean, std })
        }
    }
}

/// Transform a matrix with previously fitted statistics. Degenerate
/// (constant) features map to 0. Values outside the training range
/// extrapolate; nothing is clamped.
pub fn apply_scaler(params: &ScalerParams, matrix: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_width(params, matrix)?;
    let (n, p) = matrix.shape();
    let mut out = DMatrix::zeros(n, p);
    match params {
        ScalerParams::MinMax { min, max } => {
            for j in 0..p {
                let range = max[j] - min[j];
                for i in 0..n {
                    out[(i, j)] = if range > 0.0 {
                        (matrix[(i, j)] - min[j]) / range
                    } else {
                        0.0
                    };
                }
            }
        }
        ScalerParams::Standard { mean, std } => {
            for j in 0..p {
                for i in 0..n {
                    out[(i, j)] = if std[j] > 0.0 {
                        (matrix[(i, j)] - mean[j]) / std[j]
                    } else {
                        0.0
                    };
                }
            }
        }
    }
    Ok(out)
}

/// Inverse of [`apply_scaler`]. Degenerate features map back to their
/// constant training value.
pub fn invert_scaler(params: &ScalerParams, matrix: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_width(params, matrix)?;
    let (n, p) = matrix.shape();
    let mut out = DMatrix::zeros(n, p);
    match params {
        ScalerParams::MinMax { min, max } => {
            for j in 0..p {
                let range = max[j] - min[j];
                for i in 0..n {
                    out[(i, j)] = if range > 0.0 {
                        matrix[(i, j)] * range + min[j]
                    } else {
                        min[j]
                    };
                }
            }
        }
        ScalerParams::Standard { mean, std } => {
            for j in 0..p {
                for i in 0..n {
                    out[(i, j)] = if std[j] > 0.0 {
                        matrix[(i, j)] * std[j] + mean[j]
                    } else {
                        mean[j]
                    };
                }
            }
        }
    }
    Ok(out)
}

fn check_width(params: &ScalerParams, matrix: &DMatrix<f64>) -> Result<()> {
    if matrix.ncols() != params.n_features() {
        return Err(Error::shape(format!(
            "scaler has {} features but matrix has {} columns",
            params.n_features(),
            matrix.ncols()
        )));
    }
    Ok(())
}

// ── Variance filter ──────────────────────────────────────────────────────

/// Standard deviations of (normalized) features with the exclusion verdict
/// at a variance threshold.
#[derive(Debug, Clone)]
pub struct VarianceReport {
    /// `(feature, population std)` sorted descending by std.
    pub stds: Vec<(String, f64)>,
    /// Variance threshold the exclusion was computed at.
    pub threshold: f64,
    /// Features with variance strictly below the threshold, original order.
    pub excluded: Vec<String>,
    /// Remaining features, original order.
    pub retained: Vec<String>,
}

/// Flag features whose variance falls below `threshold`. The matrix is
/// expected to be min-max normalized already; the function does not rescale.
pub fn variance_filter(
    matrix: &DMatrix<f64>,
    names: &[String],
    threshold: f64,
) -> Result<VarianceReport> {
    if threshold < 0.0 {
        return Err(Error::invalid("variance threshold must be >= 0"));
    }
    let (n, p) = matrix.shape();
    if n == 0 || p == 0 {
        return Err(Error::invalid("cannot filter an empty matrix"));
    }
    if names.len() != p {
        return Err(Error::shape(format!(
            "{} names for {} columns",
            names.len(),
            p
        )));
    }

    let mut variances = Vec::with_capacity(p);
    for j in 0..p {
        let mut sum = 0.0;
        for i in 0..n {
            sum += matrix[(i, j)];
        }
        let mu = sum / n as f64;
        let mut ss = 0.0;
        for i in 0..n {
            let d = matrix[(i, j)] - mu;
            ss += d * d;
        }
        variances.push(ss / n as f64);
    }

    let mut excluded = Vec::new();
    let mut retained = Vec::new();
    for (j, name) in names.iter().enumerate() {
        if variances[j] < threshold {
            excluded.push(name.clone());
        } else {
            retained.push(name.clone());
        }
    }

    let mut stds: Vec<(String, f64)> = names
        .iter()
        .zip(&variances)
        .map(|(n, &v)| (n.clone(), v.sqrt()))
        .collect();
    stds.sort_by(|a, b| b.1.total_cmp(&a.1));

    Ok(VarianceReport {
        stds,
        threshold,
        excluded,
        retained,
    })
}

// ── Correlation ──────────────────────────────────────────────────────────

/// Pearson correlation matrix with constant columns flagged (their
/// correlations are reported as 0).
#[derive(Debug, Clone)]
pub struct Correlation {
    pub matrix: DMatrix<f64>,
    /// Column indices whose variance is zero (correlation undefined).
    pub constant: Vec<usize>,
}

/// Pearson correlations of all column pairs. Requires at least two rows.
pub fn correlation_matrix(matrix: &DMatrix<f64>) -> Result<Correlation> {
    let (n, p) = matrix.shape();
    if n < 2 {
        return Err(Error::invalid("correlation needs at least 2 rows"));
    }
    // Center columns once.
    let mut centered = matrix.clone();
    for j in 0..p {
        let mut sum = 0.0;
        for i in 0..n {
            sum += matrix[(i, j)];
        }
        let mu = sum / n as f64;
        for i in 0..n {
            centered[(i, j)] -= mu;
        }
    }
    let mut ss = vec![0.0; p];
    for j in 0..p {
        for i in 0..n {
            let v = centered[(i, j)];
            ss[j] += v * v;
        }
    }
    let constant: Vec<usize> = (0..p).filter(|&j| ss[j] == 0.0).collect();

    let mut out = DMatrix::identity(p, p);
    for a in 0..p {
        for b in (a + 1)..p {
            let r = if ss[a] == 0.0 || ss[b] == 0.0 {
                0.0
            } else {
                let mut dot = 0.0;
                for i in 0..n {
                    dot += centered[(i, a)] * centered[(i, b)];
                }
                (dot / (ss[a] * ss[b]).sqrt()).clamp(-1.0, 1.0)
            };
            out[(a, b)] = r;
            out[(b, a)] = r;
        }
    }
    Ok(Correlation {
        matrix: out,
        constant,
    })
}

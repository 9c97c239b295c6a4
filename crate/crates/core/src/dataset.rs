//! Flight-data tables: loading, validation, imputation, and splits.
//!
//! The canonical interchange format is comma-delimited text with a header
//! row, one row per sample (0.1 s default spacing), '.' decimal separator,
//! and an empty field for a missing cell. Missing cells are stored as `NaN`
//! in memory and must be imputed before modeling.

use std::collections::HashMap;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::textio::{fmt_f64, parse_f64};

/// Default sampling period of the canonical flight files, in seconds.
pub const DEFAULT_SAMPLE_PERIOD: f64 = 0.1;

/// Features that are direct restatements of the position target and must be
/// rejected as candidates when regressing position.
pub const TARGET_EQUIVALENT_FEATURES: [&str; 3] = ["ins_lon", "ins_lat", "ins_alt"];

// ── FlightFrame ──────────────────────────────────────────────────────────

/// A time-indexed table of named numeric series. Immutable after
/// construction; missing cells are `NaN`.
#[derive(Debug, Clone)]
pub struct FlightFrame {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
    n_rows: usize,
    sample_period: f64,
    flight_id: String,
}

impl FlightFrame {
    /// Build a frame from `(name, series)` pairs. All series must share one
    /// length ≥ 1, names must be unique, and the sample period positive.
    pub fn new(
        flight_id: impl Into<String>,
        sample_period: f64,
        columns: Vec<(String, Vec<f64>)>,
    ) -> Result<Self> {
        if !(sample_period > 0.0) {
            return Err(Error::invalid("sample_period must be > 0"));
        }
        if columns.is_empty() {
            return Err(Error::invalid("frame needs at least one column"));
        }
        let n_rows = columns[0].1.len();
        if n_rows == 0 {
            return Err(Error::invalid("frame needs at least one row"));
        }
        let mut names = Vec::with_capacity(columns.len());
        let mut series = Vec::with_capacity(columns.len());
        let mut index = HashMap::new();
        for (name, values) in columns {
            if values.len() != n_rows {
                return Err(Error::shape(format!(
                    "column `{name}` has {} rows, expected {n_rows}",
                    values.len()
                )));
            }
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(Error::DuplicateColumn(name));
            }
            names.push(name);
            series.push(values);
        }
        Ok(FlightFrame {
            names,
            columns: series,
            index,
            n_rows,
            sample_period,
            flight_id: flight_id.into(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_columns(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    pub fn flight_id(&self) -> &str {
        &self.flight_id
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.index
            .get(name)
            .map(|&i| self.columns[i].as_slice())
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    /// `true` where the named column is missing (`NaN`).
    pub fn missing_mask(&self, name: &str) -> Result<Vec<bool>> {
        Ok(self.column(name)?.iter().map(|v| v.is_nan()).collect())
    }

    /// Extract the named columns as an `n_rows × names.len()` matrix.
    pub fn matrix<S: AsRef<str>>(&self, names: &[S]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.n_rows, names.len());
        for (j, name) in names.iter().enumerate() {
            let col = self.column(name.as_ref())?;
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    /// A new frame restricted to the given row range.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<FlightFrame> {
        if start >= end || end > self.n_rows {
            return Err(Error::invalid(format!(
                "row range {start}..{end} out of bounds for {} rows",
                self.n_rows
            )));
        }
        let columns = self
            .names
            .iter()
            .zip(&self.columns)
            .map(|(n, c)| (n.clone(), c[start..end].to_vec()))
            .collect();
        FlightFrame::new(self.flight_id.clone(), self.sample_period, columns)
    }

    /// Append the rows of `other` (same columns, same order) after `self`.
    pub fn concat(&self, other: &FlightFrame) -> Result<FlightFrame> {
        if self.names != other.names {
            return Err(Error::shape("cannot concat frames with different columns"));
        }
        let columns = self
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let mut v = self.columns[i].clone();
                v.extend_from_slice(&other.columns[i]);
                (n.clone(), v)
            })
            .collect();
        FlightFrame::new(self.flight_id.clone(), self.sample_period, columns)
    }

    /// A new frame with `name` appended (or an error if it already exists).
    pub fn with_column(&self, name: impl Into<String>, values: Vec<f64>) -> Result<FlightFrame> {
        let name = name.into();
        if self.has_column(&name) {
            return Err(Error::DuplicateColumn(name));
        }
        let mut columns: Vec<(String, Vec<f64>)> = self
            .names
            .iter()
            .zip(&self.columns)
            .map(|(n, c)| (n.clone(), c.clone()))
            .collect();
        columns.push((name, values));
        FlightFrame::new(self.flight_id.clone(), self.sample_period, columns)
    }

    /// Write the canonical comma-delimited text format. Missing cells become
    /// empty fields; all other cells carry 17 significant digits.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        writeln!(w, "{}", self.names.join(","))?;
        let mut line = String::new();
        for row in 0..self.n_rows {
            line.clear();
            for (j, col) in self.columns.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                let v = col[row];
                if !v.is_nan() {
                    line.push_str(&fmt_f64(v));
                }
            }
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        Ok(())
    }
}

// ── Targets and presets ──────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    AnomalyField,
    Position3d,
}

/// Names the target column(s) of a regression task: one column for the
/// anomaly field, three for xyz position.
#[derive(Debug, Clone)]
pub struct TargetSpec {
    kind: TargetKind,
    column_names: Vec<String>,
}

impl TargetSpec {
    pub fn anomaly(column: impl Into<String>) -> Self {
        TargetSpec {
            kind: TargetKind::AnomalyField,
            column_names: vec![column.into()],
        }
    }

    pub fn position(columns: [&str; 3]) -> Self {
        TargetSpec {
            kind: TargetKind::Position3d,
            column_names: columns.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn dim(&self) -> usize {
        self.column_names.len()
    }

    /// Check that every target column exists in the frame.
    pub fn validate(&self, frame: &FlightFrame) -> Result<()> {
        for name in &self.column_names {
            if !frame.has_column(name) {
                return Err(Error::MissingColumn(name.clone()));
            }
        }
        Ok(())
    }

    /// Extract the target matrix (`n_rows × dim`).
    pub fn matrix(&self, frame: &FlightFrame) -> Result<DMatrix<f64>> {
        frame.matrix(&self.column_names)
    }
}

/// The three published feature-set presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSetPreset {
    TlInsFree,
    InsAided,
    TlInsAided,
}

impl FeatureSetPreset {
    pub const ALL: [FeatureSetPreset; 3] = [
        FeatureSetPreset::TlInsFree,
        FeatureSetPreset::InsAided,
        FeatureSetPreset::TlInsAided,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FeatureSetPreset::TlInsFree => "tl_ins_free",
            FeatureSetPreset::InsAided => "ins_aided",
            FeatureSetPreset::TlInsAided => "tl_ins_aided",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "tl_ins_free" => Ok(FeatureSetPreset::TlInsFree),
            "ins_aided" => Ok(FeatureSetPreset::InsAided),
            "tl_ins_aided" => Ok(FeatureSetPreset::TlInsAided),
            other => Err(Error::invalid(format!("unknown preset `{other}`"))),
        }
    }

    /// The ordered feature list of the preset.
    pub fn features(&self) -> &'static [&'static str] {
        match self {
            FeatureSetPreset::TlInsFree => &[
                "mag_3_uc", "mag_4_uc", "mag_5_uc", "diurnal", "flux_b_x", "flux_b_y",
                "flux_c_y", "static_p", "total_p",
            ],
            FeatureSetPreset::InsAided => &[
                "mag_3_uc", "mag_4_uc", "mag_5_uc", "diurnal", "flux_b_x", "flux_b_y",
                "flux_c_y", "ins_vw", "ins_wander", "static_p", "total_p", "vol_srvo",
            ],
            FeatureSetPreset::TlInsAided => &[
                "mag_3_c", "mag_4_c", "mag_5_c", "diurnal", "flux_b_x", "flux_b_y",
                "flux_c_y", "ins_vw", "ins_wander", "static_p", "total_p", "vol_srvo",
            ],
        }
    }
}

// ── Splits ───────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    ChronologicalTail,
}

#[derive(Debug, Clone, Copy)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub mode: SplitMode,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.2,
            mode: SplitMode::ChronologicalTail,
        }
    }
}

/// Split a frame into `(train, test)` with the test set taken as the final
/// `⌈test_fraction·n⌉` rows, in original order, no shuffling.
pub fn chronological_split(frame: &FlightFrame, spec: &SplitSpec) -> Result<(FlightFrame, FlightFrame)> {
    let n = frame.n_rows();
    if n < 2 {
        return Err(Error::invalid("need at least 2 rows to split"));
    }
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "test_fraction must be in (0,1), got {}",
            spec.test_fraction
        )));
    }
    let SplitMode::ChronologicalTail = spec.mode;
    let n_test = (spec.test_fraction * n as f64).ceil() as usize;
    if n_test >= n {
        // Frames must keep at least one row, so a fraction whose ceiling
        // covers every row cannot be split.
        return Err(Error::invalid(format!(
            "test_fraction {} leaves no training rows for n={n}",
            spec.test_fraction
        )));
    }
    let train = frame.slice_rows(0, n - n_test)?;
    let test = frame.slice_rows(n - n_test, n)?;
    Ok((train, test))
}

// ── Loading ──────────────────────────────────────────────────────────────

/// Load a canonical flight file, requiring every `schema` column to be
/// present. Blank cells become missing; non-blank unparseable cells become
/// missing too, but a column that is more than 50% non-numeric is rejected
/// as the wrong file.
///
/// The format is deliberately plain (no quoting or escaping), so the parser
/// is a direct comma split; an entirely blank line is a row of missing
/// cells, not a separator.
pub fn load_flight(path: impl AsRef<Path>, schema: &[&str]) -> Result<FlightFrame> {
    let path = path.as_ref();
    let flight_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "flight".to_string());

    let file = std::fs::File::open(path)?;
    let mut lines = std::io::BufReader::new(file).lines();

    let header_line = lines
        .next()
        .ok_or_else(|| Error::invalid(format!("{}: file is empty", path.display())))??;
    let headers: Vec<String> = header_line.split(',').map(|h| h.trim().to_string()).collect();
    for required in schema {
        if !headers.iter().any(|h| h == required) {
            return Err(Error::MissingColumn(required.to_string()));
        }
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    let mut non_numeric = vec![0usize; headers.len()];
    for (row, line) in lines.enumerate() {
        let line = line?;
        let mut count = 0;
        for (j, cell) in line.split(',').enumerate() {
            count += 1;
            if j >= headers.len() {
                break;
            }
            let cell = cell.trim();
            let value = if cell.is_empty() {
                f64::NAN
            } else {
                match parse_f64(cell) {
                    Some(v) => v,
                    None => {
                        non_numeric[j] += 1;
                        f64::NAN
                    }
                }
            };
            columns[j].push(value);
        }
        if count != headers.len() {
            return Err(Error::shape(format!(
                "{}: row {} has {count} fields, expected {}",
                path.display(),
                row + 2,
                headers.len()
            )));
        }
    }

    let n_rows = columns.first().map_or(0, |c| c.len());
    for (j, name) in headers.iter().enumerate() {
        if n_rows > 0 && non_numeric[j] * 2 > n_rows {
            return Err(Error::NonNumericColumn {
                column: name.clone(),
                bad: non_numeric[j],
                rows: n_rows,
            });
        }
    }

    FlightFrame::new(
        flight_id,
        DEFAULT_SAMPLE_PERIOD,
        headers.into_iter().zip(columns).collect(),
    )
}

// ── Imputation and outliers ──────────────────────────────────────────────

/// Fill missing cells: forward-fill within each column, then the column
/// median of the observed values for any leading gap. Non-missing cells are
/// copied bit-for-bit.
pub fn impute_missing(frame: &FlightFrame) -> Result<FlightFrame> {
    let mut columns = Vec::with_capacity(frame.n_columns());
    for name in frame.names() {
        let col = frame.column(name)?;
        let observed: Vec<f64> = col.iter().copied().filter(|v| !v.is_nan()).collect();
        if observed.is_empty() {
            return Err(Error::AllMissing(name.clone()));
        }
        let median = median_of(&observed);
        let mut filled = Vec::with_capacity(col.len());
        let mut last: Option<f64> = None;
        for &v in col {
            let value = if v.is_nan() {
                last.unwrap_or(median)
            } else {
                last = Some(v);
                v
            };
            filled.push(value);
        }
        columns.push((name.clone(), filled));
    }
    FlightFrame::new(frame.flight_id().to_string(), frame.sample_period(), columns)
}

/// Longest excursion, in samples, still treated as a sensor glitch; longer
/// runs beyond the outlier band are sustained signal (e.g. an actuation on
/// an otherwise quiet current channel) and are kept.
const MAX_GLITCH_RUN: usize = 5;

/// Mark cells farther than `iqr_multiple` interquartile ranges from the
/// column median as missing. Columns with zero IQR are left untouched (no
/// scale to judge against), and excursions sustained for more than
/// [`MAX_GLITCH_RUN`] consecutive samples are treated as real signal
/// rather than glitches. Returns the masked frame and the per-column count
/// of newly masked cells.
pub fn mask_outliers(frame: &FlightFrame, iqr_multiple: f64) -> Result<(FlightFrame, Vec<(String, usize)>)> {
    if !(iqr_multiple > 0.0) {
        return Err(Error::invalid("iqr_multiple must be > 0"));
    }
    let mut columns = Vec::with_capacity(frame.n_columns());
    let mut counts = Vec::new();
    for name in frame.names() {
        let col = frame.column(name)?;
        let mut observed: Vec<f64> = col.iter().copied().filter(|v| !v.is_nan()).collect();
        if observed.is_empty() {
            columns.push((name.clone(), col.to_vec()));
            counts.push((name.clone(), 0));
            continue;
        }
        observed.sort_by(f64::total_cmp);
        let median = sorted_quantile(&observed, 0.5);
        let iqr = sorted_quantile(&observed, 0.75) - sorted_quantile(&observed, 0.25);
        if iqr <= 0.0 {
            columns.push((name.clone(), col.to_vec()));
            counts.push((name.clone(), 0));
            continue;
        }
        let limit = iqr_multiple * iqr;
        let candidate: Vec<bool> = col
            .iter()
            .map(|&v| !v.is_nan() && (v - median).abs() > limit)
            .collect();

        let mut series = col.to_vec();
        let mut masked = 0usize;
        let mut i = 0;
        while i < candidate.len() {
            if candidate[i] {
                let mut j = i;
                while j < candidate.len() && candidate[j] {
                    j += 1;
                }
                if j - i <= MAX_GLITCH_RUN {
                    for cell in series.iter_mut().take(j).skip(i) {
                        *cell = f64::NAN;
                    }
                    masked += j - i;
                }
                i = j;
            } else {
                i += 1;
            }
        }
        columns.push((name.clone(), series));
        counts.push((name.clone(), masked));
    }
    let frame = FlightFrame::new(frame.flight_id().to_string(), frame.sample_period(), columns)?;
    Ok((frame, counts))
}

fn median_of(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted_quantile(&sorted, 0.5)
}

/// Linear-interpolation quantile of an ascending-sorted slice.
fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

//! Run configuration: one TOML file drives every subcommand.
//!
//! Defaults follow the pipeline's published settings where they exist
//! (min-max scaling, variance threshold 0.0025, 100 trees, 0.2 holdout).
//! Environment variables never override the config; command-line flags do.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use magnav::dataset::{FeatureSetPreset, TargetSpec};
use magnav::models::{
    Aggregation, ForestConfig, KnnConfig, MaxFeatures, ModelConfig, TreeConfig,
};
use magnav::preprocess::ScalerKind;
use magnav::synth::SynthConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub features: FeaturesSection,
    #[serde(default)]
    pub preprocess: PreprocessSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub tl: TlSection,
    #[serde(default)]
    pub sfs: SfsSection,
    #[serde(default)]
    pub importance: ImportanceSection,
    #[serde(default)]
    pub tune: TuneSection,
    #[serde(default)]
    pub pca: PcaSection,
    #[serde(default)]
    pub synth: SynthSection,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("runs/out")
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config uses defaults")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// Canonical flight file; defaults to the synth artifact in `out_dir`.
    pub flight: Option<PathBuf>,
    #[serde(default = "default_target")]
    pub target: String,
    #[serde(default = "default_anomaly_column")]
    pub anomaly_column: String,
    #[serde(default = "default_position_columns")]
    pub position_columns: [String; 3],
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            flight: None,
            target: default_target(),
            anomaly_column: default_anomaly_column(),
            position_columns: default_position_columns(),
        }
    }
}

fn default_target() -> String {
    "position".to_string()
}

fn default_anomaly_column() -> String {
    "anomaly".to_string()
}

fn default_position_columns() -> [String; 3] {
    ["utm_x".to_string(), "utm_y".to_string(), "utm_z".to_string()]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeaturesSection {
    /// One of `tl_ins_free`, `ins_aided`, `tl_ins_aided`; ignored when
    /// `list` is non-empty.
    #[serde(default = "default_preset")]
    pub preset: String,
    #[serde(default)]
    pub list: Vec<String>,
    /// Drop `diurnal` from the active set (it is only measurable at a base
    /// station, not in flight).
    #[serde(default)]
    pub exclude_diurnal: bool,
}

fn default_preset() -> String {
    "tl_ins_free".to_string()
}

impl Default for FeaturesSection {
    fn default() -> Self {
        FeaturesSection {
            preset: default_preset(),
            list: Vec::new(),
            exclude_diurnal: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessSection {
    #[serde(default = "default_scaler")]
    pub scaler: String,
    #[serde(default = "default_variance_threshold")]
    pub variance_threshold: f64,
    #[serde(default = "default_iqr_multiple")]
    pub outlier_iqr_multiple: f64,
}

fn default_scaler() -> String {
    "minmax".to_string()
}

fn default_variance_threshold() -> f64 {
    0.0025
}

fn default_iqr_multiple() -> f64 {
    6.0
}

impl Default for PreprocessSection {
    fn default() -> Self {
        PreprocessSection {
            scaler: default_scaler(),
            variance_threshold: default_variance_threshold(),
            outlier_iqr_multiple: default_iqr_multiple(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
}

fn default_test_fraction() -> f64 {
    0.2
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection {
            test_fraction: default_test_fraction(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// `forest`, `tree`, or `knn`.
    #[serde(default = "default_model_kind")]
    pub kind: String,
    #[serde(default = "default_n_estimators")]
    pub n_estimators: usize,
    /// Omit for unrestricted depth.
    #[serde(default)]
    pub max_depth: Option<usize>,
    #[serde(default = "default_min_samples_split")]
    pub min_samples_split: usize,
    #[serde(default = "default_min_samples_leaf")]
    pub min_samples_leaf: usize,
    /// `all`, an integer count, or a fraction in (0,1].
    #[serde(default = "default_max_features")]
    pub max_features: String,
    #[serde(default = "default_true")]
    pub bootstrap: bool,
    #[serde(default = "default_aggregation")]
    pub aggregation: String,
    /// Neighbor count for `kind = "knn"`.
    #[serde(default = "default_k")]
    pub k: usize,
}

fn default_model_kind() -> String {
    "forest".to_string()
}

fn default_n_estimators() -> usize {
    100
}

fn default_min_samples_split() -> usize {
    2
}

fn default_min_samples_leaf() -> usize {
    1
}

fn default_max_features() -> String {
    "all".to_string()
}

fn default_true() -> bool {
    true
}

fn default_aggregation() -> String {
    "mean".to_string()
}

fn default_k() -> usize {
    5
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            kind: default_model_kind(),
            n_estimators: default_n_estimators(),
            max_depth: None,
            min_samples_split: default_min_samples_split(),
            min_samples_leaf: default_min_samples_leaf(),
            max_features: default_max_features(),
            bootstrap: true,
            aggregation: default_aggregation(),
            k: default_k(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TlSection {
    #[serde(default = "default_tl_scalar")]
    pub scalar_column: String,
    #[serde(default = "default_fluxgate")]
    pub fluxgate: [String; 3],
    #[serde(default)]
    pub ridge: f64,
    #[serde(default)]
    pub band_pass: bool,
    /// Columns to compensate with `tl-apply`; `_uc` suffixes become `_c`.
    #[serde(default = "default_apply_to")]
    pub apply_to: Vec<String>,
}

fn default_tl_scalar() -> String {
    "mag_3_uc".to_string()
}

fn default_fluxgate() -> [String; 3] {
    [
        "flux_b_x".to_string(),
        "flux_b_y".to_string(),
        "flux_b_z".to_string(),
    ]
}

fn default_apply_to() -> Vec<String> {
    vec![
        "mag_3_uc".to_string(),
        "mag_4_uc".to_string(),
        "mag_5_uc".to_string(),
    ]
}

impl Default for TlSection {
    fn default() -> Self {
        TlSection {
            scalar_column: default_tl_scalar(),
            fluxgate: default_fluxgate(),
            ridge: 0.0,
            band_pass: false,
            apply_to: default_apply_to(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SfsSection {
    #[serde(default = "default_sfs_max_features")]
    pub max_features: usize,
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// Explicit candidate pool; empty means every sensor column that is not
    /// a target, truth, or target-equivalent column.
    #[serde(default)]
    pub candidates: Vec<String>,
}

fn default_sfs_max_features() -> usize {
    12
}

fn default_folds() -> usize {
    5
}

impl Default for SfsSection {
    fn default() -> Self {
        SfsSection {
            max_features: default_sfs_max_features(),
            folds: default_folds(),
            candidates: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImportanceSection {
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    /// `permutation`, `drop`, or `both`.
    #[serde(default = "default_importance_mode")]
    pub mode: String,
}

fn default_repeats() -> usize {
    5
}

fn default_importance_mode() -> String {
    "both".to_string()
}

impl Default for ImportanceSection {
    fn default() -> Self {
        ImportanceSection {
            repeats: default_repeats(),
            mode: default_importance_mode(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneSection {
    #[serde(default = "default_depths")]
    pub depths: Vec<usize>,
    #[serde(default = "default_folds")]
    pub folds: usize,
}

fn default_depths() -> Vec<usize> {
    vec![5, 10, 15, 20, 25, 30, 35, 40]
}

impl Default for TuneSection {
    fn default() -> Self {
        TuneSection {
            depths: default_depths(),
            folds: default_folds(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcaSection {
    #[serde(default = "default_components")]
    pub components: usize,
}

fn default_components() -> usize {
    12
}

impl Default for PcaSection {
    fn default() -> Self {
        PcaSection {
            components: default_components(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    /// `default` (30-minute circuit) or `calibration` (short maneuver-rich
    /// magnetically quiet flight).
    #[serde(default = "default_fixture")]
    pub fixture: String,
    /// Override the fixture duration, seconds.
    #[serde(default)]
    pub duration_s: Option<f64>,
}

fn default_fixture() -> String {
    "default".to_string()
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection {
            fixture: default_fixture(),
            duration_s: None,
        }
    }
}

// ── Derived accessors ────────────────────────────────────────────────────

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    /// Canonical serialized form; its hash pins preset, seed, and
    /// hyperparameters for the run ledger.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn config_hash(&self) -> String {
        format!("{:016x}", fnv1a64(self.canonical().as_bytes()))
    }

    pub fn target_spec(&self) -> Result<TargetSpec, String> {
        match self.data.target.as_str() {
            "anomaly" => Ok(TargetSpec::anomaly(self.data.anomaly_column.clone())),
            "position" => {
                let c = &self.data.position_columns;
                Ok(TargetSpec::position([
                    c[0].as_str(),
                    c[1].as_str(),
                    c[2].as_str(),
                ]))
            }
            other => Err(format!(
                "data.target must be `anomaly` or `position`, got `{other}`"
            )),
        }
    }

    /// The active feature list: explicit list if given, else the preset,
    /// minus `diurnal` when excluded.
    pub fn feature_list(&self) -> Result<Vec<String>, String> {
        let mut features: Vec<String> = if self.features.list.is_empty() {
            FeatureSetPreset::from_name(&self.features.preset)
                .map_err(|e| e.to_string())?
                .features()
                .iter()
                .map(|s| s.to_string())
                .collect()
        } else {
            self.features.list.clone()
        };
        if self.features.exclude_diurnal {
            features.retain(|f| f != "diurnal");
        }
        if features.is_empty() {
            return Err("feature list is empty".to_string());
        }
        Ok(features)
    }

    pub fn scaler_kind(&self) -> Result<ScalerKind, String> {
        ScalerKind::from_name(&self.preprocess.scaler).map_err(|e| e.to_string())
    }

    pub fn model_config(&self) -> Result<ModelConfig, String> {
        let tree = TreeConfig {
            max_depth: self.model.max_depth,
            min_samples_split: self.model.min_samples_split,
            min_samples_leaf: self.model.min_samples_leaf,
        };
        let aggregation = Aggregation::from_name(&self.model.aggregation).map_err(|e| e.to_string())?;
        match self.model.kind.as_str() {
            "tree" => Ok(ModelConfig::Tree(tree)),
            "knn" => Ok(ModelConfig::Knn(KnnConfig {
                k: self.model.k,
                aggregation,
            })),
            "forest" => Ok(ModelConfig::Forest(ForestConfig {
                n_estimators: self.model.n_estimators,
                tree,
                master_seed: self.seed,
                max_features: parse_max_features(&self.model.max_features)?,
                bootstrap: self.model.bootstrap,
                aggregation,
            })),
            other => Err(format!(
                "model.kind must be `forest`, `tree`, or `knn`, got `{other}`"
            )),
        }
    }

    pub fn forest_config(&self) -> Result<ForestConfig, String> {
        match self.model_config()? {
            ModelConfig::Forest(f) => Ok(f),
            _ => Ok(ForestConfig {
                master_seed: self.seed,
                ..ForestConfig::default()
            }),
        }
    }

    pub fn synth_config(&self) -> Result<SynthConfig, String> {
        let mut config = match self.synth.fixture.as_str() {
            "default" => SynthConfig::default_fixture(self.seed),
            "calibration" => SynthConfig::calibration_fixture(self.seed),
            other => {
                return Err(format!(
                    "synth.fixture must be `default` or `calibration`, got `{other}`"
                ))
            }
        };
        if let Some(duration) = self.synth.duration_s {
            config.duration_s = duration;
        }
        Ok(config)
    }

    pub fn flight_path(&self) -> PathBuf {
        self.data
            .flight
            .clone()
            .unwrap_or_else(|| self.out_dir.join("flight.csv"))
    }
}

fn parse_max_features(raw: &str) -> Result<MaxFeatures, String> {
    if raw == "all" {
        return Ok(MaxFeatures::All);
    }
    if let Ok(count) = raw.parse::<usize>() {
        return Ok(MaxFeatures::Count(count));
    }
    if let Ok(fraction) = raw.parse::<f64>() {
        return Ok(MaxFeatures::Fraction(fraction));
    }
    Err(format!(
        "model.max_features must be `all`, a count, or a fraction, got `{raw}`"
    ))
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

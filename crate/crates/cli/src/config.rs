//! Run configuration: a `key = value` file, then `QSMOTE_SEED`, then
//! command-line overrides, each layer replacing the previous one.

use qsmote_core::channels::ChannelKind;
use qsmote_core::eval::{ExperimentConfig, NoiseCell, OversampleSpace, Phase};
use qsmote_core::learn::{ModelKind, ModelParams};
use qsmote_core::oversample::{MinoritySelection, OversampleConfig};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const SEED_ENV: &str = "QSMOTE_SEED";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    MalformedLine { line: usize },
    #[error("unknown setting `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
    #[error("no dataset given (set `data` or pass --data)")]
    MissingData,
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Minority {
    Auto,
    /// Label names as written in the dataset.
    Names(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub label_column: String,
    pub out_dir: PathBuf,
    pub pca_components: usize,
    pub minority: Minority,
    pub clusters: usize,
    pub split_factor: f64,
    pub shots: u64,
    pub seed: u64,
    pub clamp: bool,
    pub fold_internal: bool,
    pub oversample_space: OversampleSpace,
    pub channels: Vec<ChannelKind>,
    pub probabilities: Vec<f64>,
    pub models: Vec<ModelKind>,
    pub folds: usize,
    pub corrupt_train: bool,
    /// 0 disables the extra holdout evaluation.
    pub holdout: f64,
    pub sweep_phase: Phase,
    pub model_params: ModelParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        let os = OversampleConfig::default();
        Self {
            data: None,
            label_column: "label".into(),
            out_dir: PathBuf::from("out"),
            pca_components: 0,
            minority: Minority::Auto,
            clusters: os.clusters,
            split_factor: os.split_factor,
            shots: os.shots,
            seed: 42,
            clamp: os.clamp_to_centroid,
            fold_internal: true,
            oversample_space: OversampleSpace::Scaled,
            channels: Vec::new(),
            probabilities: Vec::new(),
            models: ModelKind::ALL.to_vec(),
            folds: 5,
            corrupt_train: false,
            holdout: 0.0,
            sweep_phase: Phase::After,
            model_params: ModelParams::default(),
        }
    }
}

fn bad(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: reason.to_string(),
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: ToString,
{
    value.parse::<T>().map_err(|e| bad(key, value, e))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(bad(key, value, "expected true or false")),
    }
}

fn list(value: &str) -> Vec<&str> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key.trim() {
            "data" => self.data = Some(PathBuf::from(value)),
            "label_column" => self.label_column = value.to_string(),
            "out" | "out_dir" => self.out_dir = PathBuf::from(value),
            "pca_components" => self.pca_components = parse(key, value)?,
            "minority" => {
                self.minority = if value.eq_ignore_ascii_case("auto") {
                    Minority::Auto
                } else {
                    Minority::Names(list(value).into_iter().map(String::from).collect())
                }
            }
            "clusters" => self.clusters = parse(key, value)?,
            "split_factor" => self.split_factor = parse(key, value)?,
            "shots" => self.shots = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "clamp" => self.clamp = parse_bool(key, value)?,
            "fold_internal" => self.fold_internal = parse_bool(key, value)?,
            "oversample_space" => {
                self.oversample_space = match value.to_ascii_lowercase().as_str() {
                    "scaled" => OversampleSpace::Scaled,
                    "base" | "raw" => OversampleSpace::Base,
                    _ => return Err(bad(key, value, "expected scaled or base")),
                }
            }
            "channels" => {
                self.channels = match value.to_ascii_lowercase().as_str() {
                    "all" => ChannelKind::ALL.to_vec(),
                    "none" | "" => Vec::new(),
                    _ => list(value)
                        .into_iter()
                        .map(|s| parse::<ChannelKind>(key, s))
                        .collect::<Result<_, _>>()?,
                }
            }
            "probabilities" => {
                self.probabilities = list(value)
                    .into_iter()
                    .map(|s| parse::<f64>(key, s))
                    .collect::<Result<_, _>>()?
            }
            "models" => {
                self.models = if value.eq_ignore_ascii_case("all") {
                    ModelKind::ALL.to_vec()
                } else {
                    list(value)
                        .into_iter()
                        .map(|s| parse::<ModelKind>(key, s))
                        .collect::<Result<_, _>>()?
                }
            }
            "folds" => self.folds = parse(key, value)?,
            "corrupt_train" => self.corrupt_train = parse_bool(key, value)?,
            "holdout" => self.holdout = parse(key, value)?,
            "sweep_phase" => {
                self.sweep_phase = match value.to_ascii_lowercase().as_str() {
                    "before" => Phase::Before,
                    "after" => Phase::After,
                    _ => return Err(bad(key, value, "expected before or after")),
                }
            }
            "svm_c" => self.model_params.svm.c = parse(key, value)?,
            "svm_gamma" => {
                self.model_params.svm.gamma = if value.eq_ignore_ascii_case("scale") {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "lr_c" => self.model_params.logistic.c = parse(key, value)?,
            "lr_max_iter" => self.model_params.logistic.max_iter = parse(key, value)?,
            "rf_trees" => self.model_params.forest.n_trees = parse(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(ConfigError::MalformedLine { line: i + 1 })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        self.apply_text(&text)
    }

    pub fn apply_env<F: Fn(&str) -> Option<String>>(&mut self, lookup: F) -> Result<(), ConfigError> {
        if let Some(v) = lookup(SEED_ENV) {
            self.seed = parse(SEED_ENV, v.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if let Some(p) = self.probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return invalid(format!("probability {p} is outside [0, 1]"));
        }
        if !(self.split_factor > 0.0 && self.split_factor.is_finite()) {
            return invalid(format!("split_factor must be positive, got {}", self.split_factor));
        }
        if self.clusters == 0 {
            return invalid("clusters must be at least 1".into());
        }
        if self.folds < 2 {
            return invalid(format!("folds must be at least 2, got {}", self.folds));
        }
        if self.holdout != 0.0 && !(self.holdout > 0.0 && self.holdout < 1.0) {
            return invalid(format!("holdout must be 0 or in (0, 1), got {}", self.holdout));
        }
        if self.models.is_empty() {
            return invalid("no models selected".into());
        }
        if !self.channels.is_empty() && self.probabilities.is_empty() {
            return invalid("channels given without probabilities".into());
        }
        if self.model_params.svm.c <= 0.0 || self.model_params.logistic.c <= 0.0 {
            return invalid("regularization constants must be positive".into());
        }
        if self.model_params.svm.gamma.is_some_and(|g| !(g > 0.0)) {
            return invalid("svm_gamma must be positive".into());
        }
        if self.model_params.forest.n_trees == 0 {
            return invalid("rf_trees must be at least 1".into());
        }
        Ok(())
    }

    pub fn data_path(&self) -> Result<&Path, ConfigError> {
        self.data.as_deref().ok_or(ConfigError::MissingData)
    }

    pub fn noise_grid(&self) -> Vec<NoiseCell> {
        if self.probabilities.is_empty() {
            return Vec::new();
        }
        ExperimentConfig::grid(&self.channels, &self.probabilities)
    }

    /// `label_names` resolves named minority labels to their codes.
    pub fn oversample_config(&self, label_names: &[String]) -> Result<OversampleConfig, ConfigError> {
        let minority_labels = match &self.minority {
            Minority::Auto => MinoritySelection::Auto,
            Minority::Names(names) => MinoritySelection::Labels(
                names
                    .iter()
                    .map(|n| {
                        label_names
                            .iter()
                            .position(|l| l == n)
                            .ok_or_else(|| bad("minority", n, "no such label in the dataset"))
                    })
                    .collect::<Result<_, _>>()?,
            ),
        };
        Ok(OversampleConfig {
            minority_labels,
            clusters: self.clusters,
            split_factor: self.split_factor,
            shots: self.shots,
            seed: self.seed,
            clamp_to_centroid: self.clamp,
            ..OversampleConfig::default()
        })
    }

    pub fn experiment_config(&self, label_names: &[String]) -> Result<ExperimentConfig, ConfigError> {
        Ok(ExperimentConfig {
            k_folds: self.folds,
            seed: self.seed,
            pca_components: self.pca_components,
            oversample: self.oversample_config(label_names)?,
            oversample_space: self.oversample_space,
            fold_internal: self.fold_internal,
            models: self.models.clone(),
            noise_grid: self.noise_grid(),
            corrupt_train: self.corrupt_train,
            model_params: self.model_params.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_env_then_flags() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\nseed = 7\nchannels = BF, depolarizing\nprobabilities = 0, 0.5\nmodels = rf,dt\n")
            .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.noise_grid().len(), 4);
        assert_eq!(c.models, vec![ModelKind::RF, ModelKind::DT]);
        c.apply_env(|k| (k == SEED_ENV).then(|| "11".to_string())).unwrap();
        assert_eq!(c.seed, 11);
        c.set("seed", "13").unwrap();
        assert_eq!(c.seed, 13);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = RunConfig::default();
        assert!(matches!(c.apply_text("seed 4"), Err(ConfigError::MalformedLine { line: 1 })));
        assert!(matches!(c.set("colour", "red"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(c.set("clamp", "maybe"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(c.set("channels", "teleport"), Err(ConfigError::BadValue { .. })));
        c.set("probabilities", "0.5,1.5").unwrap();
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.set("split_factor", "0").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn minority_names_resolve() {
        let mut c = RunConfig::default();
        c.set("minority", "b, c").unwrap();
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let os = c.oversample_config(&names).unwrap();
        assert_eq!(os.minority_labels, MinoritySelection::Labels(vec![1, 2]));
        c.set("minority", "z").unwrap();
        assert!(c.oversample_config(&names).is_err());
    }
}

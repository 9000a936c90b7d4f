//! The four subcommands, callable without going through `main`.

use crate::config::{ConfigError, RunConfig};
use crate::format::g6;
use crate::io::{load_csv, DataError, LoadedCsv};
use qsmote_core::channels::{validate_all, ChannelKind, CptpReport};
use qsmote_core::dataset::LabeledDataset;
use qsmote_core::eval::{run_experiment, run_holdout, AggregateRow, EvalError, ExperimentResult, ExperimentRow, OversampleSpace};
use qsmote_core::learn::fit_scaler;
use qsmote_core::oversample::{oversample, OversampleError};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

pub const METRICS_HEADER: &str = "model,phase,channel,probability,fold,accuracy,precision,recall,f1";
pub const AGGREGATES_HEADER: &str = "model,phase,channel,probability,folds,accuracy_mean,accuracy_std,precision_mean,precision_std,recall_mean,recall_std,f1_mean,f1_std";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("{0}")]
    Run(String),
    #[error("cannot write {path}: {message}")]
    UnwritableOutput { path: String, message: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::UnwritableOutput { .. } => EXIT_CONFIG,
            CliError::Data(_) | CliError::Run(_) => EXIT_DATA,
            CliError::Invariant(_) => EXIT_INTERNAL,
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<OversampleError> for CliError {
    fn from(e: OversampleError) -> Self {
        CliError::Run(e.to_string())
    }
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    let fail = |p: &Path, e: std::io::Error| CliError::UnwritableOutput {
        path: p.display().to_string(),
        message: e.to_string(),
    };
    std::fs::create_dir_all(dir).map_err(|e| fail(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| fail(&path, e))?;
    Ok(path)
}

fn load(config: &RunConfig) -> Result<LoadedCsv, CliError> {
    config.validate()?;
    Ok(load_csv(config.data_path()?, &config.label_column)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceOutcome {
    pub path: PathBuf,
    /// `(label name, before, after)`.
    pub counts: Vec<(String, usize, usize)>,
    pub rows: usize,
}

impl BalanceOutcome {
    pub fn report(&self) -> String {
        let mut s = String::from("label\tbefore\tafter\n");
        for (l, b, a) in &self.counts {
            let _ = writeln!(s, "{l}\t{b}\t{a}");
        }
        let _ = writeln!(s, "wrote {} rows to {}", self.rows, self.path.display());
        s
    }
}

/// Oversamples the whole dataset and writes `<out>/balanced.csv`.
pub fn cmd_balance(config: &RunConfig) -> Result<BalanceOutcome, CliError> {
    let loaded = load(config)?;
    let data = &loaded.dataset;
    let os_config = config.oversample_config(&loaded.label_names)?;
    let balanced = match config.oversample_space {
        OversampleSpace::Base => oversample(data, &os_config)?,
        OversampleSpace::Scaled => {
            let scaler = fit_scaler(data.x.view()).map_err(|e| CliError::Run(e.to_string()))?;
            let scaled = LabeledDataset {
                x: scaler.transform(data.x.view()).map_err(|e| CliError::Run(e.to_string()))?,
                ..data.clone()
            };
            let out = oversample(&scaled, &os_config)?;
            let mut x = scaler
                .inverse_transform(out.x.view())
                .map_err(|e| CliError::Run(e.to_string()))?;
            // originals keep their exact input values
            x.slice_mut(ndarray::s![..data.len(), ..]).assign(&data.x);
            LabeledDataset { x, ..out }
        }
    };
    let mut buf = Vec::new();
    loaded
        .write_dataset(&mut buf, &balanced)
        .map_err(|e| CliError::Run(e.to_string()))?;
    let path = write_file(&config.out_dir, "balanced.csv", &buf)?;
    let before = data.class_counts();
    let after = balanced.class_counts();
    let counts = loaded
        .label_names
        .iter()
        .enumerate()
        .map(|(c, name)| (name.clone(), before.get(c).unwrap_or(0), after.get(c).unwrap_or(0)))
        .collect();
    Ok(BalanceOutcome {
        path,
        counts,
        rows: balanced.len(),
    })
}

fn channel_field(c: Option<ChannelKind>) -> &'static str {
    c.map_or("none", ChannelKind::name)
}

pub fn metrics_csv(rows: &[ExperimentRow]) -> String {
    let mut s = String::from(METRICS_HEADER);
    s.push('\n');
    for r in rows {
        let [a, p, rc, f] = r.metrics.values();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.model,
            r.phase,
            channel_field(r.channel),
            g6(r.probability),
            r.fold,
            g6(a),
            g6(p),
            g6(rc),
            g6(f)
        );
    }
    s
}

pub fn aggregates_csv(rows: &[AggregateRow]) -> String {
    let mut s = String::from(AGGREGATES_HEADER);
    s.push('\n');
    for r in rows {
        let _ = write!(
            s,
            "{},{},{},{},{}",
            r.model,
            r.phase,
            channel_field(r.channel),
            g6(r.probability),
            r.n_folds
        );
        for m in [r.accuracy, r.precision, r.recall, r.f1] {
            let _ = write!(s, ",{},{}", g6(m.mean), g6(m.std));
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateOutcome {
    pub result: ExperimentResult,
    pub holdout: Option<ExperimentResult>,
    pub files: Vec<PathBuf>,
}

fn clean_summary(result: &ExperimentResult) -> String {
    let mut s = String::from("model\tphase\taccuracy\tf1\n");
    for a in result.aggregates.iter().filter(|a| a.channel.is_none()) {
        let _ = writeln!(
            s,
            "{}\t{}\t{} ± {}\t{} ± {}",
            a.model,
            a.phase,
            g6(a.accuracy.mean),
            g6(a.accuracy.std),
            g6(a.f1.mean),
            g6(a.f1.std)
        );
    }
    s
}

impl EvaluateOutcome {
    pub fn report(&self) -> String {
        let mut s = clean_summary(&self.result);
        for f in &self.files {
            let _ = writeln!(s, "wrote {}", f.display());
        }
        s
    }
}

/// Cross-validated before/after comparison; writes `metrics.csv` and
/// `aggregates.csv`, plus `holdout.csv` when a holdout fraction is set.
pub fn cmd_evaluate(config: &RunConfig) -> Result<EvaluateOutcome, CliError> {
    let loaded = load(config)?;
    let exp = config.experiment_config(&loaded.label_names)?;
    let result = run_experiment(&loaded.dataset, &exp)?;
    let mut files = vec![
        write_file(&config.out_dir, "metrics.csv", metrics_csv(&result.rows).as_bytes())?,
        write_file(&config.out_dir, "aggregates.csv", aggregates_csv(&result.aggregates).as_bytes())?,
    ];
    let holdout = if config.holdout > 0.0 {
        let h = run_holdout(&loaded.dataset, &exp, config.holdout)?;
        files.push(write_file(&config.out_dir, "holdout.csv", metrics_csv(&h.rows).as_bytes())?);
        Some(h)
    } else {
        None
    };
    Ok(EvaluateOutcome {
        result,
        holdout,
        files,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub result: ExperimentResult,
    pub files: Vec<PathBuf>,
}

/// Plot data for one channel: a comment header, then one row per probability
/// with the mean accuracy of every model.
pub fn sweep_dat(result: &ExperimentResult, config: &RunConfig, channel: ChannelKind) -> String {
    let mut s = String::from("# probability");
    for m in &config.models {
        let _ = write!(s, " {m}");
    }
    s.push('\n');
    for cell in config.noise_grid().into_iter().filter(|c| c.kind == channel) {
        s.push_str(&g6(cell.probability));
        for &m in &config.models {
            let acc = result
                .aggregate(m, config.sweep_phase, Some(cell))
                .map_or(f64::NAN, |a| a.accuracy.mean);
            let _ = write!(s, " {}", g6(acc));
        }
        s.push('\n');
    }
    s
}

/// Accuracy against noise strength for every channel in the grid; writes
/// `sweep.csv` and one `sweep_<channel>.dat` per channel.
pub fn cmd_noise_sweep(config: &RunConfig) -> Result<SweepOutcome, CliError> {
    if config.noise_grid().is_empty() {
        return Err(ConfigError::Invalid("noise sweep needs channels and probabilities".into()).into());
    }
    let loaded = load(config)?;
    let exp = config.experiment_config(&loaded.label_names)?;
    let result = run_experiment(&loaded.dataset, &exp)?;
    let mut files = vec![write_file(
        &config.out_dir,
        "sweep.csv",
        aggregates_csv(&result.aggregates).as_bytes(),
    )?];
    let mut seen = Vec::new();
    for &kind in &config.channels {
        if seen.contains(&kind) {
            continue;
        }
        seen.push(kind);
        let name = format!("sweep_{}.dat", kind.name());
        files.push(write_file(&config.out_dir, &name, sweep_dat(&result, config, kind).as_bytes())?);
    }
    Ok(SweepOutcome { result, files })
}

/// Text report and overall verdict for a set of CPTP checks.
pub fn channel_report(reports: &[CptpReport]) -> (String, bool) {
    let mut s = String::from("channel\tcompleteness\ttrace\thermiticity\tmin_eig\tmixture\tstatus\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{}\t{:.3e}\t{:.3e}\t{:.3e}\t{:.3e}\t{}\t{}",
            r.name,
            r.max_completeness_residual,
            r.max_trace_error,
            r.max_hermiticity_residual,
            r.min_eigenvalue,
            r.max_mixture_residual.map_or("-".to_string(), |m| format!("{m:.3e}")),
            if r.passed { "ok" } else { "FAIL" }
        );
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    let worst = reports
        .iter()
        .map(|r| r.max_completeness_residual)
        .fold(0.0f64, f64::max);
    let _ = writeln!(s, "max completeness residual {worst:.3e}");
    let _ = writeln!(s, "{passed}/{} channels CPTP", reports.len());
    (s, passed == reports.len())
}

/// CPTP sweep of the six channels over `points` probabilities.
pub fn cmd_validate_channels(points: usize) -> Result<String, CliError> {
    let (text, ok) = channel_report(&validate_all(points));
    if ok {
        Ok(text)
    } else {
        Err(CliError::Invariant(text))
    }
}

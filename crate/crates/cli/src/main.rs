use clap::{Args, Parser, Subcommand};
use qsmote_cli::commands::{self, CliError, EXIT_CONFIG, EXIT_OK};
use qsmote_cli::config::{ConfigError, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qsmote", version, about = "Quantum-inspired oversampling and noise-robustness evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Oversample every minority class and write balanced.csv
    Balance(RunArgs),
    /// Cross-validate all models before and after oversampling
    Evaluate(RunArgs),
    /// Accuracy against noise probability for each channel
    NoiseSweep(RunArgs),
    /// Check that every noise channel is completely positive and trace preserving
    ValidateChannels {
        /// Number of probabilities checked per channel
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    /// key = value configuration file
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Input CSV
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Override any configuration key
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut c = RunConfig::default();
        if let Some(path) = &self.config {
            c.apply_file(path)?;
        }
        c.apply_env(|k| std::env::var(k).ok())?;
        if let Some(d) = &self.data {
            c.data = Some(d.clone());
        }
        if let Some(o) = &self.out {
            c.out_dir = o.clone();
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| ConfigError::BadValue {
                key: "--set".into(),
                value: kv.clone(),
                reason: "expected KEY=VALUE".into(),
            })?;
            c.set(k, v)?;
        }
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Balance(a) => Ok(commands::cmd_balance(&a.resolve()?)?.report()),
        Command::Evaluate(a) => Ok(commands::cmd_evaluate(&a.resolve()?)?.report()),
        Command::NoiseSweep(a) => {
            let out = commands::cmd_noise_sweep(&a.resolve()?)?;
            Ok(out
                .files
                .iter()
                .map(|f| format!("wrote {}\n", f.display()))
                .collect())
        }
        Command::ValidateChannels { points } => commands::cmd_validate_channels(points),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(CliError::Invariant(text)) => {
            print!("{text}");
            ExitCode::from(commands::EXIT_INTERNAL as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

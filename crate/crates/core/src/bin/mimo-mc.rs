use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mimo_mc::config::{ExperimentConfig, ExperimentKind};
use mimo_mc::harness::{self, AcceptanceOptions};
use mimo_mc::textio;
use mimo_mc::Error;

/// Coherence, bounds and matrix-completion experiments for MIMO radar data matrices.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Override a config key, e.g. `--set sweep.values=[10,20]`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Measured coherence and its bound versus array size.
    CoherenceSweep(Common),
    /// Coherence bound versus array size for several angular margins.
    EtaSweep(Common),
    /// Kernel surface over [-pi, pi]^2.
    Surface(Common),
    /// Recovery success rate versus sample count.
    RecoveryPhase(Common),
    /// Bound report for one configured scene.
    Bounds(Common),
    /// Complete a partially observed matrix.
    Complete {
        #[command(flatten)]
        common: Common,
        /// Observation file; generated from the config when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Write the residual history (`iter,residual`) here.
        #[arg(long)]
        residuals: Option<PathBuf>,
    },
    /// Run every acceptance criterion.
    Acceptance {
        #[command(flatten)]
        common: Common,
        /// Skip the large recovery-phase sweep.
        #[arg(long)]
        quick: bool,
    },
}

enum Failure {
    Config(String),
    Run(String),
    Property,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => Failure::Config(msg),
            Error::Parse { .. } => Failure::Config(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

fn load(common: &Common, kind: ExperimentKind) -> Result<ExperimentConfig, Failure> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut overrides = common.overrides.clone();
    if let Some(s) = common.seed {
        overrides.push(format!("seed={s}"));
    }
    let cfg = ExperimentConfig::from_toml_with(&text, &overrides)?;
    if cfg.kind != kind {
        return Err(Failure::Config(format!("config kind is {:?}, command expects {kind:?}", cfg.kind)));
    }
    Ok(cfg)
}

fn emit(common: &Common, cfg_output: Option<&str>, text: &str) -> Result<(), Failure> {
    match common.output.clone().or_else(|| cfg_output.map(PathBuf::from)) {
        Some(p) => fs::write(&p, text).map_err(|e| Failure::Run(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::CoherenceSweep(c) => {
            let cfg = load(&c, ExperimentKind::CoherenceSweep)?;
            emit(&c, cfg.output.as_deref(), &harness::run_coherence_sweep(&cfg)?.render())
        }
        Command::EtaSweep(c) => {
            let cfg = load(&c, ExperimentKind::EtaSweep)?;
            emit(&c, cfg.output.as_deref(), &harness::run_eta_sweep(&cfg)?.render())
        }
        Command::Surface(c) => {
            let cfg = load(&c, ExperimentKind::Surface)?;
            emit(&c, cfg.output.as_deref(), &harness::run_surface(&cfg)?.render())
        }
        Command::RecoveryPhase(c) => {
            let cfg = load(&c, ExperimentKind::RecoveryPhase)?;
            emit(&c, cfg.output.as_deref(), &harness::run_recovery_phase(&cfg)?.render())
        }
        Command::Bounds(c) => {
            let cfg = load(&c, ExperimentKind::Bounds)?;
            emit(&c, cfg.output.as_deref(), &harness::run_bounds(&cfg)?)
        }
        Command::Complete {
            common,
            input,
            residuals,
        } => {
            let (cfg, obs) = match (&input, &common.config) {
                (Some(p), _) => {
                    let text = fs::read_to_string(p).map_err(|e| Failure::Run(format!("{}: {e}", p.display())))?;
                    let cfg = match common.config {
                        Some(_) => Some(load(&common, ExperimentKind::Complete)?),
                        None => None,
                    };
                    (cfg, textio::read_observation(&text)?)
                }
                (None, Some(_)) => {
                    let cfg = load(&common, ExperimentKind::Complete)?;
                    let m = *cfg
                        .sweep
                        .values
                        .first()
                        .ok_or_else(|| Failure::Config("sweep.values must give the sample count".into()))?;
                    let obs = harness::make_instance(&cfg, 0, m)?.obs;
                    (Some(cfg), obs)
                }
                (None, None) => return Err(Failure::Config("complete needs --input or --config".into())),
            };
            let cfg = match cfg {
                Some(c) => c,
                None => ExperimentConfig::from_toml("kind = \"complete\"\n[tx]\nkind = \"ula\"\nspacing = 0.5\nwavelength = 1.0\n")?,
            };
            let result = harness::complete(&cfg, &obs)?;
            if let Some(p) = residuals {
                fs::write(&p, result.residual_csv()).map_err(|e| Failure::Run(format!("{}: {e}", p.display())))?;
            }
            eprintln!("iterations={} converged={}", result.iterations, result.converged);
            emit(&common, cfg.output.as_deref(), &textio::write_matrix(&result.estimate))
        }
        Command::Acceptance { common, quick } => {
            let mut opts = AcceptanceOptions::default();
            if let Some(s) = common.seed {
                opts.seed = s;
            }
            opts.phase_sweep = !quick;
            let report = harness::run_acceptance(&opts);
            emit(&common, None, &report.to_string())?;
            if report.all_passed() {
                Ok(())
            } else {
                Err(Failure::Property)
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Property) => ExitCode::from(1),
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("invalid config: {msg}");
            ExitCode::from(2)
        }
    }
}

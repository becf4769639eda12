//! Argument parsing and subcommand dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dmv_core::estimator;

use crate::config::{self, ExperimentConfig, ProblemSource};
use crate::error::{CliError, CliResult};
use crate::formats;

#[derive(Debug, Parser)]
#[command(name = "dmv", version, about = "Density-matrix vectorization experiments")]
pub struct Cli {
    /// Worker threads for sweeps (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the substitute Hamiltonian of a Hamiltonian file as JSON.
    Transform {
        hamiltonian: PathBuf,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the ratio once, exactly and from shots.
    Estimate(RunArgs),
    /// Run a full optimization.
    Vqe(RunArgs),
    /// Repeat `vqe` over noise strengths and Hamiltonian files.
    Sweep(RunArgs),
    /// Evaluate closed-form bounds.
    #[command(subcommand)]
    Analyze(Analyze),
    /// Print the default config of a preset.
    Preset { name: String },
    /// Check a config and print every violation.
    Validate(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Config file (an earlier run's manifest.json also works).
    #[arg(value_name = "CONFIG")]
    pub positional: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Use a built-in preset instead of a config file.
    #[arg(long, conflicts_with_all = ["config", "positional"])]
    pub preset: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default: the config's `output`, else `runs/<command>`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Analyze {
    /// Shot count for accuracy `eps` and, with `--eta`, the gradient bound.
    Bound(BoundArgs),
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub zeta: f64,
    #[arg(long = "L")]
    pub l: usize,
    #[arg(long = "K")]
    pub k: usize,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, conflicts_with = "preset")]
    pub hamiltonian: Option<PathBuf>,
    /// Built-in problem whose Hamiltonian enters the bound (default `h2`).
    #[arg(long)]
    pub preset: Option<String>,
}

impl RunArgs {
    pub fn load(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = match (&self.preset, self.config.as_ref().or(self.positional.as_ref())) {
            (Some(name), _) => config::preset(name)?,
            (None, Some(path)) => ExperimentConfig::load(path)?,
            (None, None) => return Err(CliError::Usage("expected a config file or --preset".into())),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }

    fn out_dir(&self, cfg: &ExperimentConfig, command: &str) -> PathBuf {
        self.out
            .clone()
            .or_else(|| cfg.output.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| Path::new("runs").join(command))
    }
}

// println! panics on a closed pipe (`dmv preset h2 | head`).
macro_rules! out {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout().lock(), $($arg)*).map_err(|e| CliError::io("<stdout>", e))?
    };
}

fn print_json<T: serde::Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("value serializes");
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{text}").map_err(|e| CliError::io("<stdout>", e))
}

pub fn bound(args: &BoundArgs) -> CliResult<Vec<(String, f64)>> {
    let h = match (&args.hamiltonian, &args.preset) {
        (Some(path), _) => formats::read_hamiltonian(path)?.1,
        (None, name) => {
            let name = name.clone().unwrap_or_else(|| "h2".into());
            config::resolve(&ProblemSource::Preset { name })?.hamiltonian
        }
    };
    let mut out = vec![(
        "shots".to_string(),
        estimator::sampling_bound(args.zeta, args.l, args.k, args.eps, &h)?,
    )];
    if let Some(eta) = args.eta {
        out.push(("gradient_bound".into(), estimator::gradient_bound(args.l, args.k, &h, eta)?));
    }
    Ok(out)
}

pub fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Transform { hamiltonian, out } => {
            let (_, h) = formats::read_hamiltonian(&hamiltonian)?;
            let dump = formats::transform_dump(&h)?;
            match out {
                Some(path) => {
                    let mut text = serde_json::to_string_pretty(&dump).expect("dump serializes");
                    text.push('\n');
                    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
                }
                None => print_json(&dump)?,
            }
        }
        Command::Estimate(a) => {
            let cfg = a.load()?;
            let report = crate::run::run_estimate(&cfg, &a.out_dir(&cfg, "estimate"))?;
            out!("exact      {:.12}", report.exact);
            out!(
                "shots      {:.12}  (N = {}, |error| = {:.3e}, predicted rmse = {:.3e})",
                report.shots.value,
                report.shots.shots_used,
                report.shots.abs_error,
                report.shots.predicted_mse.sqrt()
            );
        }
        Command::Vqe(a) => {
            let cfg = a.load()?;
            let summary = crate::run::run_vqe(&cfg, &a.out_dir(&cfg, "vqe"))?;
            print_json(&summary)?;
        }
        Command::Sweep(a) => {
            let cfg = a.load()?;
            let rows = crate::run::run_sweep(&cfg, &a.out_dir(&cfg, "sweep"))?;
            for r in rows {
                out!(
                    "{:>3} {:<10} p={:<8} cost={:.8} fidelity={}",
                    r.index,
                    r.kind,
                    r.noise,
                    r.final_cost,
                    r.fidelity.map(|f| format!("{f:.6}")).unwrap_or_else(|| "-".into())
                );
            }
        }
        Command::Analyze(Analyze::Bound(b)) => {
            for (name, value) in bound(&b)? {
                out!("{name} = {value:e}");
            }
        }
        Command::Preset { name } => {
            out!("{}", config::preset(&name)?.to_json());
        }
        Command::Validate(a) => {
            a.load()?.validate()?;
            out!("ok");
        }
    }
    Ok(())
}

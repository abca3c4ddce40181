use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use collective_engine::su3::IrrepLabel;
use engine_cli::commands::{self, Artifact};
use engine_cli::config::{EngineSection, ExperimentConfig, ModelName};
use engine_cli::{CliError, Result};

/// Collective three-level heat engines in SU(3) irrep blocks.
#[derive(Debug, Parser)]
#[command(name = "engine", version)]
struct Cli {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; CSVs go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Override the model in the configuration.
    #[arg(long, global = true)]
    model: Option<ModelName>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Irrep dimensions and multiplicities for n particles.
    Decompose {
        #[arg(long)]
        n: u32,
    },
    /// Steady-state thermodynamics per irrep.
    Steady,
    /// Thermodynamic and spectral scalars on the sweep grid.
    Sweep,
    /// Emission spectra, g2(0) and first-order correlators.
    Spectrum,
    /// Compare the block route against the full-space oracle.
    Validate {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 5)]
        draws: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Weight diagram of one irrep (`--irrep p,q`) or of every irrep of n particles.
    Weights {
        #[arg(long, value_parser = parse_irrep)]
        irrep: Option<IrrepLabel>,
        #[arg(long)]
        n: Option<u32>,
    },
}

fn parse_irrep(s: &str) -> std::result::Result<IrrepLabel, String> {
    let (p, q) = s.split_once(',').ok_or("expected p,q")?;
    let p = p.trim().parse().map_err(|e| format!("{e}"))?;
    let q = q.trim().parse().map_err(|e| format!("{e}"))?;
    Ok(IrrepLabel::new(p, q))
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("this command needs --config PATH".into()))?;
    let cfg = commands::with_model(ExperimentConfig::load(path)?, cli.model);
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: Option<&ExperimentConfig>) -> Option<PathBuf> {
    cli.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output.dir.as_ref().map(PathBuf::from)))
}

fn emit(artifacts: &[Artifact], dir: Option<&Path>) -> Result<()> {
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.display().to_string(),
                source,
            })?;
            for a in artifacts {
                let path = dir.join(&a.name);
                std::fs::write(&path, &a.contents).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                println!("{}", path.display());
            }
        }
        None => {
            if let Some(first) = artifacts.first() {
                print!("{}", first.contents);
            }
            if artifacts.len() > 1 {
                log::warn!("{} further tables not written; pass --out DIR", artifacts.len() - 1);
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Decompose { n } => emit(&[commands::decompose(*n)?], cli.out.as_deref()),
        Command::Steady => {
            let cfg = load_config(cli)?;
            emit(
                &[commands::steady(&cfg, cli.jobs)?],
                out_dir(cli, Some(&cfg)).as_deref(),
            )
        }
        Command::Sweep => {
            let cfg = load_config(cli)?;
            emit(&[commands::sweep(&cfg, cli.jobs)?], out_dir(cli, Some(&cfg)).as_deref())
        }
        Command::Spectrum => {
            let cfg = load_config(cli)?;
            emit(
                &commands::spectrum(&cfg, cli.jobs)?,
                out_dir(cli, Some(&cfg)).as_deref(),
            )
        }
        Command::Validate { n, draws, seed } => {
            let cfg = match &cli.config {
                Some(_) => Some(load_config(cli)?),
                None => None,
            };
            let report = commands::validate(*n, cfg.as_ref(), *draws, *seed)?;
            let json = report.to_json();
            match &cli.out {
                Some(dir) => emit(
                    &[Artifact {
                        name: format!("validate_n{n}.json"),
                        contents: json + "\n",
                    }],
                    Some(dir),
                )?,
                None => println!("{json}"),
            }
            if report.passed {
                Ok(())
            } else {
                let failed = report.checks.iter().filter(|c| !c.passed).count();
                Err(CliError::Validation(format!(
                    "{failed} of {} checks failed",
                    report.checks.len()
                )))
            }
        }
        Command::Weights { irrep, n } => {
            let engine = match &cli.config {
                Some(_) => load_config(cli)?.engine,
                None => EngineSection::default(),
            };
            let labels = match (irrep, n) {
                (Some(l), None) => vec![*l],
                (None, Some(n)) => collective_engine::schur_weyl::irrep_labels(*n),
                _ => {
                    return Err(CliError::Config(
                        "weights needs exactly one of --irrep p,q or --n N".into(),
                    ))
                }
            };
            emit(
                &[commands::weights(&labels, engine.omega_c, engine.omega_h)?],
                cli.out.as_deref(),
            )
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    faer::set_global_parallelism(faer::Par::Seq);
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

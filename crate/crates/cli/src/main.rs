use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use overhauser_core::config::ExperimentConfig;
use overhauser_core::runner::{load_config, run_experiment};
use overhauser_core::{presets, Error};

#[derive(Parser)]
#[command(name = "sim", version, about = "Electron-spin qubit and nuclear-bath simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML config file or a preset name.
    Run {
        config: String,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Inspect the bundled presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// List preset names.
    List,
    /// Print a preset's TOML.
    Show { name: String },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::FitFailed { .. } => 3,
        Error::Io { .. } => 1,
        _ => 2,
    }
}

fn resolve(config: &str) -> Result<(ExperimentConfig, String), Error> {
    let path = Path::new(config);
    if path.exists() {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        return Ok((load_config(path)?, stem));
    }
    if presets::source(config).is_some() {
        return Ok((presets::load(config)?, config.to_string()));
    }
    Err(Error::Config(format!(
        "`{config}` is neither a readable file nor a preset; run `sim presets list`"
    )))
}

fn run(config: &str, seed: Option<u64>, out: Option<PathBuf>, threads: Option<usize>) -> Result<(), Error> {
    let (mut cfg, stem) = resolve(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
        cfg.ensemble.seed = seed;
    }
    let dir = out
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| Path::new("out").join(&stem));
    let output = match threads {
        Some(n) => {
            if n == 0 {
                return Err(Error::Config("--threads must be >= 1".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| run_experiment(&cfg))?
        }
        None => run_experiment(&cfg)?,
    };
    for path in output.write_to(&dir)? {
        println!("wrote {}", path.display());
    }
    for (k, v) in &output.summary {
        println!("{k} = {v}");
    }
    match output.fit_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            out,
            threads,
        } => run(&config, seed, out, threads),
        Command::Presets { action } => match action {
            PresetAction::List => {
                for name in presets::names() {
                    println!("{name:<14}{}", presets::description(name).unwrap_or(""));
                }
                Ok(())
            }
            PresetAction::Show { name } => match presets::source(&name) {
                Some(src) => {
                    print!("{src}");
                    Ok(())
                }
                None => Err(Error::Config(format!("unknown preset `{name}`"))),
            },
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

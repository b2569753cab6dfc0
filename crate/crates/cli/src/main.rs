use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use spinchain_cli::{cmd_ensemble, cmd_preset, cmd_run, cmd_sweep, parse_config, Config, Overrides, Preset};

#[derive(Parser)]
#[command(name = "spinchain", version, about = "Spin-chain transfer simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single realisation time series.
    Run(Common),
    /// Mean/std time series over the realisations.
    Ensemble(Common),
    /// Probe ensemble against chain length, plus trend fits.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Chain lengths, e.g. 6,7,8 (overrides [sweep] n_values).
        #[arg(long, value_delimiter = ',')]
        n_values: Option<Vec<usize>>,
    },
    /// Regenerate a figure panel.
    Preset {
        #[arg(value_enum)]
        name: Preset,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        realisations: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Master seed, overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realisations: Option<usize>,
}

impl Common {
    fn load(&self) -> anyhow::Result<Config> {
        let text = std::fs::read_to_string(&self.config)
            .with_context(|| format!("reading config {}", self.config.display()))?;
        parse_config(&text).with_context(|| format!("in {}", self.config.display()))
    }

    fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, realisations: self.realisations }
    }

    fn source(&self) -> String {
        self.config.display().to_string()
    }
}

fn run(cli: Cli) -> anyhow::Result<(PathBuf, usize)> {
    let m = match &cli.command {
        Command::Run(c) => cmd_run(&c.load()?, &c.source(), &c.out, c.overrides())?,
        Command::Ensemble(c) => cmd_ensemble(&c.load()?, &c.source(), &c.out, c.overrides())?,
        Command::Sweep { common: c, n_values } => {
            cmd_sweep(&c.load()?, &c.source(), n_values.as_deref(), &c.out, c.overrides())?
        }
        Command::Preset { name, out, seed, realisations } => {
            cmd_preset(*name, Path::new(out), Overrides { seed: *seed, realisations: *realisations })?
        }
    };
    Ok((m.out_dir, m.files.len()))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((dir, files)) => {
            eprintln!("wrote {files} file(s) and manifest to {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

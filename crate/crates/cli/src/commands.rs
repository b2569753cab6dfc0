//! Subcommands. Each writes its CSVs into the output directory and finishes
//! with `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use serde::Serialize;
use serde_json::json;

use spinchain_core::{
    fit_trend, sweep_chain_length, Experiment, ExperimentConfig, InputKind, PerturbationSpec, ProbeTime,
    SweepPoint, TrendModel,
};

use crate::config::{default_probe, Config};

pub const MANIFEST_NAME: &str = "manifest.json";

/// Seed of the single realisation shown by the fig1 presets.
pub const FIG1_SEED: u64 = 20110;
/// Master seed of the fig2 preset ensembles.
pub const FIG2_SEED: u64 = 2011;

/// Record of one command invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Config path or `preset:<name>`.
    pub source: String,
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    pub duration_seconds: f64,
    pub seed: u64,
}

/// Values from the command line that override the config.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub realisations: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            config.perturbation.seed = seed;
        }
        if let Some(r) = self.realisations {
            config.realisations = r;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Fig1a,
    Fig1b,
    Fig1c,
    Fig2a,
    Fig2b,
    Fig2c,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1a => "fig1a",
            Preset::Fig1b => "fig1b",
            Preset::Fig1c => "fig1c",
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig2c => "fig2c",
        }
    }

    pub fn input(self) -> InputKind {
        match self {
            Preset::Fig1a | Preset::Fig2a => InputKind::TypeI,
            Preset::Fig1b | Preset::Fig2b => InputKind::TypeII,
            Preset::Fig1c | Preset::Fig2c => InputKind::TypeIII,
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        <Preset as clap::ValueEnum>::from_str(s, true).map_err(|_| anyhow::anyhow!("unknown preset {s:?}"))
    }
}

/// Collects emitted files and writes the manifest last.
struct Output {
    dir: PathBuf,
    files: Vec<String>,
    start: Instant,
}

impl Output {
    fn create(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new(), start: Instant::now() })
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &serde_json::Value) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, serde_json::to_string_pretty(value)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn finish(self, command: &str, source: &str, seed: u64) -> anyhow::Result<RunManifest> {
        let manifest = RunManifest {
            command: command.to_string(),
            source: source.to_string(),
            out_dir: self.dir.clone(),
            files: self.files,
            duration_seconds: self.start.elapsed().as_secs_f64(),
            seed,
        };
        let path = self.dir.join(MANIFEST_NAME);
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(manifest)
    }
}

/// 16 significant digits, round-trippable.
fn num(x: f64) -> String {
    format!("{x:.15e}")
}

fn write_series(out: &mut Output, name: &str, config: &ExperimentConfig) -> anyhow::Result<()> {
    let series = Experiment::new(config.clone())?.run_realization(0)?;
    let rows = (0..series.len())
        .map(|i| vec![num(series.grid.points()[i] / series.grid.t_s()), num(series.fidelity[i]), num(series.eof[i])]);
    out.csv(name, &["t_over_ts", "fidelity", "eof"], rows)
}

fn write_sweep(
    out: &mut Output,
    stem: &str,
    config: &ExperimentConfig,
    n_values: &[usize],
    probe: ProbeTime,
) -> anyhow::Result<()> {
    let points = sweep_chain_length(config, n_values, probe)?;
    out.csv(
        &format!("{stem}.csv"),
        &["N", "mean", "std"],
        points.iter().map(|p| vec![p.n.to_string(), num(p.mean), num(p.std)]),
    )?;
    out.json(&format!("{stem}_fit.json"), &fit_sidecar(&points, probe))
}

fn fit_sidecar(points: &[SweepPoint], probe: ProbeTime) -> serde_json::Value {
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.mean)).collect();
    let fits: Vec<serde_json::Value> = [TrendModel::ExponentialInN, TrendModel::GaussianInParameter]
        .into_iter()
        .map(|model| match fit_trend(&xy, model) {
            Ok(f) => json!({
                "model": model.to_string(),
                "amplitude": f.amplitude,
                "rate": f.rate,
                "width": f.width(),
                "rss": f.rss,
                "residuals": f.residuals,
            }),
            Err(e) => json!({ "model": model.to_string(), "error": e.to_string() }),
        })
        .collect();
    json!({
        "probe": match probe {
            ProbeTime::FirstRevival => "first_revival",
            ProbeTime::FirstTransfer => "first_transfer",
        },
        "n": points.iter().map(|p| p.n).collect::<Vec<_>>(),
        "realisations": points.first().map_or(0, |p| p.realisations),
        "fits": fits,
    })
}

/// One realisation (index 0) of the config.
pub fn cmd_run(config: &Config, source: &str, out_dir: &Path, overrides: Overrides) -> anyhow::Result<RunManifest> {
    let mut c = config.experiment.clone();
    overrides.apply(&mut c);
    let mut out = Output::create(out_dir)?;
    write_series(&mut out, "run.csv", &c)?;
    out.finish("run", source, c.master_seed())
}

/// Mean and standard deviation over the configured realisations.
pub fn cmd_ensemble(
    config: &Config,
    source: &str,
    out_dir: &Path,
    overrides: Overrides,
) -> anyhow::Result<RunManifest> {
    let mut c = config.experiment.clone();
    overrides.apply(&mut c);
    let summary = Experiment::new(c.clone())?.run_ensemble()?;
    let mut out = Output::create(out_dir)?;
    let rows = (0..summary.grid.len()).map(|i| {
        vec![
            num(summary.grid.points()[i] / summary.grid.t_s()),
            num(summary.mean_fidelity[i]),
            num(summary.std_fidelity[i]),
            num(summary.mean_eof[i]),
            num(summary.std_eof[i]),
        ]
    });
    out.csv("ensemble.csv", &["t_over_ts", "mean_fidelity", "std_fidelity", "mean_eof", "std_eof"], rows)?;
    out.finish("ensemble", source, c.master_seed())
}

/// Probe ensemble at each chain length plus trend fits.
pub fn cmd_sweep(
    config: &Config,
    source: &str,
    n_values: Option<&[usize]>,
    out_dir: &Path,
    overrides: Overrides,
) -> anyhow::Result<RunManifest> {
    let mut c = config.experiment.clone();
    overrides.apply(&mut c);
    let n_values = match n_values.or(config.sweep.n_values.as_deref()) {
        Some(v) => v.to_vec(),
        None => bail!("sweep needs chain lengths: pass --n-values or set [sweep] n_values"),
    };
    let probe = config.sweep.probe.unwrap_or_else(|| default_probe(&c.input));
    let mut out = Output::create(out_dir)?;
    write_sweep(&mut out, "sweep", &c, &n_values, probe)?;
    out.finish("sweep", source, c.master_seed())
}

/// Regenerate one figure panel.
pub fn cmd_preset(preset: Preset, out_dir: &Path, overrides: Overrides) -> anyhow::Result<RunManifest> {
    let name = preset.name();
    let mut out = Output::create(out_dir)?;
    let seed;
    match preset {
        Preset::Fig1a | Preset::Fig1b | Preset::Fig1c => {
            seed = overrides.seed.unwrap_or(FIG1_SEED);
            for (chi, tag) in [(0.03, "0.03"), (0.1, "0.1")] {
                let c = ExperimentConfig::new(10, preset.input())
                    .with_perturbation(PerturbationSpec { chi, seed, ..Default::default() })
                    .with_realisations(1);
                write_series(&mut out, &format!("{name}_chi{tag}.csv"), &c)?;
            }
        }
        Preset::Fig2a | Preset::Fig2b | Preset::Fig2c => {
            seed = overrides.seed.unwrap_or(FIG2_SEED);
            let c = ExperimentConfig::new(6, preset.input())
                .with_perturbation(PerturbationSpec { chi: 0.03, seed, ..Default::default() })
                .with_realisations(overrides.realisations.unwrap_or(100));
            let probe = default_probe(&c.input);
            let n_values: Vec<usize> = (6..=15).collect();
            write_sweep(&mut out, name, &c, &n_values, probe)?;
        }
    }
    out.finish("preset", &format!("preset:{name}"), seed)
}

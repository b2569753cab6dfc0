//! TOML experiment configs.
//!
//! ```toml
//! chain_length = 10          # alias: N
//! input = "TypeI"            # or a list of { state = "1100", re = .., im = .. }
//! chi = 0.03
//! seed = 7
//! realisations = 100
//!
//! [grid]
//! periods = 4.0
//! points = 801
//!
//! [observable]
//! fidelity_target = "initial"   # or "mirror"
//! eof_sites = [9, 10]
//!
//! [sweep]
//! n_values = [6, 7, 8, 9, 10]
//! probe = "first_revival"       # or "first_transfer"
//! ```

use anyhow::{bail, Context};
use num_complex::Complex64;
use serde::Deserialize;

use spinchain_core::{
    ExperimentConfig, FidelityTarget, GridSpec, InputKind, InputSpec, ObservableSpec, OccupationState,
    PerturbationSpec, ProbeTime, ProfileKind, SiteEnergies,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(alias = "N")]
    chain_length: Option<usize>,
    max_excitations: Option<usize>,
    input: Option<RawInput>,
    j0: Option<f64>,
    profile: Option<RawProfile>,
    eta: Option<f64>,
    epsilon: Option<RawEpsilon>,
    gamma: Option<f64>,
    delta: Option<f64>,
    chi: Option<f64>,
    chi_cross_sector: Option<bool>,
    chi_diagonal: Option<bool>,
    seed: Option<u64>,
    realisations: Option<usize>,
    grid: Option<RawGrid>,
    observable: Option<RawObservable>,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawInput {
    Kind(String),
    Custom(Vec<RawTerm>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    state: String,
    #[serde(default)]
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawProfile {
    #[serde(alias = "perfect_transfer")]
    Pst,
    Uniform,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawEpsilon {
    Uniform(f64),
    PerSite(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    periods: Option<f64>,
    points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObservable {
    fidelity_target: Option<RawTarget>,
    eof_sites: Option<[usize; 2]>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawTarget {
    Initial,
    Mirror,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    n_values: Option<Vec<usize>>,
    probe: Option<RawProbe>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawProbe {
    FirstRevival,
    FirstTransfer,
}

/// Sweep settings; absent fields fall back to command-line values or the
/// input-dependent default probe.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepSettings {
    pub n_values: Option<Vec<usize>>,
    pub probe: Option<ProbeTime>,
}

/// A parsed config file.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub experiment: ExperimentConfig,
    pub sweep: SweepSettings,
}

/// Probe time used by sweeps when none is configured: revival for TypeI,
/// transfer for the entangled inputs.
pub fn default_probe(input: &InputSpec) -> ProbeTime {
    match input {
        InputSpec::Canonical(InputKind::TypeI) => ProbeTime::FirstRevival,
        _ => ProbeTime::FirstTransfer,
    }
}

/// Parse and validate a config document. Errors name the offending key.
pub fn parse_config(text: &str) -> anyhow::Result<Config> {
    let de = toml::Deserializer::parse(text).context("malformed config document")?;
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        anyhow::anyhow!("config error at `{path}`: {}", e.into_inner().message())
    })?;

    let Some(n) = raw.chain_length else {
        bail!("config error at `chain_length`: missing required key");
    };
    let input = match raw.input {
        None => bail!("config error at `input`: missing required key"),
        Some(RawInput::Kind(s)) => InputSpec::Canonical(
            s.parse::<InputKind>().map_err(|e| anyhow::anyhow!("config error at `input`: {e}"))?,
        ),
        Some(RawInput::Custom(terms)) => {
            if terms.is_empty() {
                bail!("config error at `input`: custom input needs at least one term");
            }
            let mut out = Vec::with_capacity(terms.len());
            for (i, t) in terms.into_iter().enumerate() {
                let state: OccupationState =
                    t.state.parse().map_err(|e| anyhow::anyhow!("config error at `input[{i}].state`: {e}"))?;
                if state.len() != n {
                    bail!("config error at `input[{i}].state`: {} sites, chain_length is {n}", state.len());
                }
                out.push((state, Complex64::new(t.re, t.im)));
            }
            InputSpec::Custom(out)
        }
    };

    let mut experiment = ExperimentConfig::new(n, InputKind::TypeI);
    experiment.input = input;
    if let Some(k) = raw.max_excitations {
        experiment.max_excitations = k;
    }
    if let Some(j0) = raw.j0 {
        experiment.j0 = j0;
    }
    experiment.profile = match raw.profile.unwrap_or(RawProfile::Pst) {
        RawProfile::Pst => ProfileKind::PerfectTransfer,
        RawProfile::Uniform => ProfileKind::Uniform,
    };
    let defaults = PerturbationSpec::default();
    experiment.perturbation = PerturbationSpec {
        eta: raw.eta.unwrap_or(defaults.eta),
        epsilon: match raw.epsilon {
            None => defaults.epsilon,
            Some(RawEpsilon::Uniform(e)) => SiteEnergies::Uniform(e),
            Some(RawEpsilon::PerSite(v)) => SiteEnergies::PerSite(v),
        },
        gamma: raw.gamma.unwrap_or(defaults.gamma),
        delta: raw.delta.unwrap_or(defaults.delta),
        chi: raw.chi.unwrap_or(defaults.chi),
        chi_cross_sector: raw.chi_cross_sector.unwrap_or(defaults.chi_cross_sector),
        chi_diagonal: raw.chi_diagonal.unwrap_or(defaults.chi_diagonal),
        seed: raw.seed.unwrap_or(defaults.seed),
    };
    if let Some(r) = raw.realisations {
        experiment.realisations = r;
    }
    if let Some(g) = raw.grid {
        let d = GridSpec::default();
        experiment.grid = GridSpec { periods: g.periods.unwrap_or(d.periods), points: g.points.unwrap_or(d.points) };
    }
    if let Some(o) = raw.observable {
        experiment.observable = ObservableSpec {
            fidelity_target: match o.fidelity_target {
                Some(RawTarget::Mirror) => FidelityTarget::Mirror,
                _ => FidelityTarget::Initial,
            },
            eof_sites: o.eof_sites.map(|[a, b]| (a, b)),
        };
    }
    experiment.validate().map_err(|e| anyhow::anyhow!("invalid config: {e}"))?;

    let sweep = raw
        .sweep
        .map(|s| SweepSettings {
            n_values: s.n_values,
            probe: s.probe.map(|p| match p {
                RawProbe::FirstRevival => ProbeTime::FirstRevival,
                RawProbe::FirstTransfer => ProbeTime::FirstTransfer,
            }),
        })
        .unwrap_or_default();
    Ok(Config { experiment, sweep })
}

//! Disorder-averaged observables, chain-length sweeps and trend fits.
//!
//! Realisation `r` of an experiment draws every random matrix element from
//! its own generator, seeded by [`realization_seed`]`(seed, r)`. Results are
//! gathered by index and reduced with compensated sums, so an ensemble is a
//! pure function of its configuration whatever the thread schedule.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{config_err, Error, Result};
use crate::evolution::{eigendecompose, system_time, Spectrum, TimeGrid};
use crate::hamiltonian::{build_base, CouplingProfile, HamiltonianMatrix, PerturbationSpec, ProfileKind};
use crate::hilbert::{make_custom_state, make_input_state, mirror_state, Basis, InputKind, OccupationState, StateVector};
use crate::observables::{
    eof, evaluate_series, fidelity, reduced_density_two_qubit, FidelityTarget, ObservableSeries,
};
use crate::rng::{realization_rng, realization_seed};
use crate::stats::mean_std;

pub const DEFAULT_MAX_EXCITATIONS: usize = 2;
pub const DEFAULT_PERIODS: f64 = 4.0;
pub const DEFAULT_GRID_POINTS: usize = 801;
pub const DEFAULT_REALISATIONS: usize = 100;
pub const DEFAULT_J0: f64 = 1.0;

/// Input state of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    Canonical(InputKind),
    /// Superposition of basis states (normalized on construction).
    Custom(Vec<(OccupationState, Complex64)>),
}

impl InputSpec {
    pub fn kind(&self) -> Option<InputKind> {
        match self {
            InputSpec::Canonical(k) => Some(*k),
            InputSpec::Custom(_) => None,
        }
    }
}

impl fmt::Display for InputSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSpec::Canonical(k) => write!(f, "{k}"),
            InputSpec::Custom(terms) => {
                let parts: Vec<String> = terms.iter().map(|(s, a)| format!("({a})|{s}>")).collect();
                write!(f, "custom[{}]", parts.join(" + "))
            }
        }
    }
}

/// Uniform sampling window, in revival periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub periods: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { periods: DEFAULT_PERIODS, points: DEFAULT_GRID_POINTS }
    }
}

/// Which state the fidelity is measured against and which pair the EoF
/// is computed for. `None` picks the default pair of the input type.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObservableSpec {
    pub fidelity_target: FidelityTarget,
    pub eof_sites: Option<(usize, usize)>,
}

/// Everything needed to reproduce one ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub chain_length: usize,
    pub max_excitations: usize,
    pub input: InputSpec,
    pub profile: ProfileKind,
    pub j0: f64,
    /// Perturbation strengths; its `seed` is the master seed.
    pub perturbation: PerturbationSpec,
    pub grid: GridSpec,
    pub observable: ObservableSpec,
    pub realisations: usize,
}

impl ExperimentConfig {
    /// Unperturbed perfect-transfer chain with default grid and sampling.
    pub fn new(chain_length: usize, input: InputKind) -> Self {
        Self {
            chain_length,
            max_excitations: DEFAULT_MAX_EXCITATIONS,
            input: InputSpec::Canonical(input),
            profile: ProfileKind::PerfectTransfer,
            j0: DEFAULT_J0,
            perturbation: PerturbationSpec::default(),
            grid: GridSpec::default(),
            observable: ObservableSpec::default(),
            realisations: DEFAULT_REALISATIONS,
        }
    }

    pub fn with_perturbation(mut self, perturbation: PerturbationSpec) -> Self {
        self.perturbation = perturbation;
        self
    }

    pub fn with_realisations(mut self, realisations: usize) -> Self {
        self.realisations = realisations;
        self
    }

    pub fn master_seed(&self) -> u64 {
        self.perturbation.seed
    }

    /// EoF pair used when none is configured: the pair that receives the
    /// Bell state for TypeI/TypeII, the two chain ends otherwise.
    pub fn default_eof_sites(&self) -> (usize, usize) {
        let n = self.chain_length;
        match self.input {
            InputSpec::Canonical(InputKind::TypeI | InputKind::TypeII) => (n - 1, n),
            _ => (1, n),
        }
    }

    pub fn eof_sites(&self) -> (usize, usize) {
        self.observable.eof_sites.unwrap_or_else(|| self.default_eof_sites())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.chain_length;
        if !(2..=crate::hilbert::MAX_CHAIN_LENGTH).contains(&n) {
            return Err(config_err!("chain_length {n} outside 2..={}", crate::hilbert::MAX_CHAIN_LENGTH));
        }
        if self.max_excitations > n {
            return Err(config_err!("max_excitations {} exceeds chain_length {n}", self.max_excitations));
        }
        if let InputSpec::Canonical(kind) = self.input {
            if self.max_excitations < kind.required_excitations() {
                return Err(config_err!(
                    "input {kind} needs max_excitations >= {}",
                    kind.required_excitations()
                ));
            }
        }
        if !(self.j0.is_finite() && self.j0 > 0.0) {
            return Err(config_err!("j0 = {} must be finite and positive", self.j0));
        }
        if self.profile == ProfileKind::Custom {
            return Err(config_err!("profile must be perfect-transfer or uniform"));
        }
        self.perturbation.validate(n)?;
        if self.grid.points == 0 {
            return Err(config_err!("grid.points must be at least 1"));
        }
        if !(self.grid.periods.is_finite() && self.grid.periods > 0.0) {
            return Err(config_err!("grid.periods must be finite and positive"));
        }
        if self.observable.fidelity_target == FidelityTarget::Custom {
            return Err(config_err!("fidelity target must be initial or mirror"));
        }
        let (a, b) = self.eof_sites();
        if !(1 <= a && a < b && b <= n) {
            return Err(config_err!("eof_sites ({a}, {b}) invalid for chain_length {n}"));
        }
        if self.realisations == 0 {
            return Err(config_err!("realisations must be at least 1"));
        }
        Ok(())
    }

    fn coupling_profile(&self) -> Result<CouplingProfile> {
        match self.profile {
            ProfileKind::PerfectTransfer => CouplingProfile::perfect_transfer(self.chain_length, self.j0),
            ProfileKind::Uniform => CouplingProfile::uniform(self.chain_length, self.j0),
            ProfileKind::Custom => Err(config_err!("custom profiles are not configurable")),
        }
    }
}

/// Which characteristic time a probe samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeTime {
    /// Return of the input (`t_S`); TypeIII, whose end-to-end entanglement
    /// is created by the dynamics, is sampled at its first EoF peak `t_S/2`.
    FirstRevival,
    /// Arrival of the mirrored input (`t_S / 2`).
    FirstTransfer,
}

/// Scalar observable of a probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeObservable {
    Fidelity(FidelityTarget),
    Eof(usize, usize),
}

/// One scalar observable at one time, given as a fraction of `t_S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub observable: ProbeObservable,
    pub fraction: f64,
}

impl Probe {
    /// Figure-of-merit of each canonical input at the given time.
    pub fn for_input(kind: InputKind, n: usize, time: ProbeTime) -> Self {
        use ProbeObservable::*;
        let (observable, fraction) = match (kind, time) {
            (InputKind::TypeI, ProbeTime::FirstRevival) => (Fidelity(FidelityTarget::Initial), 1.0),
            (InputKind::TypeI, ProbeTime::FirstTransfer) => (Fidelity(FidelityTarget::Mirror), 0.5),
            (InputKind::TypeII, ProbeTime::FirstRevival) => (Eof(1, 2), 1.0),
            (InputKind::TypeII, ProbeTime::FirstTransfer) => (Eof(n - 1, n), 0.5),
            (InputKind::TypeIII, _) => (Eof(1, n), 0.5),
        };
        Self { observable, fraction }
    }

    /// Probe for a configuration: canonical inputs use [`Probe::for_input`],
    /// custom inputs the configured fidelity target.
    pub fn for_config(config: &ExperimentConfig, time: ProbeTime) -> Self {
        match config.input.kind() {
            Some(kind) => Self::for_input(kind, config.chain_length, time),
            None => {
                let (target, fraction) = match time {
                    ProbeTime::FirstRevival => (FidelityTarget::Initial, 1.0),
                    ProbeTime::FirstTransfer => (FidelityTarget::Mirror, 0.5),
                };
                Self { observable: ProbeObservable::Fidelity(target), fraction }
            }
        }
    }
}

/// An experiment with its basis, unperturbed Hamiltonian and states built.
#[derive(Debug)]
pub struct Experiment {
    config: ExperimentConfig,
    basis: Arc<Basis>,
    profile: CouplingProfile,
    base: HamiltonianMatrix,
    psi0: StateVector,
    mirrored: StateVector,
    t_s: f64,
    grid: TimeGrid,
    fixed_spectrum: OnceLock<Spectrum>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let basis = Arc::new(Basis::new(config.chain_length, config.max_excitations)?);
        let profile = config.coupling_profile()?;
        let t_s = system_time(&profile).map_err(|e| config_err!("{e}"))?;
        let base = build_base(basis.clone(), &profile)?;
        let psi0 = match &config.input {
            InputSpec::Canonical(kind) => make_input_state(basis.clone(), *kind)?,
            InputSpec::Custom(terms) => make_custom_state(basis.clone(), terms)?,
        };
        let mirrored = mirror_state(&basis, &psi0)?;
        let grid = TimeGrid::uniform(t_s, config.grid.periods, config.grid.points)?;
        Ok(Self {
            config,
            basis,
            profile,
            base,
            psi0,
            mirrored,
            t_s,
            grid,
            fixed_spectrum: OnceLock::new(),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn profile(&self) -> &CouplingProfile {
        &self.profile
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.psi0
    }

    pub fn mirrored_state(&self) -> &StateVector {
        &self.mirrored
    }

    /// Revival time of the unperturbed profile.
    pub fn t_s(&self) -> f64 {
        self.t_s
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn target(&self, kind: FidelityTarget) -> &StateVector {
        match kind {
            FidelityTarget::Mirror => &self.mirrored,
            _ => &self.psi0,
        }
    }

    /// Seed of realisation `index`.
    pub fn realization_seed(&self, index: usize) -> u64 {
        realization_seed(self.config.master_seed(), index as u64)
    }

    /// Perturbed Hamiltonian of realisation `index`.
    pub fn hamiltonian(&self, index: usize) -> Result<HamiltonianMatrix> {
        let mut rng = realization_rng(self.config.master_seed(), index as u64);
        self.base.clone().perturbed(&self.profile, &self.config.perturbation, &mut rng)
    }

    /// Spectrum of realisation `index`; computed once when no perturbation
    /// is random.
    pub fn spectrum(&self, index: usize) -> Result<Spectrum> {
        if self.config.perturbation.is_random() {
            return eigendecompose(&self.hamiltonian(index)?);
        }
        if let Some(s) = self.fixed_spectrum.get() {
            return Ok(s.clone());
        }
        let s = eigendecompose(&self.hamiltonian(0)?)?;
        Ok(self.fixed_spectrum.get_or_init(|| s).clone())
    }

    /// Full time series of realisation `index`.
    pub fn run_realization(&self, index: usize) -> Result<ObservableSeries> {
        let spectrum = self.spectrum(index)?;
        let traj = spectrum.sample_trajectory(&self.psi0, &self.grid)?;
        let kind = self.config.observable.fidelity_target;
        evaluate_series(&traj, &self.grid, self.target(kind), kind, self.config.eof_sites())
    }

    /// Value of `probe` in realisation `index`.
    pub fn probe(&self, index: usize, probe: &Probe) -> Result<f64> {
        let spectrum = self.spectrum(index)?;
        self.probe_spectrum(&spectrum, probe)
    }

    /// Value of `probe` for an already diagonalized Hamiltonian.
    pub fn probe_spectrum(&self, spectrum: &Spectrum, probe: &Probe) -> Result<f64> {
        let psi = spectrum.evolve(&self.psi0, probe.fraction * self.t_s)?;
        match probe.observable {
            ProbeObservable::Fidelity(kind) => fidelity(&psi, self.target(kind)),
            ProbeObservable::Eof(a, b) => Ok(eof(&reduced_density_two_qubit(&psi, a, b)?)),
        }
    }

    /// Probe values of every realisation, in index order.
    pub fn probe_all(&self, probe: &Probe) -> Result<Vec<f64>> {
        (0..self.config.realisations)
            .into_par_iter()
            .map(|r| self.probe(r, probe))
            .collect()
    }

    /// Pointwise mean and sample standard deviation over all realisations.
    pub fn run_ensemble(&self) -> Result<EnsembleSummary> {
        let runs: Vec<ObservableSeries> = (0..self.config.realisations)
            .into_par_iter()
            .map(|r| self.run_realization(r))
            .collect::<Result<_>>()?;
        Ok(EnsembleSummary::aggregate(self, &runs))
    }
}

/// Disorder-averaged time series.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub config: ExperimentConfig,
    pub grid: TimeGrid,
    pub mean_fidelity: Vec<f64>,
    pub std_fidelity: Vec<f64>,
    pub mean_eof: Vec<f64>,
    pub std_eof: Vec<f64>,
    /// Seed of each realisation, by index.
    pub seeds: Vec<u64>,
}

impl EnsembleSummary {
    fn aggregate(experiment: &Experiment, runs: &[ObservableSeries]) -> Self {
        let points = experiment.grid.len();
        let column = |pick: &dyn Fn(&ObservableSeries) -> &Vec<f64>| -> (Vec<f64>, Vec<f64>) {
            (0..points)
                .map(|i| {
                    let values: Vec<f64> = runs.iter().map(|s| pick(s)[i]).collect();
                    let (m, s) = mean_std(&values);
                    (m.clamp(0.0, 1.0), s)
                })
                .unzip()
        };
        let (mean_fidelity, std_fidelity) = column(&|s| &s.fidelity);
        let (mean_eof, std_eof) = column(&|s| &s.eof);
        Self {
            config: experiment.config.clone(),
            grid: experiment.grid.clone(),
            mean_fidelity,
            std_fidelity,
            mean_eof,
            std_eof,
            seeds: (0..runs.len()).map(|r| experiment.realization_seed(r)).collect(),
        }
    }
}

/// One realisation of a configuration.
pub fn run_realization(config: &ExperimentConfig, realization_index: usize) -> Result<ObservableSeries> {
    Experiment::new(config.clone())?.run_realization(realization_index)
}

/// Disorder average of a configuration.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<EnsembleSummary> {
    Experiment::new(config.clone())?.run_ensemble()
}

/// Ensemble statistics of a probe at one chain length.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub realisations: usize,
}

impl SweepPoint {
    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        self.std / (self.realisations as f64).sqrt()
    }
}

/// Run the probe ensemble of `base_config` at each chain length.
///
/// Per-length EoF pairs are re-derived from the probe; an explicitly
/// configured pair in `base_config` only affects time series, not sweeps.
pub fn sweep_chain_length(
    base_config: &ExperimentConfig,
    n_values: &[usize],
    probe_time: ProbeTime,
) -> Result<Vec<SweepPoint>> {
    if n_values.is_empty() {
        return Err(config_err!("sweep needs at least one chain length"));
    }
    if n_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(config_err!("sweep chain lengths must be strictly ascending"));
    }
    if let Some(bad) = n_values.iter().find(|&&n| n < 3) {
        return Err(config_err!("sweep chain length {bad} < 3"));
    }
    n_values
        .iter()
        .map(|&n| {
            let mut config = base_config.clone();
            config.chain_length = n;
            config.observable.eof_sites = None;
            if let crate::hamiltonian::SiteEnergies::PerSite(_) = config.perturbation.epsilon {
                return Err(config_err!("per-site epsilon cannot be swept over chain lengths"));
            }
            let experiment = Experiment::new(config)?;
            let probe = Probe::for_config(experiment.config(), probe_time);
            let values = experiment.probe_all(&probe)?;
            let (mean, std) = mean_std(&values);
            Ok(SweepPoint { n, mean, std, realisations: values.len() })
        })
        .collect()
}

/// Functional form of a trend fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrendModel {
    /// `y = A exp(-b x)`.
    ExponentialInN,
    /// `y = A exp(-(x / w)^2)`, reported with `rate = 1 / w^2`.
    GaussianInParameter,
}

impl fmt::Display for TrendModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrendModel::ExponentialInN => "exponential_in_n",
            TrendModel::GaussianInParameter => "gaussian_in_parameter",
        })
    }
}

/// Least-squares fit of `ln y` against `x` (or `x^2`).
#[derive(Debug, Clone, PartialEq)]
pub struct TrendFit {
    pub model: TrendModel,
    pub amplitude: f64,
    /// `b` for the exponential model, `1/w^2` for the Gaussian one.
    pub rate: f64,
    /// `y_i - model(x_i)` for every input point.
    pub residuals: Vec<f64>,
    /// Sum of squared residuals, in `y` space.
    pub rss: f64,
}

impl TrendFit {
    pub fn predict(&self, x: f64) -> f64 {
        match self.model {
            TrendModel::ExponentialInN => self.amplitude * (-self.rate * x).exp(),
            TrendModel::GaussianInParameter => self.amplitude * (-self.rate * x * x).exp(),
        }
    }

    /// Gaussian width `w`, when the fitted curvature is positive.
    pub fn width(&self) -> Option<f64> {
        (self.model == TrendModel::GaussianInParameter && self.rate > 0.0).then(|| self.rate.recip().sqrt())
    }
}

/// Fit `points` with `model` by linear least squares on `ln y`.
pub fn fit_trend(points: &[(f64, f64)], model: TrendModel) -> Result<TrendFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some((x, y)) = points.iter().find(|(x, y)| !x.is_finite() || !(*y > 0.0 && *y <= 1.0)) {
        return Err(Error::Fit(format!("point ({x}, {y}) outside x finite, 0 < y <= 1")));
    }
    let abscissa = |x: f64| match model {
        TrendModel::ExponentialInN => x,
        TrendModel::GaussianInParameter => x * x,
    };
    let xs: Vec<f64> = points.iter().map(|(x, _)| abscissa(*x)).collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| y.ln()).collect();
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let scale = xs.iter().map(|x| x.abs()).fold(1.0, f64::max);
    if sxx <= 1e-12 * scale * scale * n {
        return Err(Error::Fit("abscissae are degenerate; normal equations are singular".into()));
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let mut fit = TrendFit { model, amplitude: intercept.exp(), rate: -slope, residuals: Vec::new(), rss: 0.0 };
    fit.residuals = points.iter().map(|(x, y)| y - fit.predict(*x)).collect();
    fit.rss = fit.residuals.iter().map(|r| r * r).sum();
    if !(fit.amplitude.is_finite() && fit.rate.is_finite()) {
        return Err(Error::Fit("fitted parameters are not finite".into()));
    }
    Ok(fit)
}

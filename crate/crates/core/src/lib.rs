//! Quantum state transfer on engineered spin chains.
//!
//! The crate enumerates the excitation-truncated basis of an `N`-qubit chain,
//! builds the perfect-state-transfer XY Hamiltonian with optional fabrication
//! perturbations, evolves pure states exactly through a dense Hermitian
//! eigendecomposition and evaluates transfer fidelity and two-qubit
//! entanglement of formation. The [`ensemble`] module averages those
//! observables over seeded disorder realisations and sweeps the chain length.
//!
//! ```
//! use std::sync::Arc;
//! use spinchain_core::{
//!     build_base, eigendecompose, enumerate_basis, fidelity, make_input_state,
//!     mirror_state, pst_couplings, system_time, InputKind,
//! };
//!
//! let basis = Arc::new(enumerate_basis(8, 2).unwrap());
//! let profile = pst_couplings(8, 1.0).unwrap();
//! let spectrum = eigendecompose(&build_base(basis.clone(), &profile).unwrap()).unwrap();
//! let psi = make_input_state(basis.clone(), InputKind::TypeI).unwrap();
//! let t_s = system_time(&profile).unwrap();
//! let out = spectrum.evolve(&psi, t_s / 2.0).unwrap();
//! let target = mirror_state(&basis, &psi).unwrap();
//! assert!((fidelity(&out, &target).unwrap() - 1.0).abs() < 1e-9);
//! ```

pub mod ensemble;
pub mod error;
pub mod evolution;
pub mod hamiltonian;
pub mod hilbert;
pub mod observables;
pub mod rng;
pub mod stats;

pub use ensemble::{
    fit_trend, run_ensemble, run_realization, sweep_chain_length, EnsembleSummary, Experiment,
    ExperimentConfig, GridSpec, InputSpec, ObservableSpec, Probe, ProbeTime, SweepPoint,
    TrendFit, TrendModel,
};
pub use error::{Error, Result};
pub use evolution::{eigendecompose, sample_trajectory, system_time, Spectrum, TimeGrid};
pub use hamiltonian::{
    add_excitation_interaction, add_next_nearest, add_site_energies, apply_long_range,
    apply_offdiagonal_noise, build_base, pst_couplings, CouplingProfile, HamiltonianMatrix,
    PerturbationSpec, ProfileKind, SiteEnergies,
};
pub use hilbert::{
    enumerate_basis, make_custom_state, make_input_state, mirror_state, Basis, InputKind,
    OccupationState, StateVector,
};
pub use observables::{
    concurrence, eof, eof_from_concurrence, evaluate_series, fidelity, reduced_density_two_qubit,
    FidelityTarget, ObservableSeries, TwoQubitDensity,
};

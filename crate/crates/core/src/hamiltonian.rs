//! Perfect-state-transfer XY Hamiltonian and its perturbations.
//!
//! The base operator hops one excitation between neighbouring sites with
//! amplitude `J_{i,i+1}`. Five perturbation families can be layered on top,
//! always in the order site energies, excitation interaction, next-nearest
//! hopping, noise on non-zero entries, long-range couplings on zero entries.
//! The last two act on matrix elements, so the order decides which entries
//! count as zero.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{config_err, domain_err, Result};
use crate::hilbert::Basis;
use crate::rng::unit_draw;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Shape of the nearest-neighbour coupling profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// `J_{i,i+1} = J_0 sqrt(i (N - i))`.
    PerfectTransfer,
    /// `J_{i,i+1} = J_0` for every bond.
    Uniform,
    /// Arbitrary user-supplied couplings.
    Custom,
}

/// Nearest-neighbour couplings `J_{i,i+1}` of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProfile {
    kind: ProfileKind,
    j0: f64,
    couplings: Vec<f64>,
    j_max: f64,
}

/// Perfect-state-transfer profile for an `n`-site chain.
pub fn pst_couplings(n: usize, j0: f64) -> Result<CouplingProfile> {
    CouplingProfile::perfect_transfer(n, j0)
}

impl CouplingProfile {
    pub fn perfect_transfer(n: usize, j0: f64) -> Result<Self> {
        check_j0(n, j0)?;
        let couplings = (1..n).map(|i| j0 * ((i * (n - i)) as f64).sqrt()).collect();
        Ok(Self::from_parts(ProfileKind::PerfectTransfer, j0, couplings))
    }

    pub fn uniform(n: usize, j0: f64) -> Result<Self> {
        check_j0(n, j0)?;
        Ok(Self::from_parts(ProfileKind::Uniform, j0, vec![j0; n - 1]))
    }

    /// Arbitrary strictly positive couplings, `couplings[i-1] = J_{i,i+1}`.
    pub fn custom(j0: f64, couplings: Vec<f64>) -> Result<Self> {
        check_j0(couplings.len() + 1, j0)?;
        if let Some(bad) = couplings.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(config_err!("coupling {bad} is not strictly positive"));
        }
        Ok(Self::from_parts(ProfileKind::Custom, j0, couplings))
    }

    fn from_parts(kind: ProfileKind, j0: f64, couplings: Vec<f64>) -> Self {
        let j_max = couplings.iter().copied().fold(f64::MIN, f64::max);
        Self { kind, j0, couplings, j_max }
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    /// Characteristic coupling constant `J_0`.
    pub fn j0(&self) -> f64 {
        self.j0
    }

    /// Largest nearest-neighbour coupling.
    pub fn j_max(&self) -> f64 {
        self.j_max
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// `J_{i,i+1}` for 1-based bond `i`.
    pub fn coupling(&self, i: usize) -> f64 {
        self.couplings[i - 1]
    }

    pub fn chain_length(&self) -> usize {
        self.couplings.len() + 1
    }

    /// Next-nearest coupling `J_{i,i+2} = delta (J_{i,i+1} + J_{i+1,i+2}) / 2`.
    pub fn next_nearest(&self, i: usize, delta: f64) -> f64 {
        delta * (self.coupling(i) + self.coupling(i + 1)) / 2.0
    }
}

fn check_j0(n: usize, j0: f64) -> Result<()> {
    if n < 2 {
        return Err(config_err!("chain length {n} < 2"));
    }
    if !(j0.is_finite() && j0 > 0.0) {
        return Err(config_err!("j0 = {j0} must be finite and positive"));
    }
    Ok(())
}

/// Site energies `epsilon_i`, either one value for every site or one per site.
#[derive(Debug, Clone, PartialEq)]
pub enum SiteEnergies {
    Uniform(f64),
    PerSite(Vec<f64>),
}

impl Default for SiteEnergies {
    fn default() -> Self {
        SiteEnergies::Uniform(0.0)
    }
}

impl SiteEnergies {
    /// Expand to one energy per site.
    pub fn resolve(&self, n: usize) -> Result<Vec<f64>> {
        let values = match self {
            SiteEnergies::Uniform(e) => vec![*e; n],
            SiteEnergies::PerSite(v) if v.len() == n => v.clone(),
            SiteEnergies::PerSite(v) => {
                return Err(config_err!("epsilon has {} entries for a {n}-site chain", v.len()))
            }
        };
        if values.iter().any(|e| !e.is_finite()) {
            return Err(config_err!("epsilon entries must be finite"));
        }
        Ok(values)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SiteEnergies::Uniform(e) => *e == 0.0,
            SiteEnergies::PerSite(v) => v.iter().all(|e| *e == 0.0),
        }
    }
}

/// Strengths of every perturbation family plus the master seed of the random
/// ones.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    /// Scale of the noise added to non-zero entries, in units of `J_0`.
    pub eta: f64,
    pub epsilon: SiteEnergies,
    /// Neighbouring-excitation interaction, in units of `J_0`.
    pub gamma: f64,
    /// Relative next-nearest-neighbour hopping.
    pub delta: f64,
    /// Scale of the couplings added to zero entries, in units of `J_max`.
    pub chi: f64,
    /// Whether long-range couplings connect different excitation sectors.
    pub chi_cross_sector: bool,
    /// Whether zero diagonal entries also receive a long-range term.
    pub chi_diagonal: bool,
    pub seed: u64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            eta: 0.0,
            epsilon: SiteEnergies::default(),
            gamma: 0.0,
            delta: 0.0,
            chi: 0.0,
            chi_cross_sector: true,
            chi_diagonal: false,
            seed: 0,
        }
    }
}

impl PerturbationSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        for (name, v) in [("eta", self.eta), ("gamma", self.gamma), ("delta", self.delta), ("chi", self.chi)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(config_err!("{name} = {v} must be finite and non-negative"));
            }
        }
        self.epsilon.resolve(n)?;
        if self.delta != 0.0 && n < 3 {
            return Err(config_err!("next-nearest hopping needs chain_length >= 3"));
        }
        Ok(())
    }

    /// True when no perturbation is active.
    pub fn is_unperturbed(&self) -> bool {
        self.eta == 0.0
            && self.epsilon.is_zero()
            && self.gamma == 0.0
            && self.delta == 0.0
            && self.chi == 0.0
    }

    /// True when building a Hamiltonian consumes random numbers.
    pub fn is_random(&self) -> bool {
        self.eta != 0.0 || self.chi != 0.0
    }
}

/// Dense Hermitian matrix over a [`Basis`].
#[derive(Clone, PartialEq)]
pub struct HamiltonianMatrix {
    basis: Arc<Basis>,
    entries: DMatrix<Complex64>,
}

impl fmt::Debug for HamiltonianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianMatrix")
            .field("chain_length", &self.basis.chain_length())
            .field("max_excitations", &self.basis.max_excitations())
            .field("dim", &self.dim())
            .finish()
    }
}

/// Unperturbed nearest-neighbour hopping Hamiltonian.
pub fn build_base(basis: Arc<Basis>, profile: &CouplingProfile) -> Result<HamiltonianMatrix> {
    let n = basis.chain_length();
    if profile.chain_length() != n {
        return Err(config_err!(
            "coupling profile has {} bonds, chain of {n} sites needs {}",
            profile.couplings().len(),
            n - 1
        ));
    }
    let dim = basis.dim();
    let mut entries = DMatrix::from_element(dim, dim, ZERO);
    for (col, state) in basis.states().iter().enumerate() {
        for i in 1..n {
            if let Some(target) = state.hop(i, i + 1) {
                let row = basis.index_of(&target).expect("hopping preserves weight");
                entries[(row, col)] = Complex64::new(profile.coupling(i), 0.0);
            }
        }
    }
    Ok(HamiltonianMatrix { basis, entries })
}

impl HamiltonianMatrix {
    /// Wrap an arbitrary matrix; it must be square, match the basis and be
    /// Hermitian to `1e-12`.
    pub fn from_matrix(basis: Arc<Basis>, entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != basis.dim() || entries.ncols() != basis.dim() {
            return Err(config_err!(
                "matrix is {}x{}, basis dimension {}",
                entries.nrows(),
                entries.ncols(),
                basis.dim()
            ));
        }
        let h = Self { basis, entries };
        let dev = h.hermiticity_error();
        if dev > 1e-12 {
            return Err(crate::error::numerical_err!("matrix not Hermitian (deviation {dev:e})"));
        }
        Ok(h)
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    /// Largest `|H_lm - conj(H_ml)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for l in 0..d {
            for m in l..d {
                worst = worst.max((self.entries[(l, m)] - self.entries[(m, l)].conj()).norm());
            }
        }
        worst
    }

    /// True when every entry has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    /// Largest magnitude of an entry coupling different excitation sectors.
    pub fn cross_sector_magnitude(&self) -> f64 {
        let weights: Vec<usize> = self.basis.weights().collect();
        let mut worst = 0.0f64;
        for (col, wc) in weights.iter().enumerate() {
            for (row, wr) in weights.iter().enumerate() {
                if wr != wc {
                    worst = worst.max(self.entries[(row, col)].norm());
                }
            }
        }
        worst
    }

    /// Diagonal block of the sector with `weight` excitations.
    pub fn sector_block(&self, weight: usize) -> DMatrix<Complex64> {
        let r = self.basis.sector_range(weight);
        self.entries.view((r.start, r.start), (r.len(), r.len())).into_owned()
    }

    fn add_diagonal(&mut self, mut energy: impl FnMut(&crate::hilbert::OccupationState) -> f64) {
        for (i, state) in self.basis.states().iter().enumerate() {
            self.entries[(i, i)].re += energy(state);
        }
    }

    /// Add `sum_i epsilon_i n_i` to the diagonal.
    pub fn add_site_energies(mut self, epsilon: &[f64]) -> Result<Self> {
        let n = self.basis.chain_length();
        if epsilon.len() != n {
            return Err(config_err!("epsilon has {} entries for a {n}-site chain", epsilon.len()));
        }
        self.add_diagonal(|s| s.occupied_sites().map(|site| epsilon[site - 1]).sum());
        Ok(self)
    }

    /// Add `gamma J_0` per pair of occupied neighbouring sites.
    pub fn add_excitation_interaction(mut self, gamma: f64, j0: f64) -> Self {
        let n = self.basis.chain_length();
        self.add_diagonal(|s| {
            let pairs = (1..n).filter(|&i| s.is_occupied(i) && s.is_occupied(i + 1)).count();
            gamma * j0 * pairs as f64
        });
        self
    }

    /// Add hopping between sites `i` and `i+2` with amplitude
    /// `delta (J_{i,i+1} + J_{i+1,i+2}) / 2`.
    pub fn add_next_nearest(mut self, delta: f64, profile: &CouplingProfile) -> Result<Self> {
        let n = self.basis.chain_length();
        if n < 3 {
            return Err(config_err!("next-nearest hopping needs chain_length >= 3, got {n}"));
        }
        if profile.chain_length() != n {
            return Err(config_err!("coupling profile does not match chain length {n}"));
        }
        if delta == 0.0 {
            return Ok(self);
        }
        let basis = self.basis.clone();
        for (col, state) in basis.states().iter().enumerate() {
            for i in 1..n - 1 {
                if let Some(target) = state.hop(i, i + 2) {
                    let row = basis.index_of(&target).expect("hopping preserves weight");
                    self.entries[(row, col)].re += profile.next_nearest(i, delta);
                }
            }
        }
        Ok(self)
    }

    /// Add `eta d_lm J_0` to every non-zero entry, `d_lm` flat on `[0, 1)`
    /// and shared between `(l, m)` and `(m, l)`.
    pub fn apply_offdiagonal_noise<R: Rng + ?Sized>(mut self, eta: f64, j0: f64, rng: &mut R) -> Self {
        if eta == 0.0 {
            return self;
        }
        let d = self.dim();
        for l in 0..d {
            for m in l..d {
                if self.entries[(l, m)] != ZERO {
                    let shift = eta * unit_draw(rng) * j0;
                    self.entries[(l, m)].re += shift;
                    if l != m {
                        self.entries[(m, l)].re += shift;
                    }
                }
            }
        }
        self
    }

    /// Set every zero entry to `chi d_lm J_max`, `d_lm` flat on `[0, 1)` and
    /// shared between `(l, m)` and `(m, l)`.
    ///
    /// With `include_cross_sector` unset only entries inside one excitation
    /// sector are touched; the diagonal is touched only with
    /// `include_diagonal`.
    pub fn apply_long_range<R: Rng + ?Sized>(
        mut self,
        chi: f64,
        j_max: f64,
        rng: &mut R,
        include_cross_sector: bool,
        include_diagonal: bool,
    ) -> Self {
        if chi == 0.0 {
            return self;
        }
        let weights: Vec<usize> = self.basis.weights().collect();
        let d = self.dim();
        for l in 0..d {
            let first = if include_diagonal { l } else { l + 1 };
            for m in first..d {
                if !include_cross_sector && weights[l] != weights[m] {
                    continue;
                }
                if self.entries[(l, m)] == ZERO {
                    let value = Complex64::new(chi * unit_draw(rng) * j_max, 0.0);
                    self.entries[(l, m)] = value;
                    self.entries[(m, l)] = value;
                }
            }
        }
        self
    }

    /// Apply every perturbation in `spec`, in the fixed order
    /// epsilon, gamma, delta, eta, chi.
    pub fn perturbed<R: Rng + ?Sized>(
        self,
        profile: &CouplingProfile,
        spec: &PerturbationSpec,
        rng: &mut R,
    ) -> Result<Self> {
        let n = self.basis.chain_length();
        spec.validate(n)?;
        let mut h = self;
        if !spec.epsilon.is_zero() {
            h = h.add_site_energies(&spec.epsilon.resolve(n)?)?;
        }
        if spec.gamma != 0.0 {
            h = h.add_excitation_interaction(spec.gamma, profile.j0());
        }
        if spec.delta != 0.0 {
            h = h.add_next_nearest(spec.delta, profile)?;
        }
        h = h.apply_offdiagonal_noise(spec.eta, profile.j0(), rng);
        h = h.apply_long_range(
            spec.chi,
            profile.j_max(),
            rng,
            spec.chi_cross_sector,
            spec.chi_diagonal,
        );
        Ok(h)
    }

    /// `<psi|H|psi>`.
    pub fn expectation(&self, psi: &crate::hilbert::StateVector) -> Result<f64> {
        if psi.basis().as_ref() != self.basis.as_ref() {
            return Err(domain_err!("state and Hamiltonian live in different bases"));
        }
        let h_psi = &self.entries * psi.amplitudes();
        Ok(psi.amplitudes().dotc(&h_psi).re)
    }
}

/// Free-function form of [`HamiltonianMatrix::add_site_energies`].
pub fn add_site_energies(h: HamiltonianMatrix, epsilon: &[f64]) -> Result<HamiltonianMatrix> {
    h.add_site_energies(epsilon)
}

/// Free-function form of [`HamiltonianMatrix::add_excitation_interaction`].
pub fn add_excitation_interaction(h: HamiltonianMatrix, gamma: f64, j0: f64) -> HamiltonianMatrix {
    h.add_excitation_interaction(gamma, j0)
}

/// Free-function form of [`HamiltonianMatrix::add_next_nearest`].
pub fn add_next_nearest(
    h: HamiltonianMatrix,
    delta: f64,
    profile: &CouplingProfile,
) -> Result<HamiltonianMatrix> {
    h.add_next_nearest(delta, profile)
}

/// Free-function form of [`HamiltonianMatrix::apply_offdiagonal_noise`].
pub fn apply_offdiagonal_noise<R: Rng + ?Sized>(
    h: HamiltonianMatrix,
    eta: f64,
    j0: f64,
    rng: &mut R,
) -> HamiltonianMatrix {
    h.apply_offdiagonal_noise(eta, j0, rng)
}

/// Free-function form of [`HamiltonianMatrix::apply_long_range`].
pub fn apply_long_range<R: Rng + ?Sized>(
    h: HamiltonianMatrix,
    chi: f64,
    j_max: f64,
    rng: &mut R,
    include_cross_sector: bool,
    include_diagonal: bool,
) -> HamiltonianMatrix {
    h.apply_long_range(chi, j_max, rng, include_cross_sector, include_diagonal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{enumerate_basis, OccupationState};
    use crate::rng::realization_rng;

    fn basis(n: usize, k: usize) -> Arc<Basis> {
        Arc::new(enumerate_basis(n, k).unwrap())
    }

    fn pst(n: usize) -> (Arc<Basis>, CouplingProfile, HamiltonianMatrix) {
        let b = basis(n, 2);
        let p = pst_couplings(n, 1.0).unwrap();
        let h = build_base(b.clone(), &p).unwrap();
        (b, p, h)
    }

    fn idx(b: &Basis, s: &str) -> usize {
        b.index_of(&s.parse::<OccupationState>().unwrap()).unwrap()
    }

    /// Explicit `H N - N H` with `N` the excitation-number matrix.
    fn number_commutator_norm(h: &HamiltonianMatrix) -> f64 {
        let d = h.dim();
        let number = DMatrix::from_fn(d, d, |r, c| {
            if r == c {
                Complex64::new(h.basis().state(r).weight() as f64, 0.0)
            } else {
                ZERO
            }
        });
        let comm = h.entries() * &number - &number * h.entries();
        comm.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn pst_profile_values() {
        assert_eq!(pst_couplings(2, 1.0).unwrap().couplings(), &[1.0]);
        let p = pst_couplings(6, 1.0).unwrap();
        let expected = [5f64.sqrt(), 8f64.sqrt(), 3.0, 8f64.sqrt(), 5f64.sqrt()];
        for (a, b) in p.couplings().iter().zip(expected) {
            assert_eq!(*a, b);
        }
        assert_eq!(p.j_max(), 3.0);
        assert_eq!(pst_couplings(10, 1.0).unwrap().j_max(), 5.0);
        for n in 2..15 {
            let p = pst_couplings(n, 0.7).unwrap();
            for i in 1..n {
                assert_eq!(p.coupling(i), p.coupling(n - i));
                assert!(p.coupling(i) > 0.0);
            }
        }
    }

    #[test]
    fn profile_errors() {
        assert!(pst_couplings(1, 1.0).is_err());
        assert!(pst_couplings(4, 0.0).is_err());
        assert!(CouplingProfile::custom(1.0, vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn two_site_hop() {
        let b = basis(2, 1);
        let p = pst_couplings(2, 1.0).unwrap();
        let h = build_base(b.clone(), &p).unwrap();
        let (a, c) = (idx(&b, "10"), idx(&b, "01"));
        for r in 0..3 {
            for s in 0..3 {
                let expect = if (r, s) == (a, c) || (r, s) == (c, a) { 1.0 } else { 0.0 };
                assert_eq!(h.get(r, s), Complex64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn three_site_single_excitation_block() {
        let b = basis(3, 1);
        let p = CouplingProfile::custom(1.0, vec![0.3, 0.8]).unwrap();
        let h = build_base(b.clone(), &p).unwrap();
        let (s1, s2, s3) = (idx(&b, "100"), idx(&b, "010"), idx(&b, "001"));
        assert_eq!(h.get(s1, s2).re, 0.3);
        assert_eq!(h.get(s2, s3).re, 0.8);
        assert_eq!(h.get(s1, s3).re, 0.0);
        assert_eq!(h.get(s2, s2).re, 0.0);
    }

    #[test]
    fn base_mismatch() {
        let b = basis(4, 2);
        let p = pst_couplings(5, 1.0).unwrap();
        assert!(build_base(b, &p).is_err());
    }

    #[test]
    fn conserving_terms_commute_with_number() {
        for n in 3..=8 {
            for k in [2, n] {
                let b = basis(n, k);
                let p = pst_couplings(n, 1.0).unwrap();
                let eps: Vec<f64> = (0..n).map(|i| 0.1 * i as f64 - 0.2).collect();
                let h = build_base(b, &p)
                    .unwrap()
                    .add_site_energies(&eps)
                    .unwrap()
                    .add_excitation_interaction(0.3, 1.0)
                    .add_next_nearest(0.05, &p)
                    .unwrap();
                assert!(number_commutator_norm(&h) < 1e-13, "n={n} k={k}");
                assert!(h.hermiticity_error() < 1e-14);
                assert_eq!(h.cross_sector_magnitude(), 0.0);
            }
        }
    }

    #[test]
    fn site_energies() {
        let (b, _, h) = pst(6);
        let same = h.clone().add_site_energies(&[0.0; 6]).unwrap();
        assert_eq!(same, h);
        let eps = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let e = h.clone().add_site_energies(&eps).unwrap();
        let i = idx(&b, "110000");
        assert!((e.get(i, i).re - 0.3).abs() < 1e-15);
        assert_eq!(e.get(0, 0).re, 0.0);
        let j = idx(&b, "010000");
        let k = idx(&b, "100000");
        assert_eq!(e.get(j, k), h.get(j, k));
        assert!(h.add_site_energies(&[0.0; 5]).is_err());
    }

    #[test]
    fn excitation_interaction() {
        let b = basis(6, 3);
        let p = pst_couplings(6, 1.0).unwrap();
        let h = build_base(b.clone(), &p).unwrap().add_excitation_interaction(0.25, 2.0);
        let d = |s: &str| {
            let i = idx(&b, s);
            h.get(i, i).re
        };
        assert_eq!(d("110000"), 0.5);
        assert_eq!(d("101010"), 0.0);
        assert_eq!(d("111000"), 1.0);
        for s in b.states().iter().filter(|s| s.weight() == 1) {
            let i = b.index_of(s).unwrap();
            assert_eq!(h.get(i, i).re, 0.0);
        }
    }

    #[test]
    fn next_nearest() {
        let (b, p, h) = pst(6);
        assert_eq!(h.clone().add_next_nearest(0.0, &p).unwrap(), h);
        let nn = h.add_next_nearest(0.05, &p).unwrap();
        let expect = 0.05 * (5f64.sqrt() + 8f64.sqrt()) / 2.0;
        assert!((expect - 0.1266).abs() < 1e-4);
        assert!((nn.get(idx(&b, "100000"), idx(&b, "001000")).re - expect).abs() < 1e-15);
        assert!((nn.get(idx(&b, "110000"), idx(&b, "011000")).re - expect).abs() < 1e-15);

        let b3 = basis(3, 1);
        let p3 = pst_couplings(3, 1.0).unwrap();
        let h3 = build_base(b3.clone(), &p3).unwrap().add_next_nearest(0.2, &p3).unwrap();
        let v = h3.get(idx(&b3, "100"), idx(&b3, "001")).re;
        assert!((v - p3.next_nearest(1, 0.2)).abs() < 1e-15);

        let b2 = basis(2, 1);
        let p2 = pst_couplings(2, 1.0).unwrap();
        assert!(build_base(b2, &p2).unwrap().add_next_nearest(0.1, &p2).is_err());
    }

    #[test]
    fn offdiagonal_noise() {
        let (_, p, h) = pst(6);
        let mut rng = realization_rng(3, 0);
        assert_eq!(h.clone().apply_offdiagonal_noise(0.0, 1.0, &mut rng), h);

        let a = h.clone().apply_offdiagonal_noise(0.1, p.j0(), &mut realization_rng(3, 0));
        let b = h.clone().apply_offdiagonal_noise(0.1, p.j0(), &mut realization_rng(3, 0));
        assert_eq!(a, b);
        assert!(a.hermiticity_error() < 1e-14);
        let mut changed = 0;
        for (orig, new) in h.entries().iter().zip(a.entries().iter()) {
            if *orig == ZERO {
                assert_eq!(*new, ZERO);
            } else {
                let shift = new.re - orig.re;
                assert!((0.0..0.1).contains(&shift));
                changed += 1;
            }
        }
        assert!(changed > 0);
    }

    #[test]
    fn long_range() {
        let (_, p, h) = pst(6);
        let mut rng = realization_rng(9, 0);
        assert_eq!(h.clone().apply_long_range(0.0, p.j_max(), &mut rng, true, false), h);

        let a = h.clone().apply_long_range(0.03, p.j_max(), &mut realization_rng(9, 0), true, false);
        let b = h.clone().apply_long_range(0.03, p.j_max(), &mut realization_rng(9, 0), true, false);
        let c = h.clone().apply_long_range(0.03, p.j_max(), &mut realization_rng(9, 1), true, false);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.hermiticity_error() < 1e-14);
        let d = a.dim();
        for l in 0..d {
            assert_eq!(a.get(l, l), ZERO);
            for m in 0..d {
                if l != m {
                    assert_ne!(a.get(l, m), ZERO);
                    if h.get(l, m) == ZERO {
                        assert!(a.get(l, m).re < 0.03 * p.j_max());
                    } else {
                        assert_eq!(a.get(l, m), h.get(l, m));
                    }
                }
            }
        }
        assert!(a.cross_sector_magnitude() > 0.0);

        let same_sector =
            h.clone().apply_long_range(0.03, p.j_max(), &mut realization_rng(9, 0), false, false);
        assert_eq!(same_sector.cross_sector_magnitude(), 0.0);
        let diag = h.apply_long_range(0.03, p.j_max(), &mut realization_rng(9, 0), true, true);
        assert!((0..d).all(|l| diag.get(l, l) != ZERO));
    }

    #[test]
    fn perturbation_order_matters() {
        // With delta applied before eta, next-nearest entries are non-zero
        // and therefore receive noise; the long-range pass then skips them.
        let (b, p, h) = pst(5);
        let spec = PerturbationSpec { delta: 0.05, eta: 0.1, chi: 0.02, seed: 1, ..Default::default() };
        let pert = h.perturbed(&p, &spec, &mut realization_rng(1, 0)).unwrap();
        let (s1, s3) = (idx(&b, "10000"), idx(&b, "00100"));
        let v = pert.get(s1, s3).re;
        let base = p.next_nearest(1, 0.05);
        assert!(v >= base && v < base + 0.1);
        assert!(pert.hermiticity_error() < 1e-14);
    }

    #[test]
    fn from_matrix_checks() {
        let b = basis(2, 1);
        let mut m = DMatrix::from_element(3, 3, ZERO);
        m[(0, 1)] = Complex64::new(1.0, 0.5);
        assert!(HamiltonianMatrix::from_matrix(b.clone(), m.clone()).is_err());
        m[(1, 0)] = Complex64::new(1.0, -0.5);
        assert!(HamiltonianMatrix::from_matrix(b.clone(), m).is_ok());
        assert!(HamiltonianMatrix::from_matrix(b, DMatrix::from_element(2, 2, ZERO)).is_err());
    }
}

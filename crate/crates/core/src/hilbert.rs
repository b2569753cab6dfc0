//! Many-body basis of an `N`-site qubit chain, canonical input states and
//! spatial mirroring.
//!
//! Sites are numbered `1..=N`. An occupation state is stored as an integer
//! whose most significant of `N` bits is site 1, so that numeric order equals
//! lexicographic order of the bitstring `b_1 b_2 ... b_N`. The basis lists
//! states by excitation number first and lexicographically within a sector;
//! this ordering fixes which matrix element receives which random draw.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{config_err, domain_err, Error, Result};

/// Longest chain the basis enumeration accepts.
pub const MAX_CHAIN_LENGTH: usize = 20;

/// Occupation of every site of the chain, each `|0>` or `|1>`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationState {
    len: u8,
    bits: u32,
}

impl OccupationState {
    /// All sites empty.
    pub fn vacuum(len: usize) -> Self {
        Self { len: len as u8, bits: 0 }
    }

    /// State with the given 1-based sites occupied.
    pub fn from_sites(len: usize, sites: &[usize]) -> Result<Self> {
        if len == 0 || len > MAX_CHAIN_LENGTH {
            return Err(config_err!("chain length {len} outside 1..={MAX_CHAIN_LENGTH}"));
        }
        let mut state = Self::vacuum(len);
        for &site in sites {
            if site == 0 || site > len {
                return Err(domain_err!("site {site} outside 1..={len}"));
            }
            state.bits |= state.mask(site);
        }
        Ok(state)
    }

    /// Build from the raw bit pattern (site 1 in bit `len - 1`).
    pub fn from_bits(len: usize, bits: u32) -> Result<Self> {
        if len == 0 || len > MAX_CHAIN_LENGTH {
            return Err(config_err!("chain length {len} outside 1..={MAX_CHAIN_LENGTH}"));
        }
        if len < 32 && bits >> len != 0 {
            return Err(domain_err!("bit pattern {bits:#b} longer than {len} sites"));
        }
        Ok(Self { len: len as u8, bits })
    }

    #[inline]
    fn mask(&self, site: usize) -> u32 {
        1 << (self.len as usize - site)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Raw bit pattern; equals the index of this state in the full `2^N`
    /// product basis ordered lexicographically.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Whether 1-based `site` holds an excitation.
    #[inline]
    pub fn is_occupied(&self, site: usize) -> bool {
        self.bits & self.mask(site) != 0
    }

    /// Number of excitations (Hamming weight).
    #[inline]
    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Site-reversed state `(b_N, ..., b_1)`.
    pub fn mirrored(&self) -> Self {
        let shift = 32 - self.len as u32;
        Self { len: self.len, bits: self.bits.reverse_bits() >> shift }
    }

    /// Move the excitation between sites `from` and `to` if exactly one of
    /// them is occupied.
    pub fn hop(&self, from: usize, to: usize) -> Option<Self> {
        if self.is_occupied(from) != self.is_occupied(to) {
            Some(Self { len: self.len, bits: self.bits ^ self.mask(from) ^ self.mask(to) })
        } else {
            None
        }
    }

    /// 1-based indices of the occupied sites, ascending.
    pub fn occupied_sites(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.len()).filter(move |&s| self.is_occupied(s))
    }

    /// Occupations as a list of 0/1 in site order.
    pub fn to_vec(&self) -> Vec<u8> {
        (1..=self.len()).map(|s| self.is_occupied(s) as u8).collect()
    }
}

impl fmt::Display for OccupationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for site in 1..=self.len() {
            f.write_str(if self.is_occupied(site) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for OccupationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{self}>")
    }
}

impl FromStr for OccupationState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('|').trim_end_matches('>');
        let len = s.len();
        if len == 0 || len > MAX_CHAIN_LENGTH {
            return Err(domain_err!("occupation string {s:?} must have 1..={MAX_CHAIN_LENGTH} sites"));
        }
        let mut bits = 0u32;
        for c in s.chars() {
            bits <<= 1;
            match c {
                '0' => {}
                '1' => bits |= 1,
                _ => return Err(domain_err!("occupation string {s:?} contains {c:?}")),
            }
        }
        Ok(Self { len: len as u8, bits })
    }
}

/// Basis of all occupation states with at most `max_excitations`
/// excitations, ordered by (weight, lexicographic).
#[derive(Debug, Clone)]
pub struct Basis {
    chain_length: usize,
    max_excitations: usize,
    states: Vec<OccupationState>,
    index_of: HashMap<u32, usize>,
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        self.chain_length == other.chain_length && self.max_excitations == other.max_excitations
    }
}

impl Eq for Basis {}

/// Enumerate the truncated basis of an `n`-site chain.
pub fn enumerate_basis(n: usize, max_excitations: usize) -> Result<Basis> {
    Basis::new(n, max_excitations)
}

impl Basis {
    pub fn new(chain_length: usize, max_excitations: usize) -> Result<Self> {
        if !(2..=MAX_CHAIN_LENGTH).contains(&chain_length) {
            return Err(config_err!("chain_length {chain_length} outside 2..={MAX_CHAIN_LENGTH}"));
        }
        if max_excitations > chain_length {
            return Err(config_err!(
                "max_excitations {max_excitations} exceeds chain_length {chain_length}"
            ));
        }
        let mut states = Vec::new();
        for weight in 0..=max_excitations {
            push_sector(chain_length, weight, &mut states);
        }
        let index_of = states.iter().enumerate().map(|(i, s)| (s.bits, i)).collect();
        Ok(Self { chain_length, max_excitations, states, index_of })
    }

    /// Full `2^N` basis (every sector).
    pub fn full(chain_length: usize) -> Result<Self> {
        Self::new(chain_length, chain_length)
    }

    pub fn chain_length(&self) -> usize {
        self.chain_length
    }

    pub fn max_excitations(&self) -> usize {
        self.max_excitations
    }

    pub fn states(&self) -> &[OccupationState] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, index: usize) -> OccupationState {
        self.states[index]
    }

    pub fn index_of(&self, state: &OccupationState) -> Option<usize> {
        if state.len() != self.chain_length {
            return None;
        }
        self.index_of.get(&state.bits).copied()
    }

    /// Index range of the sector with exactly `weight` excitations.
    pub fn sector_range(&self, weight: usize) -> std::ops::Range<usize> {
        let start = self.states.partition_point(|s| s.weight() < weight);
        let end = self.states.partition_point(|s| s.weight() <= weight);
        start..end
    }

    /// Excitation number of every basis state, in basis order.
    pub fn weights(&self) -> impl Iterator<Item = usize> + '_ {
        self.states.iter().map(|s| s.weight())
    }
}

/// Append all `weight`-excitation states of an `n`-site chain in ascending
/// numeric (= lexicographic) order using Gosper's hack.
fn push_sector(n: usize, weight: usize, out: &mut Vec<OccupationState>) {
    let len = n as u8;
    if weight == 0 {
        out.push(OccupationState { len, bits: 0 });
        return;
    }
    let limit: u64 = 1 << n;
    let mut v: u64 = (1 << weight) - 1;
    while v < limit {
        out.push(OccupationState { len, bits: v as u32 });
        let c = v & v.wrapping_neg();
        let r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
    }
}

/// The three canonical chain inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputKind {
    /// Unentangled two-excitation product state `|110...0>`.
    TypeI,
    /// Bell pair on sites 1 and 2, `(|10...0> + |010...0>)/sqrt2`.
    TypeII,
    /// `|+>` on both end sites, `(|0...0> + |10...0> + |0...01> + |10...01>)/2`;
    /// the dynamics entangles the two ends.
    TypeIII,
}

impl InputKind {
    pub const ALL: [InputKind; 3] = [InputKind::TypeI, InputKind::TypeII, InputKind::TypeIII];

    /// Smallest sector truncation that can represent this input.
    pub fn required_excitations(self) -> usize {
        match self {
            InputKind::TypeII => 1,
            InputKind::TypeI | InputKind::TypeIII => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InputKind::TypeI => "TypeI",
            InputKind::TypeII => "TypeII",
            InputKind::TypeIII => "TypeIII",
        }
    }
}

impl fmt::Display for InputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InputKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', '-', ' '], "").as_str() {
            "typei" | "i" | "1" => Ok(InputKind::TypeI),
            "typeii" | "ii" | "2" => Ok(InputKind::TypeII),
            "typeiii" | "iii" | "3" => Ok(InputKind::TypeIII),
            _ => Err(config_err!("unknown input kind {s:?} (expected TypeI, TypeII or TypeIII)")),
        }
    }
}

/// Normalized pure state over a shared [`Basis`].
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<Basis>,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Wrap raw amplitudes, normalizing them.
    pub fn from_amplitudes(basis: Arc<Basis>, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(domain_err!(
                "{} amplitudes for a basis of dimension {}",
                amplitudes.len(),
                basis.dim()
            ));
        }
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(domain_err!("state has zero or non-finite norm"));
        }
        Ok(Self { basis, amplitudes: amplitudes.unscale(norm) })
    }

    /// Wrap amplitudes already known to be normalized (evolution output).
    pub(crate) fn from_normalized(basis: Arc<Basis>, amplitudes: DVector<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), basis.dim());
        Self { basis, amplitudes }
    }

    /// Single basis state with unit amplitude.
    pub fn basis_state(basis: Arc<Basis>, state: &OccupationState) -> Result<Self> {
        make_custom_state(basis, &[(*state, Complex64::new(1.0, 0.0))])
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude(&self, state: &OccupationState) -> Option<Complex64> {
        self.basis.index_of(state).map(|i| self.amplitudes[i])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.ensure_same_basis(other)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub(crate) fn ensure_same_basis(&self, other: &StateVector) -> Result<()> {
        if *self.basis != *other.basis {
            return Err(domain_err!(
                "states live in different bases (N={}, k<={} vs N={}, k<={})",
                self.basis.chain_length(),
                self.basis.max_excitations(),
                other.basis.chain_length(),
                other.basis.max_excitations()
            ));
        }
        Ok(())
    }

    /// Multiply by a global phase `e^{i theta}`.
    pub fn with_phase(&self, theta: f64) -> Self {
        let phase = Complex64::from_polar(1.0, theta);
        Self { basis: self.basis.clone(), amplitudes: self.amplitudes.map(|a| a * phase) }
    }

    /// Expand into the full `2^N` product space; entry `b` holds the
    /// amplitude of the bit pattern `b`.
    pub fn to_full_space(&self) -> Vec<Complex64> {
        let mut full = vec![Complex64::new(0.0, 0.0); 1 << self.basis.chain_length()];
        for (state, amp) in self.basis.states().iter().zip(self.amplitudes.iter()) {
            full[state.bits() as usize] = *amp;
        }
        full
    }
}

/// One of the three canonical inputs over `basis`.
pub fn make_input_state(basis: Arc<Basis>, kind: InputKind) -> Result<StateVector> {
    let n = basis.chain_length();
    if basis.max_excitations() < kind.required_excitations() {
        return Err(config_err!(
            "{kind} input needs max_excitations >= {}, basis has {}",
            kind.required_excitations(),
            basis.max_excitations()
        ));
    }
    let one = Complex64::new(1.0, 0.0);
    let terms: Vec<(OccupationState, Complex64)> = match kind {
        InputKind::TypeI => vec![(OccupationState::from_sites(n, &[1, 2])?, one)],
        InputKind::TypeII => vec![
            (OccupationState::from_sites(n, &[1])?, one),
            (OccupationState::from_sites(n, &[2])?, one),
        ],
        InputKind::TypeIII => vec![
            (OccupationState::vacuum(n), one),
            (OccupationState::from_sites(n, &[1])?, one),
            (OccupationState::from_sites(n, &[n])?, one),
            (OccupationState::from_sites(n, &[1, n])?, one),
        ],
    };
    make_custom_state(basis, &terms)
}

/// Normalized superposition of the given basis states. Repeated states add.
pub fn make_custom_state(
    basis: Arc<Basis>,
    terms: &[(OccupationState, Complex64)],
) -> Result<StateVector> {
    let mut amplitudes = DVector::zeros(basis.dim());
    for (state, amp) in terms {
        let index = basis.index_of(state).ok_or_else(|| {
            domain_err!(
                "state {state} (weight {}) not in basis N={} with max_excitations={}",
                state.weight(),
                basis.chain_length(),
                basis.max_excitations()
            )
        })?;
        amplitudes[index] += *amp;
    }
    if amplitudes.iter().all(|a: &Complex64| a.norm_sqr() == 0.0) {
        return Err(domain_err!("all amplitudes are zero"));
    }
    StateVector::from_amplitudes(basis, amplitudes)
}

/// Spatially mirrored state: the amplitude of `(b_1..b_N)` becomes that of
/// `(b_N..b_1)`.
pub fn mirror_state(basis: &Basis, psi: &StateVector) -> Result<StateVector> {
    if basis != psi.basis().as_ref() {
        return Err(domain_err!("state does not belong to the given basis"));
    }
    let mut out = DVector::zeros(psi.dim());
    for (i, state) in basis.states().iter().enumerate() {
        // mirroring preserves weight, so the image is always in the basis
        let j = basis.index_of(&state.mirrored()).expect("mirror image in basis");
        out[j] = psi.amplitudes()[i];
    }
    Ok(StateVector::from_normalized(psi.basis().clone(), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn vacuum_only_basis() {
        let b = enumerate_basis(6, 0).unwrap();
        assert_eq!(b.dim(), 1);
        assert_eq!(b.state(0).to_string(), "000000");
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(enumerate_basis(6, 2).unwrap().dim(), 22);
        assert_eq!(enumerate_basis(15, 2).unwrap().dim(), 121);
        assert_eq!(enumerate_basis(10, 10).unwrap().dim(), 1024);
    }

    #[test]
    fn basis_rejects_bad_sizes() {
        assert!(matches!(enumerate_basis(1, 0), Err(Error::Config(_))));
        assert!(matches!(enumerate_basis(21, 2), Err(Error::Config(_))));
        assert!(matches!(enumerate_basis(4, 5), Err(Error::Config(_))));
    }

    #[test]
    fn ordering_is_weight_then_lexicographic() {
        let b = enumerate_basis(3, 3).unwrap();
        let names: Vec<String> = b.states().iter().map(|s| s.to_string()).collect();
        assert_eq!(names, ["000", "001", "010", "100", "011", "101", "110", "111"]);
    }

    #[test]
    fn basis_matches_filtered_bitstrings() {
        for n in 2..=12 {
            for k in 0..=n {
                let b = enumerate_basis(n, k).unwrap();
                let mut expected: Vec<(u32, u32)> = (0u32..1 << n)
                    .filter(|v| v.count_ones() as usize <= k)
                    .map(|v| (v.count_ones(), v))
                    .collect();
                expected.sort();
                let got: Vec<(u32, u32)> =
                    b.states().iter().map(|s| (s.weight() as u32, s.bits())).collect();
                assert_eq!(got, expected, "n={n} k={k}");
                assert_eq!(b.dim(), (0..=k).map(|j| binomial(n, j)).sum::<usize>());
                for (j, s) in b.states().iter().enumerate() {
                    assert_eq!(b.index_of(s), Some(j));
                }
            }
        }
    }

    #[test]
    fn sector_ranges() {
        let b = enumerate_basis(5, 2).unwrap();
        assert_eq!(b.sector_range(0), 0..1);
        assert_eq!(b.sector_range(1), 1..6);
        assert_eq!(b.sector_range(2), 6..16);
        assert_eq!(b.sector_range(3), 16..16);
    }

    #[test]
    fn occupation_parsing_and_sites() {
        let s: OccupationState = "110000".parse().unwrap();
        assert!(s.is_occupied(1) && s.is_occupied(2) && !s.is_occupied(3));
        assert_eq!(s, OccupationState::from_sites(6, &[2, 1]).unwrap());
        assert_eq!(s.mirrored().to_string(), "000011");
        assert_eq!(s.to_vec(), vec![1, 1, 0, 0, 0, 0]);
        assert!("1102".parse::<OccupationState>().is_err());
        assert!(OccupationState::from_sites(4, &[5]).is_err());
    }

    #[test]
    fn canonical_inputs() {
        let b = Arc::new(enumerate_basis(6, 2).unwrap());
        let st = |s: &str| s.parse::<OccupationState>().unwrap();
        let amp = |psi: &StateVector, s: &str| psi.amplitude(&st(s)).unwrap();

        let i = make_input_state(b.clone(), InputKind::TypeI).unwrap();
        assert_eq!(amp(&i, "110000"), Complex64::new(1.0, 0.0));
        assert_eq!(i.amplitudes().iter().filter(|a| a.norm() > 0.0).count(), 1);

        let ii = make_input_state(b.clone(), InputKind::TypeII).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((amp(&ii, "100000").re - r).abs() < 1e-15);
        assert!((amp(&ii, "010000").re - r).abs() < 1e-15);
        assert_eq!(ii.amplitudes().iter().filter(|a| a.norm() > 0.0).count(), 2);

        let iii = make_input_state(b.clone(), InputKind::TypeIII).unwrap();
        for s in ["000000", "100000", "000001", "100001"] {
            assert!((amp(&iii, s).re - 0.5).abs() < 1e-15);
        }
        for psi in [&i, &ii, &iii] {
            assert!((psi.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn canonical_inputs_need_sectors() {
        let b1 = Arc::new(enumerate_basis(6, 1).unwrap());
        assert!(make_input_state(b1.clone(), InputKind::TypeII).is_ok());
        assert!(matches!(make_input_state(b1.clone(), InputKind::TypeI), Err(Error::Config(_))));
        assert!(matches!(make_input_state(b1, InputKind::TypeIII), Err(Error::Config(_))));
    }

    #[test]
    fn custom_states() {
        let b = Arc::new(enumerate_basis(4, 2).unwrap());
        let one = Complex64::new(1.0, 0.0);
        let psi = make_custom_state(b.clone(), &[("1000".parse().unwrap(), one)]).unwrap();
        assert_eq!(psi.amplitude(&"1000".parse().unwrap()), Some(one));

        let psi = make_custom_state(
            b.clone(),
            &[("1000".parse().unwrap(), 3.0 * one), ("0100".parse().unwrap(), 4.0 * one)],
        )
        .unwrap();
        assert!((psi.amplitude(&"1000".parse().unwrap()).unwrap().re - 0.6).abs() < 1e-15);
        assert!((psi.amplitude(&"0100".parse().unwrap()).unwrap().re - 0.8).abs() < 1e-15);

        let b1 = Arc::new(enumerate_basis(4, 1).unwrap());
        assert!(matches!(
            make_custom_state(b1, &[("1100".parse().unwrap(), one)]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            make_custom_state(b, &[("1000".parse().unwrap(), Complex64::new(0.0, 0.0))]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn mirror_examples() {
        let b = Arc::new(enumerate_basis(6, 2).unwrap());
        let i = make_input_state(b.clone(), InputKind::TypeI).unwrap();
        let m = mirror_state(&b, &i).unwrap();
        assert_eq!(m.amplitude(&"000011".parse().unwrap()), Some(Complex64::new(1.0, 0.0)));

        let iii = make_input_state(b.clone(), InputKind::TypeIII).unwrap();
        let m = mirror_state(&b, &iii).unwrap();
        assert_eq!(m.amplitudes(), iii.amplitudes());

        let other = Arc::new(enumerate_basis(6, 1).unwrap());
        assert!(mirror_state(&other, &i).is_err());
    }

    proptest! {
        #[test]
        fn mirror_is_isometric_involution(
            n in 2usize..9,
            seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..200),
        ) {
            let b = Arc::new(enumerate_basis(n, 2.min(n)).unwrap());
            let amps = DVector::from_iterator(
                b.dim(),
                (0..b.dim()).map(|i| {
                    let (re, im) = seed[i % seed.len()];
                    Complex64::new(re + 1e-3 * i as f64, im)
                }),
            );
            let psi = StateVector::from_amplitudes(b.clone(), amps).unwrap();
            let once = mirror_state(&b, &psi).unwrap();
            let twice = mirror_state(&b, &once).unwrap();
            prop_assert!((once.norm() - psi.norm()).abs() < 1e-14);
            prop_assert_eq!(twice.amplitudes(), psi.amplitudes());
        }
    }
}

//! Transfer fidelity and two-qubit entanglement of formation.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{domain_err, numerical_err, Result};
use crate::evolution::TimeGrid;
use crate::hilbert::StateVector;

/// Tolerance of the density-matrix invariants (Hermiticity, trace,
/// positivity).
pub const DENSITY_TOLERANCE: f64 = 1e-12;

/// Minimum height of a local maximum counted by [`peak_indices`].
pub const PEAK_THRESHOLD: f64 = 0.05;

/// `|<psi_fin|psi_t>|^2`, clamped to `[0, 1]`.
pub fn fidelity(psi_t: &StateVector, psi_fin: &StateVector) -> Result<f64> {
    let overlap = psi_fin.inner(psi_t)?;
    Ok(overlap.norm_sqr().clamp(0.0, 1.0))
}

/// Reduced state of two sites over `{|00>, |01>, |10>, |11>}`, the first
/// label being the lower site.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitDensity {
    sites: (usize, usize),
    rho: Matrix4<Complex64>,
}

impl TwoQubitDensity {
    /// Validate Hermiticity, unit trace and positivity.
    pub fn new(sites: (usize, usize), rho: Matrix4<Complex64>) -> Result<Self> {
        let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > DENSITY_TOLERANCE {
            return Err(numerical_err!("density matrix not Hermitian (deviation {herm:e})"));
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > DENSITY_TOLERANCE || trace.im.abs() > DENSITY_TOLERANCE {
            return Err(numerical_err!("density matrix trace {trace} != 1"));
        }
        let lowest = SymmetricEigen::new(rho).eigenvalues.min();
        if lowest < -DENSITY_TOLERANCE {
            return Err(numerical_err!("density matrix has negative eigenvalue {lowest:e}"));
        }
        Ok(Self { sites, rho })
    }

    /// Density matrix of a pure two-qubit state (normalized here).
    pub fn pure(sites: (usize, usize), amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(domain_err!("zero two-qubit state"));
        }
        let v = nalgebra::Vector4::from_iterator(amplitudes.iter().map(|a| a / norm));
        Self::new(sites, v * v.adjoint())
    }

    pub fn sites(&self) -> (usize, usize) {
        self.sites
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.rho
    }
}

/// Partial trace of `|psi><psi|` over every site except `site_a < site_b`.
pub fn reduced_density_two_qubit(
    psi: &StateVector,
    site_a: usize,
    site_b: usize,
) -> Result<TwoQubitDensity> {
    let n = psi.basis().chain_length();
    if !(1 <= site_a && site_a < site_b && site_b <= n) {
        return Err(domain_err!("sites ({site_a}, {site_b}) invalid for a {n}-site chain"));
    }
    // Group amplitudes by the configuration of the traced-out sites; each
    // group is an unnormalized pure state of the pair.
    let keep = (1u32 << (n - site_a)) | (1u32 << (n - site_b));
    let mut groups: BTreeMap<u32, [Complex64; 4]> = BTreeMap::new();
    for (state, amp) in psi.basis().states().iter().zip(psi.amplitudes().iter()) {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let pair = 2 * state.is_occupied(site_a) as usize + state.is_occupied(site_b) as usize;
        groups.entry(state.bits() & !keep).or_default()[pair] += *amp;
    }
    let mut rho = Matrix4::<Complex64>::zeros();
    for v in groups.values() {
        for r in 0..4 {
            for c in 0..4 {
                rho[(r, c)] += v[r] * v[c].conj();
            }
        }
    }
    TwoQubitDensity::new((site_a, site_b), rho)
}

/// `sigma_y (x) sigma_y` in the pair basis.
fn spin_flip() -> Matrix4<Complex64> {
    let mut y = Matrix4::<Complex64>::zeros();
    y[(0, 3)] = Complex64::new(-1.0, 0.0);
    y[(1, 2)] = Complex64::new(1.0, 0.0);
    y[(2, 1)] = Complex64::new(1.0, 0.0);
    y[(3, 0)] = Complex64::new(-1.0, 0.0);
    y
}

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)`.
///
/// The `l_i` are square roots of the eigenvalues of `rho rho~`, with
/// `rho~ = (sy x sy) rho* (sy x sy)`. Writing `rho = A A^dagger`, they equal
/// the singular values of `A^dagger (sy x sy) A*`, which stay accurate when
/// `rho` is rank deficient (square roots of rounding-level eigenvalues do
/// not).
pub fn concurrence(rho: &TwoQubitDensity) -> f64 {
    let eig = SymmetricEigen::new(*rho.matrix());
    let mut factor = eig.eigenvectors;
    for (k, mut col) in factor.column_iter_mut().enumerate() {
        col.scale_mut(eig.eigenvalues[k].max(0.0).sqrt());
    }
    let b = factor.adjoint() * spin_flip() * factor.conjugate();
    let mut lambdas: Vec<f64> = b.singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0)
}

/// Binary entropy in bits, `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Entanglement of formation for concurrence `c`.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy((1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0).clamp(0.0, 1.0)
}

/// Entanglement of formation of a two-qubit state.
pub fn eof(rho: &TwoQubitDensity) -> f64 {
    eof_from_concurrence(concurrence(rho))
}

/// What the fidelity column of a series is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FidelityTarget {
    /// The input state itself (revivals).
    #[default]
    Initial,
    /// The spatial mirror of the input (transfer).
    Mirror,
    /// A user-supplied state.
    Custom,
}

impl fmt::Display for FidelityTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FidelityTarget::Initial => "initial",
            FidelityTarget::Mirror => "mirror",
            FidelityTarget::Custom => "custom",
        })
    }
}

/// Fidelity and EoF sampled along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub grid: TimeGrid,
    pub fidelity: Vec<f64>,
    pub eof: Vec<f64>,
    pub eof_sites: (usize, usize),
    pub target: FidelityTarget,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Largest fidelity over grid points with `lo <= t/t_S <= hi`.
    pub fn max_fidelity_between(&self, lo: f64, hi: f64) -> Option<f64> {
        window_max(&self.grid, &self.fidelity, lo, hi)
    }

    /// Largest EoF over grid points with `lo <= t/t_S <= hi`.
    pub fn max_eof_between(&self, lo: f64, hi: f64) -> Option<f64> {
        window_max(&self.grid, &self.eof, lo, hi)
    }

    /// Rescaled times `t/t_S` of the EoF peaks.
    pub fn eof_peak_times(&self) -> Vec<f64> {
        let scaled: Vec<f64> = self.grid.rescaled().collect();
        peak_indices(&self.eof, PEAK_THRESHOLD).into_iter().map(|i| scaled[i]).collect()
    }
}

fn window_max(grid: &TimeGrid, values: &[f64], lo: f64, hi: f64) -> Option<f64> {
    grid.rescaled()
        .zip(values)
        .filter(|(x, _)| *x >= lo && *x <= hi)
        .map(|(_, v)| *v)
        .reduce(f64::max)
}

/// Indices of strict interior local maxima with value above `threshold`.
/// Plateaus count once, at their first point.
pub fn peak_indices(values: &[f64], threshold: f64) -> Vec<usize> {
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < values.len() {
        if values[i] > values[i - 1] && values[i] > threshold {
            let mut j = i;
            while j + 1 < values.len() && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < values.len() && values[j + 1] < values[i] {
                peaks.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Pointwise fidelity against `target` and EoF of `eof_sites` along `traj`.
pub fn evaluate_series(
    traj: &[StateVector],
    grid: &TimeGrid,
    target: &StateVector,
    target_kind: FidelityTarget,
    eof_sites: (usize, usize),
) -> Result<ObservableSeries> {
    if traj.len() != grid.len() {
        return Err(domain_err!("{} states for a grid of {} points", traj.len(), grid.len()));
    }
    let mut fid = Vec::with_capacity(traj.len());
    let mut ent = Vec::with_capacity(traj.len());
    for psi in traj {
        fid.push(fidelity(psi, target)?);
        ent.push(eof(&reduced_density_two_qubit(psi, eof_sites.0, eof_sites.1)?));
    }
    Ok(ObservableSeries {
        grid: grid.clone(),
        fidelity: fid,
        eof: ent,
        eof_sites,
        target: target_kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{enumerate_basis, make_input_state, InputKind};
    use std::sync::Arc;

    const R2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn fidelity_examples() {
        let b = Arc::new(enumerate_basis(3, 1).unwrap());
        let a = StateVector::basis_state(b.clone(), &"100".parse().unwrap()).unwrap();
        let m = StateVector::basis_state(b.clone(), &"010".parse().unwrap()).unwrap();
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        assert_eq!(fidelity(&a, &m).unwrap(), 0.0);
        let psi = make_input_state(b, InputKind::TypeII).unwrap();
        for theta in [0.3, 1.7, -2.9] {
            assert!((fidelity(&psi, &psi.with_phase(theta)).unwrap() - 1.0).abs() < 1e-15);
            assert!((fidelity(&psi.with_phase(theta), &a).unwrap() - 0.5).abs() < 1e-15);
        }
        let other = Arc::new(enumerate_basis(3, 2).unwrap());
        let foreign = StateVector::basis_state(other, &"100".parse().unwrap()).unwrap();
        assert!(fidelity(&a, &foreign).is_err());
    }

    #[test]
    fn reduced_states_of_inputs() {
        let b = Arc::new(enumerate_basis(6, 2).unwrap());
        let ii = make_input_state(b.clone(), InputKind::TypeII).unwrap();
        let rho = reduced_density_two_qubit(&ii, 1, 2).unwrap();
        let bell = TwoQubitDensity::pure((1, 2), [c(0.0), c(R2), c(R2), c(0.0)]).unwrap();
        assert!((rho.matrix() - bell.matrix()).norm() < 1e-15);
        assert!((eof(&rho) - 1.0).abs() < 1e-12);

        let iii = make_input_state(b, InputKind::TypeIII).unwrap();
        let rho = reduced_density_two_qubit(&iii, 1, 6).unwrap();
        assert!(rho.matrix().iter().all(|z| (z.re - 0.25).abs() < 1e-15 && z.im == 0.0));
        assert!(eof(&rho) < 1e-12);
    }

    #[test]
    fn invalid_sites() {
        let b = Arc::new(enumerate_basis(4, 2).unwrap());
        let psi = make_input_state(b, InputKind::TypeI).unwrap();
        for (a, s) in [(0, 1), (2, 2), (3, 2), (1, 5)] {
            assert!(matches!(reduced_density_two_qubit(&psi, a, s), Err(crate::Error::Domain(_))));
        }
    }

    #[test]
    fn concurrence_examples() {
        let bell = TwoQubitDensity::pure((1, 2), [c(0.0), c(R2), c(R2), c(0.0)]).unwrap();
        assert!((concurrence(&bell) - 1.0).abs() < 1e-8);
        let product = TwoQubitDensity::pure((1, 2), [c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        assert!(concurrence(&product).abs() < 1e-8);

        let p = 0.5;
        let werner = bell.matrix().scale(p) + Matrix4::identity().scale((1.0 - p) / 4.0);
        let werner = TwoQubitDensity::new((1, 2), werner).unwrap();
        assert!((concurrence(&werner) - 0.25).abs() < 1e-8);
    }

    #[test]
    fn density_validation() {
        let mut m = Matrix4::<Complex64>::identity().scale(0.25);
        m[(0, 1)] = c(0.1);
        assert!(TwoQubitDensity::new((1, 2), m).is_err());
        assert!(TwoQubitDensity::new((1, 2), Matrix4::identity().scale(0.3)).is_err());
        let mut neg = Matrix4::<Complex64>::zeros();
        neg[(0, 0)] = c(1.5);
        neg[(1, 1)] = c(-0.5);
        assert!(TwoQubitDensity::new((1, 2), neg).is_err());
    }

    #[test]
    fn eof_examples() {
        assert!((eof_from_concurrence(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(eof_from_concurrence(0.0), 0.0);
        // h(0.9) evaluated by hand: -0.9 log2 0.9 - 0.1 log2 0.1
        let h09 = -0.9 * 0.9f64.log2() - 0.1 * 0.1f64.log2();
        assert!((h09 - 0.468996).abs() < 1e-5);
        assert!((eof_from_concurrence(0.6) - 0.468996).abs() < 1e-5);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert_eq!(binary_entropy(0.5), 1.0);
    }

    #[test]
    fn eof_monotone_in_concurrence() {
        let values: Vec<f64> = (0..=10_000).map(|i| eof_from_concurrence(i as f64 / 1e4)).collect();
        assert!(values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn peaks() {
        assert_eq!(peak_indices(&[0.0, 0.5, 0.2, 0.02, 0.04, 0.01, 0.9, 0.9, 0.1], 0.05), vec![1, 6]);
        assert!(peak_indices(&[0.1, 0.2, 0.3], 0.05).is_empty());
    }

    #[test]
    fn series_length_mismatch() {
        let b = Arc::new(enumerate_basis(4, 2).unwrap());
        let psi = make_input_state(b, InputKind::TypeI).unwrap();
        let grid = TimeGrid::new(1.0, vec![0.0, 0.5]).unwrap();
        assert!(evaluate_series(std::slice::from_ref(&psi), &grid, &psi, FidelityTarget::Initial, (1, 2)).is_err());
        let s = evaluate_series(&[psi.clone(), psi.clone()], &grid, &psi, FidelityTarget::Initial, (1, 2))
            .unwrap();
        assert_eq!(s.fidelity, vec![1.0, 1.0]);
        assert_eq!(s.eof, vec![0.0, 0.0]);
    }
}

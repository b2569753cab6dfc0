//! Exact propagation `e^{-iHt}` through a dense eigendecomposition, and the
//! revival time of a coupling profile. Units: `hbar = 1`, energies in `J_0`,
//! times in `1/J_0`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{config_err, domain_err, numerical_err, Result};
use crate::hamiltonian::{CouplingProfile, HamiltonianMatrix};
use crate::hilbert::{Basis, StateVector};

/// Relative tolerance on eigenvalue spacings for a profile to count as
/// exactly periodic.
const LADDER_TOLERANCE: f64 = 1e-9;

/// Eigendecomposition `H = V diag(E) V^dagger` with ascending `E`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    basis: Arc<Basis>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
}

/// Diagonalize a Hermitian matrix.
///
/// Matrices with vanishing imaginary parts (every Hamiltonian the
/// perturbation families produce) go through the real symmetric solver.
pub fn eigendecompose(h: &HamiltonianMatrix) -> Result<Spectrum> {
    let scale = h.entries().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let asym = h.hermiticity_error();
    if asym > 1e-12 * scale {
        return Err(numerical_err!("matrix is not Hermitian (asymmetry {asym:e})"));
    }
    if h.entries().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(numerical_err!("matrix has non-finite entries"));
    }
    let (values, vectors) = if h.is_real() {
        let real = h.entries().map(|z| z.re);
        let eig = SymmetricEigen::new(real);
        (eig.eigenvalues, eig.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let eig = SymmetricEigen::new(h.entries().clone());
        (eig.eigenvalues, eig.eigenvectors)
    };
    Ok(Spectrum::sorted(h.basis().clone(), values, vectors))
}

impl Spectrum {
    fn sorted(basis: Arc<Basis>, values: DVector<f64>, vectors: DMatrix<Complex64>) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let eigenvalues = DVector::from_iterator(values.len(), order.iter().map(|&i| values[i]));
        let eigenvectors = DMatrix::from_columns(
            &order.iter().map(|&i| vectors.column(i).into_owned()).collect::<Vec<_>>(),
        );
        Self { basis, eigenvalues, eigenvectors }
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Columns are eigenvectors, in the order of [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    /// `V diag(E) V^dagger`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let mut scaled = self.eigenvectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col.scale_mut(self.eigenvalues[k]);
        }
        scaled * self.eigenvectors.adjoint()
    }

    fn check_state(&self, psi: &StateVector) -> Result<()> {
        if psi.basis().as_ref() != self.basis.as_ref() {
            return Err(domain_err!("state does not belong to the spectrum's basis"));
        }
        Ok(())
    }

    /// Components of `psi` in the eigenbasis, `V^dagger psi`.
    pub fn eigen_components(&self, psi: &StateVector) -> Result<DVector<Complex64>> {
        self.check_state(psi)?;
        Ok(self.eigenvectors.ad_mul(psi.amplitudes()))
    }

    fn propagate(&self, components: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let phased = DVector::from_iterator(
            components.len(),
            components
                .iter()
                .zip(self.eigenvalues.iter())
                .map(|(c, e)| c * Complex64::from_polar(1.0, -e * t)),
        );
        &self.eigenvectors * phased
    }

    /// `e^{-iHt} psi`.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if !t.is_finite() {
            return Err(domain_err!("evolution time {t} is not finite"));
        }
        let c = self.eigen_components(psi)?;
        Ok(StateVector::from_normalized(self.basis.clone(), self.propagate(&c, t)))
    }

    /// Evolve `psi0` to every time of `grid`.
    pub fn sample_trajectory(&self, psi0: &StateVector, grid: &TimeGrid) -> Result<Vec<StateVector>> {
        let c = self.eigen_components(psi0)?;
        Ok(grid
            .points()
            .iter()
            .map(|&t| StateVector::from_normalized(self.basis.clone(), self.propagate(&c, t)))
            .collect())
    }
}

/// Free-function form of [`Spectrum::sample_trajectory`].
pub fn sample_trajectory(spec: &Spectrum, psi0: &StateVector, grid: &TimeGrid) -> Result<Vec<StateVector>> {
    spec.sample_trajectory(psi0, grid)
}

/// Eigenvalues of the single-excitation block of a nearest-neighbour
/// profile, ascending.
pub fn single_excitation_levels(profile: &CouplingProfile) -> Vec<f64> {
    let n = profile.chain_length();
    let block = DMatrix::from_fn(n, n, |r, c| {
        if c == r + 1 {
            profile.coupling(r + 1)
        } else if r == c + 1 {
            profile.coupling(c + 1)
        } else {
            0.0
        }
    });
    let mut values: Vec<f64> = SymmetricEigen::new(block).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Revival time `t_S`: the period of the single-excitation dynamics, which
/// requires an equally spaced eigenvalue ladder. For the perfect-transfer
/// profile the spacing is `2 J_0`, so `t_S = pi / J_0`.
pub fn system_time(profile: &CouplingProfile) -> Result<f64> {
    let levels = single_excitation_levels(profile);
    let gaps: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let worst = gaps.iter().map(|g| (g - mean).abs()).fold(0.0, f64::max);
    if mean.is_nan() || mean <= 0.0 || worst > LADDER_TOLERANCE * mean.max(1.0) {
        return Err(numerical_err!(
            "single-excitation levels are not equally spaced (spacing spread {worst:e}); no exact revival"
        ));
    }
    Ok(2.0 * PI / mean)
}

/// Mirror (transfer) time `t_S / 2`.
pub fn mirror_time(profile: &CouplingProfile) -> Result<f64> {
    Ok(system_time(profile)? / 2.0)
}

/// Sampling times, with the revival time used to rescale them.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t_s: f64,
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t_s: f64, points: Vec<f64>) -> Result<Self> {
        if !(t_s.is_finite() && t_s > 0.0) {
            return Err(config_err!("revival time {t_s} must be finite and positive"));
        }
        if points.is_empty() {
            return Err(config_err!("time grid is empty"));
        }
        if points.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(config_err!("time grid has negative or non-finite points"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config_err!("time grid is not strictly ascending"));
        }
        Ok(Self { t_s, points })
    }

    /// `count` uniform points on `[0, periods * t_s]`.
    pub fn uniform(t_s: f64, periods: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(config_err!("time grid needs at least one point"));
        }
        if count > 1 && !(periods.is_finite() && periods > 0.0) {
            return Err(config_err!("time window of {periods} periods must be positive"));
        }
        let end = periods * t_s;
        let points = if count == 1 {
            vec![0.0]
        } else {
            (0..count).map(|i| end * i as f64 / (count - 1) as f64).collect()
        };
        Self::new(t_s, points)
    }

    /// Points given as fractions of `t_s`.
    pub fn from_fractions(t_s: f64, fractions: &[f64]) -> Result<Self> {
        Self::new(t_s, fractions.iter().map(|f| f * t_s).collect())
    }

    pub fn t_s(&self) -> f64 {
        self.t_s
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `t / t_S` for every point.
    pub fn rescaled(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(move |t| t / self.t_s)
    }

    /// Index of the point closest to `fraction * t_S`.
    pub fn nearest_index(&self, fraction: f64) -> usize {
        let target = fraction * self.t_s;
        let mut best = 0;
        for (i, t) in self.points.iter().enumerate() {
            if (t - target).abs() < (self.points[best] - target).abs() {
                best = i;
            }
        }
        best
    }
}

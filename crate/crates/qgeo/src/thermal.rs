//! Thermal states of magnetic models and the thermodynamic meaning of the
//! metric: along inverse temperature it is the specific heat, along the
//! field it combines the magnetic susceptibility (classical part) with
//! per-level fidelity susceptibilities (projective part).
//!
//! Concretely, for `H(b) = H₀ + b·S_z` and `ρ = e^{−βH}/Z`:
//! `ds² = C_V/(4β²) dβ²` at fixed field, and
//! `ds² = (βχ_M/4 + Σ_m p_m χ_{F,m}) db²` at fixed temperature, with
//! `χ_{F,m} = Σ_{m'≠m} |⟨m'|S_z|m⟩|²/(ε_m − ε_{m'})²`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::{eig_hermitian, inner, weighted_outer_sum, ComplexMatrix, HermitianEigen};
use crate::metric::differential_line_element;
use crate::scalar::Scalar;
use crate::state::{sample_path, DensityOperator};

/// Spin system in a longitudinal field: `H(b) = H₀ + b·S_z`.
#[derive(Debug, Clone)]
pub struct MagneticModel<S> {
    h0: ComplexMatrix<S>,
    sz: ComplexMatrix<S>,
    b: S,
    n_sites: usize,
}

impl<S: Scalar> MagneticModel<S> {
    /// Validates that both operators are Hermitian and equally sized.
    pub fn new(h0: ComplexMatrix<S>, sz: ComplexMatrix<S>, b: S, n_sites: usize) -> Result<Self> {
        if h0.dim() != sz.dim() {
            return Err(Error::DimensionMismatch {
                left: h0.dim(),
                right: sz.dim(),
            });
        }
        let tol = S::of(crate::DEFAULT_TOL);
        for m in [&h0, &sz] {
            let dev = m.hermitian_deviation();
            if dev > tol {
                return Err(Error::NotHermitian {
                    deviation: dev.as_f64(),
                });
            }
        }
        Ok(Self { h0, sz, b, n_sites })
    }

    /// The full Hamiltonian `H₀ + b·S_z` at the stored field.
    pub fn hamiltonian(&self) -> ComplexMatrix<S> {
        &self.h0 + &self.sz.scale_re(self.b)
    }

    pub fn h0(&self) -> &ComplexMatrix<S> {
        &self.h0
    }

    pub fn sz(&self) -> &ComplexMatrix<S> {
        &self.sz
    }

    pub fn b(&self) -> S {
        self.b
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    /// The same model at a different field value.
    pub fn with_field(&self, b: S) -> Self {
        Self { b, ..self.clone() }
    }
}

/// Boltzmann state of a model at inverse temperature `beta`.
#[derive(Debug, Clone)]
pub struct ThermalState<S> {
    beta: S,
    eigen: HermitianEigen<S>,
    z: S,
    weights: Vec<S>,
}

impl<S: Scalar> ThermalState<S> {
    pub fn beta(&self) -> S {
        self.beta
    }

    /// Eigendata of `H(b)`: energies ascending with matching eigenvectors.
    pub fn eigen(&self) -> &HermitianEigen<S> {
        &self.eigen
    }

    /// Partition function `Σ_m e^{−β ε_m}`.
    pub fn partition(&self) -> S {
        self.z
    }

    /// Boltzmann weights `e^{−β ε_m}/Z`, ordered like the energies.
    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    /// The density operator `Σ_m p_m |m⟩⟨m|`.
    pub fn density(&self) -> DensityOperator<S> {
        DensityOperator::from_matrix_unchecked(weighted_outer_sum(
            &self.eigen.vectors,
            &self.weights,
        ))
    }

    fn mean_energy(&self) -> S {
        self.weights
            .iter()
            .zip(&self.eigen.values)
            .map(|(&p, &e)| p * e)
            .sum()
    }

    fn energy_variance(&self) -> S {
        let mean = self.mean_energy();
        let second: S = self
            .weights
            .iter()
            .zip(&self.eigen.values)
            .map(|(&p, &e)| p * e * e)
            .sum();
        (second - mean * mean).max(S::zero())
    }
}

const PAULI_SITE_LIMIT: usize = 6;

fn site_operator<S: Scalar>(op: &ComplexMatrix<S>, site: usize, n: usize) -> ComplexMatrix<S> {
    let mut out = ComplexMatrix::identity(1);
    for i in 0..n {
        let factor = if i == site {
            op.clone()
        } else {
            ComplexMatrix::identity(2)
        };
        out = out.kron(&factor);
    }
    out
}

/// Total longitudinal spin `½ Σ_i σ_z^{(i)}` on `n` sites.
fn total_sz<S: Scalar>(n: usize) -> ComplexMatrix<S> {
    let sz_half = crate::matrix::pauli_z::<S>().scale_re(S::of(0.5));
    let dim = 1usize << n;
    let mut total = ComplexMatrix::zeros(dim);
    for i in 0..n {
        total = &total + &site_operator(&sz_half, i, n);
    }
    total
}

/// Open-boundary isotropic Heisenberg chain
/// `H₀ = (J/4) Σ_i σ⃗_i·σ⃗_{i+1}` with `S_z = ½ Σ_i σ_z^{(i)}`, field zero.
///
/// Supported for 2 to 6 sites (dimension at most 64). `[H₀, S_z] = 0`, so
/// the level fidelity susceptibilities of this model all vanish.
pub fn build_heisenberg_chain<S: Scalar>(n: usize, j: S) -> Result<MagneticModel<S>> {
    if n < 2 {
        return Err(Error::DomainError(format!(
            "a chain needs at least two sites, got {n}"
        )));
    }
    if n > PAULI_SITE_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim: 1 << n,
            limit: 1 << PAULI_SITE_LIMIT,
        });
    }
    let dim = 1usize << n;
    let mut h0 = ComplexMatrix::zeros(dim);
    let paulis = [
        crate::matrix::pauli_x::<S>(),
        crate::matrix::pauli_y::<S>(),
        crate::matrix::pauli_z::<S>(),
    ];
    let quarter_j = j * S::of(0.25);
    for i in 0..n - 1 {
        for p in &paulis {
            let left = site_operator(p, i, n);
            let right = site_operator(p, i + 1, n);
            h0 = &h0 + &(&left * &right).scale_re(quarter_j);
        }
    }
    MagneticModel::new(h0, total_sz(n), S::zero(), n)
}

/// Heisenberg chain with an added transverse term `g·Σ_i σ_x^{(i)}`,
/// breaking `[H₀, S_z] = 0` so that the fidelity susceptibilities are
/// nonzero.
pub fn build_anisotropic_chain<S: Scalar>(n: usize, j: S, g: S) -> Result<MagneticModel<S>> {
    let base = build_heisenberg_chain(n, j)?;
    let mut h0 = base.h0.clone();
    let px = crate::matrix::pauli_x::<S>();
    for i in 0..n {
        h0 = &h0 + &site_operator(&px, i, n).scale_re(g);
    }
    MagneticModel::new(h0, base.sz, base.b, n)
}

/// A single spin-½: `H₀ = 0`, `S_z = σ_z/2`, so `H(b) = b·σ_z/2` with
/// levels `±b/2`. All response coefficients have closed forms here.
pub fn single_spin<S: Scalar>() -> MagneticModel<S> {
    MagneticModel {
        h0: ComplexMatrix::zeros(2),
        sz: crate::matrix::pauli_z::<S>().scale_re(S::of(0.5)),
        b: S::zero(),
        n_sites: 1,
    }
}

/// Boltzmann state of `model` at inverse temperature `beta > 0`.
///
/// Weights are computed against the shifted energies `ε_m − ε_min`, so no
/// finite input can overflow the exponentials.
pub fn thermal_state<S: Scalar>(model: &MagneticModel<S>, beta: S) -> Result<ThermalState<S>> {
    if !(beta > S::zero()) {
        return Err(Error::DomainError(format!(
            "inverse temperature must be positive, got {}",
            beta.as_f64()
        )));
    }
    let eigen = eig_hermitian(&model.hamiltonian(), S::of(crate::DEFAULT_TOL))?;
    let e_min = eigen.values[0];
    let shifted: Vec<S> = eigen
        .values
        .iter()
        .map(|&e| (-(beta * (e - e_min))).exp())
        .collect();
    let z_shifted: S = shifted.iter().copied().sum();
    let weights: Vec<S> = shifted.iter().map(|&w| w / z_shifted).collect();
    let z = z_shifted * (-(beta * e_min)).exp();
    Ok(ThermalState {
        beta,
        eigen,
        z,
        weights,
    })
}

/// Specific heat `C_V = β²(⟨ε²⟩ − ⟨ε⟩²)`.
pub fn specific_heat<S: Scalar>(model: &MagneticModel<S>, beta: S) -> Result<S> {
    let state = thermal_state(model, beta)?;
    Ok(beta * beta * state.energy_variance())
}

/// Metric coefficient along inverse temperature, `C_V/(4β²)`.
///
/// Equal to the classical (Fisher–Rao) term of the β-path; the projective
/// part vanishes because the eigenvectors do not depend on β.
pub fn metric_dbeta<S: Scalar>(model: &MagneticModel<S>, beta: S) -> Result<S> {
    let state = thermal_state(model, beta)?;
    Ok(state.energy_variance() * S::of(0.25))
}

/// Magnetic susceptibility `χ_M = β·var(∂ε/∂b)` and per-level fidelity
/// susceptibilities `χ_{F,m} = Σ_{m'≠m} |⟨m'|S_z|m⟩|²/(ε_m − ε_{m'})²`.
///
/// The level slopes `∂ε_m/∂b = ⟨m|S_z|m⟩` are exact for a nondegenerate
/// spectrum; degenerate spectra are rejected because the denominators of
/// `χ_F` vanish there.
pub fn susceptibilities<S: Scalar>(model: &MagneticModel<S>, beta: S) -> Result<(S, Vec<S>)> {
    let state = thermal_state(model, beta)?;
    let n = model.dim();
    let deg_tol = S::of(crate::DEFAULT_DEGENERACY_TOL);
    for w in state.eigen.values.windows(2) {
        let gap = w[1] - w[0];
        if gap <= deg_tol {
            return Err(Error::DegenerateSpectrum { gap: gap.as_f64() });
        }
    }
    let vectors: Vec<Vec<Complex<S>>> = (0..n).map(|k| state.eigen.vector(k)).collect();
    let sz_applied: Vec<Vec<Complex<S>>> = vectors.iter().map(|v| model.sz.apply(v)).collect();

    let mut slope_mean = S::zero();
    let mut slope_sq_mean = S::zero();
    let mut chi_f = vec![S::zero(); n];
    for m in 0..n {
        let slope = inner(&vectors[m], &sz_applied[m]).re;
        slope_mean += state.weights[m] * slope;
        slope_sq_mean += state.weights[m] * slope * slope;
        for mp in 0..n {
            if mp == m {
                continue;
            }
            let elem = inner(&vectors[mp], &sz_applied[m]).norm_sqr();
            let gap = state.eigen.values[m] - state.eigen.values[mp];
            chi_f[m] += elem / (gap * gap);
        }
    }
    let chi_m = beta * (slope_sq_mean - slope_mean * slope_mean).max(S::zero());
    Ok((chi_m, chi_f))
}

/// Metric coefficient along the field, `βχ_M/4 + Σ_m p_m χ_{F,m}`.
pub fn metric_db<S: Scalar>(model: &MagneticModel<S>, beta: S) -> Result<S> {
    let state = thermal_state(model, beta)?;
    let (chi_m, chi_f) = susceptibilities(model, beta)?;
    let fs: S = state.weights.iter().zip(&chi_f).map(|(&p, &c)| p * c).sum();
    Ok(beta * chi_m * S::of(0.25) + fs)
}

/// Finite-difference check of `metric_dbeta`: the spectral line element of
/// the β-path through `beta`, split as
/// `(total, projective part, classical part)` per unit `dβ²`.
pub fn fd_metric_dbeta<S: Scalar>(
    model: &MagneticModel<S>,
    beta: S,
    delta: S,
) -> Result<(S, S, S)> {
    if !(delta > S::zero() && beta - delta > S::zero()) {
        return Err(Error::InvalidStep(format!(
            "need 0 < delta < beta, got delta = {}",
            delta.as_f64()
        )));
    }
    let grid = [beta - delta, beta, beta + delta];
    let path = sample_path(
        |bt| Ok(thermal_state(model, bt)?.density()),
        &grid,
        S::of(crate::DEFAULT_RANK_TOL),
        S::of(crate::DEFAULT_DEGENERACY_TOL),
    )?;
    let el = differential_line_element(&path, 1)?;
    let scale = S::one() / (delta * delta);
    let fs: S = el.fubini_study_terms.iter().copied().sum();
    Ok((el.total * scale, fs * scale, el.fisher_rao * scale))
}

/// Finite-difference check of `metric_db`: the spectral line element of the
/// field path through the model's `b`, split as
/// `(total, projective part, classical part)` per unit `db²`.
pub fn fd_metric_db<S: Scalar>(model: &MagneticModel<S>, beta: S, delta: S) -> Result<(S, S, S)> {
    if !(delta > S::zero()) {
        return Err(Error::InvalidStep(format!(
            "step must be positive, got {}",
            delta.as_f64()
        )));
    }
    let b = model.b();
    let grid = [b - delta, b, b + delta];
    let path = sample_path(
        |bf| Ok(thermal_state(&model.with_field(bf), beta)?.density()),
        &grid,
        S::of(crate::DEFAULT_RANK_TOL),
        S::of(crate::DEFAULT_DEGENERACY_TOL),
    )?;
    let el = differential_line_element(&path, 1)?;
    let scale = S::one() / (delta * delta);
    let fs: S = el.fubini_study_terms.iter().copied().sum();
    Ok((el.total * scale, fs * scale, el.fisher_rao * scale))
}

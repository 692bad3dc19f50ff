//! Unitary evolution of mixed states and the energy-dispersion identities.
//!
//! Under `ρ(t) = U(t) ρ U†(t)` the eigenvalues are frozen, so the metric
//! speed is purely projective and equals the probability-weighted average
//! of the per-eigenstate energy dispersions. That average never exceeds the
//! dispersion of the full state, which yields a geometric lower bound on
//! evolution time: the averaged dispersion times elapsed time equals the
//! path length, which in turn is at least the geodesic distance between the
//! endpoints.

use crate::error::{Error, Result};
use crate::matrix::{inner, ComplexMatrix};
use crate::metric::{differential_line_element, path_length};
use crate::scalar::Scalar;
use crate::state::{decompose, sample_path, AlignedPath, DensityOperator};

/// Energy dispersions of a state under a Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionReport<S> {
    /// `Σ_k p_k (Δ_k E)²` — the eigenstate-averaged squared dispersion.
    pub avg_dispersion_sq: S,
    /// `Tr(ρH²) − [Tr(ρH)]²` — the squared dispersion of the full state.
    pub rho_dispersion_sq: S,
    /// `(Δ_k E)² = ⟨n_k|H²|n_k⟩ − ⟨n_k|H|n_k⟩²` per kept branch.
    pub per_branch: Vec<S>,
}

/// Conjugates `rho0` by `exp(−iHt)`.
pub fn evolve<S: Scalar>(
    rho0: &DensityOperator<S>,
    h: &ComplexMatrix<S>,
    t: S,
) -> Result<DensityOperator<S>> {
    let u = crate::matrix::unitary_exp(h, t)?;
    let m = &(&u * rho0.matrix()) * &u.adjoint();
    Ok(DensityOperator::from_matrix_unchecked(m))
}

/// Samples `t ↦ exp(−iHt) ρ0 exp(iHt)` on `grid` and aligns the result.
pub fn evolve_path<S: Scalar>(
    rho0: &DensityOperator<S>,
    h: &ComplexMatrix<S>,
    grid: &[S],
    rank_tol: S,
    degeneracy_tol: S,
) -> Result<AlignedPath<S>> {
    let dev = h.hermitian_deviation();
    if dev > S::of(crate::DEFAULT_TOL) {
        return Err(Error::NotHermitian {
            deviation: dev.as_f64(),
        });
    }
    sample_path(|t| evolve(rho0, h, t), grid, rank_tol, degeneracy_tol)
}

/// Per-branch, averaged, and full-state energy dispersions of `rho`
/// under `h`.
///
/// Every entry is invariant under the shift `H → H + c·1`, and the average
/// never exceeds the full-state value: the difference is the variance of
/// the branch energies `⟨n_k|H|n_k⟩` over `p`.
pub fn dispersions<S: Scalar>(
    rho: &DensityOperator<S>,
    h: &ComplexMatrix<S>,
) -> Result<DispersionReport<S>> {
    let dev = h.hermitian_deviation();
    if dev > S::of(crate::DEFAULT_TOL) {
        return Err(Error::NotHermitian {
            deviation: dev.as_f64(),
        });
    }
    let d = decompose(
        rho,
        S::of(crate::DEFAULT_RANK_TOL),
        S::of(crate::DEFAULT_DEGENERACY_TOL),
    )?;
    let h2 = h * h;
    let mut per_branch = Vec::with_capacity(d.rank());
    let mut avg = S::zero();
    for k in 0..d.rank() {
        let v = d.vector(k);
        let e = inner(v, &h.apply(v)).re;
        let e2 = inner(v, &h2.apply(v)).re;
        let var = (e2 - e * e).max(S::zero());
        per_branch.push(var);
        avg += d.probs()[k] * var;
    }
    let tr_h = (rho.matrix() * h).trace().re;
    let tr_h2 = (rho.matrix() * &h2).trace().re;
    let rho_var = (tr_h2 - tr_h * tr_h).max(S::zero());
    Ok(DispersionReport {
        avg_dispersion_sq: avg,
        rho_dispersion_sq: rho_var,
        per_branch,
    })
}

/// Metric speed (finite differences along the path) and dispersion speed
/// (`√(Σ p_k (Δ_k E)²)` at the same point) at interior index `i`.
///
/// For a path generated by `evolve` under `h` the two agree up to
/// finite-difference error, which is second order in the step.
pub fn speed<S: Scalar>(path: &AlignedPath<S>, i: usize, h: &ComplexMatrix<S>) -> Result<(S, S)> {
    let breakdown = differential_line_element(path, i)?;
    let dt = (path.time(i + 1) - path.time(i - 1)) * S::of(0.5);
    let metric_speed = breakdown.total.sqrt() / dt;

    let d = path.decomp(i);
    let h2 = h * h;
    let mut avg = S::zero();
    for k in 0..d.rank() {
        let v = d.vector(k);
        let e = inner(v, &h.apply(v)).re;
        let e2 = inner(v, &h2.apply(v)).re;
        avg += d.probs()[k] * (e2 - e * e).max(S::zero());
    }
    Ok((metric_speed, avg.sqrt()))
}

/// Accumulates the two sides of the time–energy bound along a path:
/// time-averaged full-state dispersion times elapsed time, time-averaged
/// branch-averaged dispersion times elapsed time, and the path length.
///
/// Averages use left-endpoint step summation. For unitary paths the middle
/// quantity equals the path length up to discretization error, and the
/// first is never smaller; comparison against a geodesic length is left to
/// the caller (closed form available for qubits).
pub fn uncertainty_check<S: Scalar>(
    path: &AlignedPath<S>,
    h: &ComplexMatrix<S>,
) -> Result<(S, S, S)> {
    if path.len() < 2 {
        return Err(Error::DomainError(
            "uncertainty check needs at least two points".into(),
        ));
    }
    let h2 = h * h;
    let mut acc_rho = S::zero();
    let mut acc_avg = S::zero();
    for i in 0..path.len() - 1 {
        let dt = path.time(i + 1) - path.time(i);
        let d = path.decomp(i);
        let mut avg = S::zero();
        let mut mean = S::zero();
        let mut mean_sq = S::zero();
        for k in 0..d.rank() {
            let p = d.probs()[k];
            let v = d.vector(k);
            let e = inner(v, &h.apply(v)).re;
            let e2 = inner(v, &h2.apply(v)).re;
            avg += p * (e2 - e * e).max(S::zero());
            mean += p * e;
            mean_sq += p * e2;
        }
        let rho_var = (mean_sq - mean * mean).max(S::zero());
        acc_rho += rho_var.sqrt() * dt;
        acc_avg += avg.sqrt() * dt;
    }
    let len = path_length(path)?;
    Ok((acc_rho, acc_avg, len))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{pauli_x, pauli_z};
    use crate::sample::{random_density, random_hermitian};
    use crate::{DEFAULT_DEGENERACY_TOL, DEFAULT_RANK_TOL};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn half_sigma_x() -> ComplexMatrix<f64> {
        pauli_x::<f64>().scale_re(0.5)
    }

    #[test]
    fn evolve_zero_time_is_identity() {
        let rho = DensityOperator::diagonal(&[0.8, 0.2]).unwrap();
        let out = evolve(&rho, &half_sigma_x(), 0.0).unwrap();
        assert!((out.matrix() - rho.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn evolve_commuting_hamiltonian_is_stationary() {
        let rho = DensityOperator::diagonal(&[0.8, 0.2]).unwrap();
        let h = pauli_z::<f64>();
        for t in [0.3, 1.7, 9.2] {
            let out = evolve(&rho, &h, t).unwrap();
            assert!((out.matrix() - rho.matrix()).max_abs() < 1e-12);
        }
    }

    #[test]
    fn evolve_preserves_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let rho = random_density::<f64>(2, 0.05, &mut rng);
        let h = random_hermitian::<f64>(2, &mut rng);
        let before = decompose(&rho, DEFAULT_RANK_TOL, DEFAULT_DEGENERACY_TOL).unwrap();
        let after = decompose(
            &evolve(&rho, &h, 0.8).unwrap(),
            DEFAULT_RANK_TOL,
            DEFAULT_DEGENERACY_TOL,
        )
        .unwrap();
        for (p, q) in before.probs().iter().zip(after.probs()) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn dispersions_vanish_for_energy_eigenbasis() {
        let rho = DensityOperator::diagonal(&[0.8, 0.2]).unwrap();
        let rep = dispersions(&rho, &pauli_z::<f64>()).unwrap();
        assert!(rep.avg_dispersion_sq < 1e-14);
        for v in &rep.per_branch {
            assert!(*v < 1e-14);
        }
    }

    #[test]
    fn dispersions_qubit_transverse_closed_form() {
        // diag(0.8, 0.2) with H = σ_x/2: each basis state has ⟨H⟩ = 0,
        // ⟨H²⟩ = ¼, so both dispersions equal ¼ (the tight case).
        let rho = DensityOperator::diagonal(&[0.8, 0.2]).unwrap();
        let rep = dispersions(&rho, &half_sigma_x()).unwrap();
        assert!((rep.per_branch[0] - 0.25).abs() < 1e-14);
        assert!((rep.per_branch[1] - 0.25).abs() < 1e-14);
        assert!((rep.avg_dispersion_sq - 0.25).abs() < 1e-14);
        assert!((rep.rho_dispersion_sq - 0.25).abs() < 1e-14);
    }

    #[test]
    fn dispersions_shift_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let rho = random_density::<f64>(3, 0.05, &mut rng);
        let h = random_hermitian::<f64>(3, &mut rng);
        let shifted = &h + &ComplexMatrix::identity(3).scale_re(7.3);
        let a = dispersions(&rho, &h).unwrap();
        let b = dispersions(&rho, &shifted).unwrap();
        assert!((a.avg_dispersion_sq - b.avg_dispersion_sq).abs() < 1e-9);
        assert!((a.rho_dispersion_sq - b.rho_dispersion_sq).abs() < 1e-9);
    }

    #[test]
    fn averaged_dispersion_never_exceeds_state_dispersion() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..1000 {
            let rho = random_density::<f64>(4, 0.02, &mut rng);
            let h = random_hermitian::<f64>(4, &mut rng);
            let rep = dispersions(&rho, &h).unwrap();
            assert!(
                rep.avg_dispersion_sq <= rep.rho_dispersion_sq + 1e-12,
                "avg {} > rho {}",
                rep.avg_dispersion_sq,
                rep.rho_dispersion_sq
            );
            let weighted: f64 = rep
                .per_branch
                .iter()
                .zip(
                    decompose(&rho, DEFAULT_RANK_TOL, DEFAULT_DEGENERACY_TOL)
                        .unwrap()
                        .probs(),
                )
                .map(|(v, p)| v * p)
                .sum();
            assert!((weighted - rep.avg_dispersion_sq).abs() < 1e-12);
        }
    }

    #[test]
    fn speed_stationary_is_zero() {
        let rho = DensityOperator::diagonal(&[0.8, 0.2]).unwrap();
        let h = pauli_z::<f64>();
        let grid: Vec<f64> = (0..5).map(|i| i as f64 * 0.01).collect();
        let path = evolve_path(&rho, &h, &grid, DEFAULT_RANK_TOL, DEFAULT_DEGENERACY_TOL).unwrap();
        let (vm, vd) = speed(&path, 2, &h).unwrap();
        assert!(vm < 1e-9, "metric speed {vm:.3e}");
        assert!(vd < 1e-12, "dispersion speed {vd:.3e}");
    }

    #[test]
    fn speed_transverse_qubit_is_half() {
        let rho = DensityOperator::diagonal(&[0.8, 0.2]).unwrap();
        let h = half_sigma_x();
        let dt = 1e-3;
        let grid: Vec<f64> = (0..5).map(|i| i as f64 * dt).collect();
        let path = evolve_path(&rho, &h, &grid, DEFAULT_RANK_TOL, DEFAULT_DEGENERACY_TOL).unwrap();
        let (vm, vd) = speed(&path, 2, &h).unwrap();
        assert!((vd - 0.5).abs() < 1e-12);
        assert!((vm - 0.5).abs() < 1e-5, "metric speed {vm}");
    }

    #[test]
    fn speed_agreement_second_order_in_step() {
        let rho = DensityOperator::diagonal(&[0.8, 0.2]).unwrap();
        let h = half_sigma_x();
        let err = |dt: f64| {
            let grid: Vec<f64> = (0..5).map(|i| 0.2 + i as f64 * dt).collect();
            let path =
                evolve_path(&rho, &h, &grid, DEFAULT_RANK_TOL, DEFAULT_DEGENERACY_TOL).unwrap();
            let (vm, vd) = speed(&path, 2, &h).unwrap();
            (vm - vd).abs()
        };
        let e1 = err(2e-3);
        let e2 = err(1e-3);
        let ratio = e1 / e2;
        assert!(
            (3.0..5.5).contains(&ratio),
            "second-order convergence violated: {e1:.3e}/{e2:.3e} = {ratio:.2}"
        );
    }

    #[test]
    fn speed_random_qutrit_tight_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let rho = random_density::<f64>(3, 0.05, &mut rng);
        let h = random_hermitian::<f64>(3, &mut rng);
        let dt = 1e-4;
        let grid: Vec<f64> = (0..5).map(|i| i as f64 * dt).collect();
        let path = evolve_path(&rho, &h, &grid, DEFAULT_RANK_TOL, DEFAULT_DEGENERACY_TOL).unwrap();
        let (vm, vd) = speed(&path, 2, &h).unwrap();
        let rel = (vm - vd).abs() / vd;
        assert!(rel < 1e-6, "relative disagreement {rel:.3e}");
    }

    #[test]
    fn uncertainty_stationary_eigenstate_all_zero() {
        let rho = DensityOperator::diagonal(&[1.0, 0.0]).unwrap();
        let h = pauli_z::<f64>();
        let grid: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let path = evolve_path(&rho, &h, &grid, DEFAULT_RANK_TOL, DEFAULT_DEGENERACY_TOL).unwrap();
        let (lr, la, len) = uncertainty_check(&path, &h).unwrap();
        assert!(lr < 1e-12);
        assert!(la < 1e-12);
        assert!(len < 1e-8);
    }

    #[test]
    fn uncertainty_stationary_mixed_keeps_classical_spread() {
        // A stationary mixed state moves nowhere, yet its full-state energy
        // dispersion stays finite: diag(0.8, 0.2) under σ_z has variance
        // 1 − 0.6² = 0.64, so over Δt = 1 the first entry is 0.8.
        let rho = DensityOperator::diagonal(&[0.8, 0.2]).unwrap();
        let h = pauli_z::<f64>();
        let grid: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let path = evolve_path(&rho, &h, &grid, DEFAULT_RANK_TOL, DEFAULT_DEGENERACY_TOL).unwrap();
        let (lr, la, len) = uncertainty_check(&path, &h).unwrap();
        assert!((lr - 0.8).abs() < 1e-12, "lhs_rho = {lr}");
        assert!(la < 1e-12);
        assert!(len < 1e-8);
    }

    #[test]
    fn uncertainty_transverse_qubit_tight() {
        // Constant speed ½ over Δt = 2: both sides equal 1 and the path is
        // itself (a reparametrized) geodesic between its endpoints.
        let rho = DensityOperator::diagonal(&[0.8, 0.2]).unwrap();
        let h = half_sigma_x();
        let n = 2000;
        let grid: Vec<f64> = (0..=n).map(|i| 2.0 * i as f64 / n as f64).collect();
        let path = evolve_path(&rho, &h, &grid, DEFAULT_RANK_TOL, DEFAULT_DEGENERACY_TOL).unwrap();
        let (lr, la, len) = uncertainty_check(&path, &h).unwrap();
        assert!((lr - 1.0).abs() < 1e-10, "lhs_rho = {lr}");
        assert!((la - 1.0).abs() < 1e-10, "lhs_avg = {la}");
        assert!((la - len).abs() < 1e-5, "len = {len}");
    }

    #[test]
    fn uncertainty_ordering_mixed_hamiltonian() {
        let rho = DensityOperator::diagonal(&[0.8, 0.2]).unwrap();
        let h = &half_sigma_x() + &pauli_z::<f64>();
        let n = 800;
        let grid: Vec<f64> = (0..=n).map(|i| 1.2 * i as f64 / n as f64).collect();
        let path = evolve_path(&rho, &h, &grid, DEFAULT_RANK_TOL, DEFAULT_DEGENERACY_TOL).unwrap();
        let (lr, la, len) = uncertainty_check(&path, &h).unwrap();
        assert!(lr > la, "state dispersion should dominate: {lr} vs {la}");
        assert!((la - len).abs() < 1e-4, "identity violated: {la} vs {len}");
    }

    #[test]
    fn rejects_non_hermitian_hamiltonian() {
        let rho = DensityOperator::diagonal(&[0.8, 0.2]).unwrap();
        let mut h = pauli_x::<f64>();
        h[(0, 1)] = num_complex::Complex::new(2.0, 0.5);
        assert!(matches!(
            dispersions(&rho, &h),
            Err(Error::NotHermitian { .. })
        ));
        let grid = [0.0, 0.1];
        assert!(matches!(
            evolve_path(&rho, &h, &grid, 1e-12, 1e-9),
            Err(Error::NotHermitian { .. })
        ));
    }
}

//! State-vector simulation of a two-beam interferometer whose arms act on
//! the internal state: the 0-beam applies a unitary `U(δt)` (or a
//! probability-shifting map in the purified variant) while the 1-beam
//! applies a phase shifter `V = Σ_k e^{if_k}|n_k⟩⟨n_k|`.
//!
//! The detection probability in the 0-beam reads out the metric: maximized
//! over the phases `f_k`, `1 − P₀ ≈ ¼ δs²`, with `δs²` picking up the
//! averaged energy dispersion in the unitary case and an extra classical
//! `¼Σδp²/p` term in the purified nonunitary case.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::{inner, unitary_exp, vec_norm, ComplexMatrix};
use crate::scalar::Scalar;
use crate::state::{decompose, DensityOperator, SpectralDecomposition};

/// Amplitudes over beam ⊗ internal ⊗ ancilla, unit norm.
///
/// The beam index is 0 or 1; the ancilla factor has dimension 1 when no
/// purification is involved.
#[derive(Debug, Clone)]
pub struct InterferometerState<S> {
    amps: Vec<Complex<S>>,
    internal_dim: usize,
    ancilla_dim: usize,
}

impl<S: Scalar> InterferometerState<S> {
    /// Wraps raw amplitudes laid out as `(beam·N + n)·A + a`; the vector
    /// must have length `2·N·A` and unit norm.
    pub fn new(amps: Vec<Complex<S>>, internal_dim: usize, ancilla_dim: usize) -> Result<Self> {
        if internal_dim == 0 || ancilla_dim == 0 || amps.len() != 2 * internal_dim * ancilla_dim {
            return Err(Error::InvalidState(format!(
                "amplitude count {} does not fit 2 x {} x {}",
                amps.len(),
                internal_dim,
                ancilla_dim
            )));
        }
        let state = Self {
            amps,
            internal_dim,
            ancilla_dim,
        };
        let norm = state.norm();
        if (norm - S::one()).abs() > S::of(crate::DEFAULT_TOL) {
            return Err(Error::InvalidState(format!(
                "state norm {} is not 1",
                norm.as_f64()
            )));
        }
        Ok(state)
    }

    /// A unit internal vector entering through the 0-beam, no ancilla.
    pub fn pure_input(internal: &[Complex<S>]) -> Result<Self> {
        let n = internal.len();
        let mut amps = vec![Complex::new(S::zero(), S::zero()); 2 * n];
        amps[..n].copy_from_slice(internal);
        Self::new(amps, n, 1)
    }

    pub fn internal_dim(&self) -> usize {
        self.internal_dim
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    fn index(&self, beam: usize, n: usize, a: usize) -> usize {
        (beam * self.internal_dim + n) * self.ancilla_dim + a
    }

    pub fn amplitude(&self, beam: usize, n: usize, a: usize) -> Complex<S> {
        self.amps[self.index(beam, n, a)]
    }

    pub fn norm(&self) -> S {
        vec_norm(&self.amps)
    }

    /// Probability of detecting the particle in the given beam.
    pub fn beam_probability(&self, beam: usize) -> Result<S> {
        if beam > 1 {
            return Err(Error::IndexOutOfRange {
                index: beam,
                len: 2,
            });
        }
        let block = self.internal_dim * self.ancilla_dim;
        Ok(self.amps[beam * block..(beam + 1) * block]
            .iter()
            .map(|z| z.norm_sqr())
            .sum())
    }

    /// Internal density operator conditioned on finding the particle in
    /// `beam` (ancilla traced out).
    pub fn reduced_internal(&self, beam: usize) -> Result<ComplexMatrix<S>> {
        let prob = self.beam_probability(beam)?;
        if prob < S::of(1e-15) {
            return Err(Error::DomainError(format!(
                "beam {beam} carries no probability"
            )));
        }
        let mut rho = ComplexMatrix::zeros(self.internal_dim);
        for i in 0..self.internal_dim {
            for j in 0..self.internal_dim {
                let mut sum = Complex::new(S::zero(), S::zero());
                for a in 0..self.ancilla_dim {
                    sum += self.amplitude(beam, i, a) * self.amplitude(beam, j, a).conj();
                }
                rho[(i, j)] = sum / Complex::new(prob, S::zero());
            }
        }
        Ok(rho)
    }

    /// Applies `op` to the internal factor of one beam only (identity on
    /// the other beam and on the ancilla).
    pub fn apply_internal(&self, beam: usize, op: &ComplexMatrix<S>) -> Result<Self> {
        if beam > 1 {
            return Err(Error::IndexOutOfRange {
                index: beam,
                len: 2,
            });
        }
        if op.dim() != self.internal_dim {
            return Err(Error::DimensionMismatch {
                left: op.dim(),
                right: self.internal_dim,
            });
        }
        let mut out = self.clone();
        for a in 0..self.ancilla_dim {
            let column: Vec<Complex<S>> = (0..self.internal_dim)
                .map(|n| self.amplitude(beam, n, a))
                .collect();
            let mapped = op.apply(&column);
            for (n, value) in mapped.into_iter().enumerate() {
                let idx = out.index(beam, n, a);
                out.amps[idx] = value;
            }
        }
        Ok(out)
    }
}

/// 50-50 beam splitter `|x⟩ ↦ 2^{−1/2}[|x⟩ + (−1)^x|x⊕1⟩]` on the beam
/// index.
pub fn beam_splitter<S: Scalar>(state: &InterferometerState<S>) -> InterferometerState<S> {
    let inv_sqrt2 = Complex::new(S::of(0.5).sqrt(), S::zero());
    let mut out = state.clone();
    for n in 0..state.internal_dim {
        for a in 0..state.ancilla_dim {
            let a0 = state.amplitude(0, n, a);
            let a1 = state.amplitude(1, n, a);
            let i0 = out.index(0, n, a);
            let i1 = out.index(1, n, a);
            out.amps[i0] = (a0 - a1) * inv_sqrt2;
            out.amps[i1] = (a0 + a1) * inv_sqrt2;
        }
    }
    out
}

/// Inverse of [`beam_splitter`], used to recombine the beams before
/// detection.
pub fn recombine<S: Scalar>(state: &InterferometerState<S>) -> InterferometerState<S> {
    let inv_sqrt2 = Complex::new(S::of(0.5).sqrt(), S::zero());
    let mut out = state.clone();
    for n in 0..state.internal_dim {
        for a in 0..state.ancilla_dim {
            let a0 = state.amplitude(0, n, a);
            let a1 = state.amplitude(1, n, a);
            let i0 = out.index(0, n, a);
            let i1 = out.index(1, n, a);
            out.amps[i0] = (a0 + a1) * inv_sqrt2;
            out.amps[i1] = (a1 - a0) * inv_sqrt2;
        }
    }
    out
}

/// Phase shifter `V = Σ_k e^{if_k}|n_k⟩⟨n_k|` over the decomposition's
/// branches, identity on any orthogonal complement.
pub fn phase_shifter<S: Scalar>(
    decomp: &SpectralDecomposition<S>,
    phases: &[S],
) -> Result<ComplexMatrix<S>> {
    if phases.len() != decomp.rank() {
        return Err(Error::RankMismatch {
            left: decomp.rank(),
            right: phases.len(),
        });
    }
    let dim = decomp.dim();
    let mut v = ComplexMatrix::identity(dim);
    for (k, &f) in phases.iter().enumerate() {
        let shift = Complex::new(f.cos() - S::one(), f.sin());
        let n_k = decomp.vector(k);
        for i in 0..dim {
            for j in 0..dim {
                v[(i, j)] += shift * n_k[i] * n_k[j].conj();
            }
        }
    }
    Ok(v)
}

/// The detection probability `½ + ½ Re Σ_k p_k ⟨n_k|U|n_k⟩ e^{−if_k}`
/// predicted algebraically; the tensor simulation in [`run_unitary`] must
/// reproduce it.
pub fn p0_closed_form<S: Scalar>(
    decomp: &SpectralDecomposition<S>,
    u: &ComplexMatrix<S>,
    phases: &[S],
) -> Result<S> {
    if phases.len() != decomp.rank() {
        return Err(Error::RankMismatch {
            left: decomp.rank(),
            right: phases.len(),
        });
    }
    if u.dim() != decomp.dim() {
        return Err(Error::DimensionMismatch {
            left: u.dim(),
            right: decomp.dim(),
        });
    }
    let mut cross = S::zero();
    for k in 0..decomp.rank() {
        let n_k = decomp.vector(k);
        let z = inner(n_k, &u.apply(n_k));
        let f = phases[k];
        cross += decomp.probs()[k] * (z * Complex::new(f.cos(), -f.sin())).re;
    }
    Ok(S::of(0.5) + S::of(0.5) * cross)
}

/// Sends `rho` through the interferometer with `U(δt) = e^{−iHδt}` in the
/// 0-beam and the phase shifter in the 1-beam, by explicit tensor
/// simulation of every spectral branch. Returns `(P0, P1)`.
pub fn run_unitary<S: Scalar>(
    rho: &DensityOperator<S>,
    h: &ComplexMatrix<S>,
    delta_t: S,
    phases: &[S],
) -> Result<(S, S)> {
    let tol = S::of(crate::DEFAULT_TOL);
    let dev = h.hermitian_deviation();
    if dev > tol {
        return Err(Error::NotHermitian {
            deviation: dev.as_f64(),
        });
    }
    if h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: h.dim(),
            right: rho.dim(),
        });
    }
    let decomp = decompose(
        rho,
        S::of(crate::DEFAULT_RANK_TOL),
        S::of(crate::DEFAULT_DEGENERACY_TOL),
    )?;
    let u = unitary_exp(h, delta_t)?;
    let v = phase_shifter(&decomp, phases)?;
    let mut p0 = S::zero();
    let mut p1 = S::zero();
    for k in 0..decomp.rank() {
        let branch = InterferometerState::pure_input(decomp.vector(k))?;
        let out = recombine(
            &beam_splitter(&branch)
                .apply_internal(0, &u)?
                .apply_internal(1, &v)?,
        );
        p0 += decomp.probs()[k] * out.beam_probability(0)?;
        p1 += decomp.probs()[k] * out.beam_probability(1)?;
    }
    Ok((p0, p1))
}

/// Maximizes `P0` over the 1-beam phases: `f*_k = arg⟨n_k|U(δt)|n_k⟩`
/// term by term, `P0max = ½ + ½ Σ_k p_k |⟨n_k|U(δt)|n_k⟩|`.
///
/// For small `δt`, `1 − P0max = ¼ ΔĒ² δt²` up to higher order, so the
/// visibility reads out the averaged energy dispersion.
pub fn maximize_p0<S: Scalar>(
    rho: &DensityOperator<S>,
    h: &ComplexMatrix<S>,
    delta_t: S,
) -> Result<(S, Vec<S>)> {
    let tol = S::of(crate::DEFAULT_TOL);
    let dev = h.hermitian_deviation();
    if dev > tol {
        return Err(Error::NotHermitian {
            deviation: dev.as_f64(),
        });
    }
    if h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: h.dim(),
            right: rho.dim(),
        });
    }
    let decomp = decompose(
        rho,
        S::of(crate::DEFAULT_RANK_TOL),
        S::of(crate::DEFAULT_DEGENERACY_TOL),
    )?;
    let u = unitary_exp(h, delta_t)?;
    let mut p0 = S::of(0.5);
    let mut fstar = Vec::with_capacity(decomp.rank());
    for k in 0..decomp.rank() {
        let n_k = decomp.vector(k);
        let z = inner(n_k, &u.apply(n_k));
        let magnitude = z.norm();
        if magnitude < S::of(1e-14) {
            return Err(Error::VanishingOverlap { branch: k });
        }
        let mut f = z.im.atan2(z.re);
        if f < S::zero() {
            f += S::of(2.0) * S::PI();
        }
        fstar.push(f);
        p0 += S::of(0.5) * decomp.probs()[k] * magnitude;
    }
    Ok((p0, fstar))
}

/// Probability reshuffle `p_k → p_k + δp_k` with unitary `u` in the 0-beam
/// and phases for the 1-beam shifter, all acting on a purification.
#[derive(Debug, Clone)]
pub struct NonunitaryStep<S> {
    delta_p: Vec<S>,
    u: ComplexMatrix<S>,
    phases: Vec<S>,
}

impl<S: Scalar> NonunitaryStep<S> {
    /// Validates that `u` is unitary, the increments sum to zero, and one
    /// phase accompanies each increment.
    pub fn new(delta_p: Vec<S>, u: ComplexMatrix<S>, phases: Vec<S>) -> Result<Self> {
        let dev = u.unitary_deviation();
        let tol = S::of(crate::DEFAULT_TOL);
        if dev > tol {
            return Err(Error::NotUnitary {
                deviation: dev.as_f64(),
            });
        }
        if phases.len() != delta_p.len() {
            return Err(Error::DimensionMismatch {
                left: delta_p.len(),
                right: phases.len(),
            });
        }
        let total: S = delta_p.iter().copied().sum();
        if total.abs() > tol {
            return Err(Error::InvalidStep(format!(
                "probability increments sum to {}, not 0",
                total.as_f64()
            )));
        }
        Ok(Self { delta_p, u, phases })
    }

    pub fn delta_p(&self) -> &[S] {
        &self.delta_p
    }

    pub fn u(&self) -> &ComplexMatrix<S> {
        &self.u
    }

    pub fn phases(&self) -> &[S] {
        &self.phases
    }
}

/// The purification `|Ψ⟩ = Σ_k √p_k |n_k⟩ ⊗ |a_k⟩` entering through the
/// 0-beam; the ancilla dimension equals the rank.
pub fn purified_input<S: Scalar>(
    decomp: &SpectralDecomposition<S>,
) -> Result<InterferometerState<S>> {
    let mass = decomp.total_mass();
    if (mass - S::one()).abs() > S::of(crate::DEFAULT_TOL) {
        return Err(Error::InvalidState(format!(
            "purification needs total probability 1, got {}",
            mass.as_f64()
        )));
    }
    let n = decomp.dim();
    let rank = decomp.rank();
    let mut amps = vec![Complex::new(S::zero(), S::zero()); 2 * n * rank];
    for k in 0..rank {
        let weight = Complex::new(decomp.probs()[k].sqrt(), S::zero());
        let n_k = decomp.vector(k);
        for (i, &e) in n_k.iter().enumerate() {
            amps[i * rank + k] = e * weight;
        }
    }
    InterferometerState::new(amps, n, rank)
}

/// Applies the two arms to a split purified state: the 0-beam component,
/// which must lie in the span of `{|n_k⟩⊗|a_k⟩}`, is mapped branchwise to
/// `√((p_k+δp_k)/p_k)·U|n_k⟩⊗|a_k⟩`; the 1-beam gets the phase shifter.
pub fn apply_arms<S: Scalar>(
    state: &InterferometerState<S>,
    decomp: &SpectralDecomposition<S>,
    step: &NonunitaryStep<S>,
) -> Result<InterferometerState<S>> {
    let n = decomp.dim();
    let rank = decomp.rank();
    if state.internal_dim() != n || step.u.dim() != n {
        return Err(Error::DimensionMismatch {
            left: state.internal_dim(),
            right: n,
        });
    }
    if state.ancilla_dim() != rank || step.delta_p.len() != rank {
        return Err(Error::RankMismatch {
            left: rank,
            right: if state.ancilla_dim() != rank {
                state.ancilla_dim()
            } else {
                step.delta_p.len()
            },
        });
    }
    for (k, &dp) in step.delta_p.iter().enumerate() {
        let shifted = decomp.probs()[k] + dp;
        if shifted < -S::of(crate::DEFAULT_TOL) || shifted > S::one() + S::of(crate::DEFAULT_TOL) {
            return Err(Error::InvalidStep(format!(
                "branch {k} probability {} leaves [0, 1]",
                shifted.as_f64()
            )));
        }
    }

    // Branch coefficients of the 0-beam component in the purified basis.
    let vectors: Vec<&[Complex<S>]> = (0..rank).map(|k| decomp.vector(k)).collect();
    let mut coeffs = Vec::with_capacity(rank);
    for (k, n_k) in vectors.iter().enumerate() {
        let mut c = Complex::new(S::zero(), S::zero());
        for (i, &e) in n_k.iter().enumerate() {
            c += e.conj() * state.amplitude(0, i, k);
        }
        coeffs.push(c);
    }

    let mut out = state.clone();
    let zero = Complex::new(S::zero(), S::zero());
    for i in 0..n {
        for a in 0..rank {
            let idx = out.index(0, i, a);
            out.amps[idx] = zero;
        }
    }
    let mut residual_sq = state.beam_probability(0)?;
    for (k, n_k) in vectors.iter().enumerate() {
        residual_sq -= coeffs[k].norm_sqr();
        let scale =
            ((decomp.probs()[k] + step.delta_p[k]).max(S::zero()) / decomp.probs()[k]).sqrt();
        let moved = step.u.apply(n_k);
        let weight = coeffs[k] * Complex::new(scale, S::zero());
        for (i, &e) in moved.iter().enumerate() {
            let idx = out.index(0, i, k);
            out.amps[idx] += weight * e;
        }
    }
    if residual_sq.abs() > S::of(crate::DEFAULT_TOL) {
        return Err(Error::InvalidState(format!(
            "0-beam component leaves the purified span by {}",
            residual_sq.abs().as_f64()
        )));
    }

    let v = phase_shifter(decomp, &step.phases)?;
    out.apply_internal(1, &v)
}

/// Full purified run: prepare `|0⟩⊗|Ψ⟩`, split, apply the arms, recombine.
/// Returns `P0` and the output state.
///
/// With per-branch maximizing phases,
/// `1 − P0 = ¼[ΔĒ²δt² + ¼Σ_k δp_k²/p_k]` up to higher order.
pub fn run_purified<S: Scalar>(
    decomp: &SpectralDecomposition<S>,
    step: &NonunitaryStep<S>,
) -> Result<(S, InterferometerState<S>)> {
    let input = purified_input(decomp)?;
    let split = beam_splitter(&input);
    let acted = apply_arms(&split, decomp, step)?;
    let output = recombine(&acted);
    let p0 = output.beam_probability(0)?;
    Ok((p0, output))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::dispersions;
    use crate::matrix::pauli_x;
    use crate::sample::{random_density, random_hermitian, random_unitary};
    use num_complex::Complex64;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn qubit_state(c0: Complex64, c1: Complex64) -> InterferometerState<f64> {
        let norm = (c0.norm_sqr() + c1.norm_sqr()).sqrt();
        InterferometerState::pure_input(&[c0 / norm, c1 / norm]).unwrap()
    }

    #[test]
    fn beam_splitter_splits_evenly() {
        let state = qubit_state(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let split = beam_splitter(&state);
        assert!((split.beam_probability(0).unwrap() - 0.5).abs() < 1e-14);
        assert!((split.beam_probability(1).unwrap() - 0.5).abs() < 1e-14);
        assert!((split.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn beam_splitter_twice_flips_beam_with_sign() {
        let mut rng = StdRng::seed_from_u64(41);
        let c0 = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        let c1 = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        let state = qubit_state(c0, c1);
        let twice = beam_splitter(&beam_splitter(&state));
        // The splitter squares to |0⟩→|1⟩, |1⟩→−|0⟩.
        for n in 0..2 {
            let before0 = state.amplitude(0, n, 0);
            let before1 = state.amplitude(1, n, 0);
            assert!((twice.amplitude(1, n, 0) - before0).norm() < 1e-14);
            assert!((twice.amplitude(0, n, 0) + before1).norm() < 1e-14);
        }
    }

    #[test]
    fn recombine_inverts_beam_splitter() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..20 {
            let c0 = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let c1 = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let state = qubit_state(c0, c1);
            let back = recombine(&beam_splitter(&state));
            for (x, y) in back.amps.iter().zip(&state.amps) {
                assert!((x - y).norm() < 1e-14);
            }
            assert!((beam_splitter(&state).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn run_unitary_identity_interference() {
        let rho = DensityOperator::<f64>::diagonal(&[0.7, 0.3]).unwrap();
        let h = pauli_x::<f64>().scale_re(0.5);
        let (p0, p1) = run_unitary(&rho, &h, 0.0, &[0.0, 0.0]).unwrap();
        assert!((p0 - 1.0).abs() < 1e-14);
        assert!(p1.abs() < 1e-14);
    }

    #[test]
    fn run_unitary_commuting_with_matched_phases() {
        // H diagonal in the state's own basis: choosing f_k to follow each
        // branch's dynamical phase restores full constructive interference.
        let rho = DensityOperator::<f64>::diagonal(&[0.7, 0.3]).unwrap();
        let h = crate::matrix::pauli_z::<f64>().scale_re(0.65);
        let dt = 0.37;
        let decomp = decompose(&rho, 1e-12, 1e-9).unwrap();
        let u = unitary_exp(&h, dt).unwrap();
        let phases: Vec<f64> = (0..2)
            .map(|k| {
                let n_k = decomp.vector(k);
                let z = inner(n_k, &u.apply(n_k));
                z.im.atan2(z.re)
            })
            .collect();
        let (p0, _) = run_unitary(&rho, &h, dt, &phases).unwrap();
        assert!((p0 - 1.0).abs() < 1e-12, "P0 = {p0}");
    }

    #[test]
    fn run_unitary_matches_closed_form() {
        let mut rng = StdRng::seed_from_u64(43);
        for trial in 0..60 {
            let dim = 2 + trial % 3;
            let rho = random_density::<f64>(dim, 5e-2, &mut rng);
            let h = random_hermitian(dim, &mut rng);
            let phases: Vec<f64> = (0..dim)
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect();
            let dt = 0.1;
            let (p0, p1) = run_unitary(&rho, &h, dt, &phases).unwrap();
            let decomp = decompose(&rho, 1e-12, 1e-9).unwrap();
            let u = unitary_exp(&h, dt).unwrap();
            let predicted = p0_closed_form(&decomp, &u, &phases).unwrap();
            assert!((p0 - predicted).abs() < 1e-12, "trial {trial}");
            assert!((p0 + p1 - 1.0).abs() < 1e-12, "trial {trial}");
        }
    }

    #[test]
    fn maximize_p0_identity() {
        let rho = DensityOperator::<f64>::diagonal(&[0.8, 0.2]).unwrap();
        let h = pauli_x::<f64>().scale_re(0.5);
        let (p0max, fstar) = maximize_p0(&rho, &h, 0.0).unwrap();
        assert!((p0max - 1.0).abs() < 1e-14);
        for f in fstar {
            assert!(f.abs() < 1e-14);
        }
    }

    #[test]
    fn maximize_p0_reads_out_energy_dispersion() {
        let rho = DensityOperator::<f64>::diagonal(&[0.8, 0.2]).unwrap();
        let h = pauli_x::<f64>().scale_re(0.5);
        let report = dispersions(&rho, &h).unwrap();
        assert!((report.avg_dispersion_sq - 0.25).abs() < 1e-12);
        let dt = 0.01;
        let (p0max, _) = maximize_p0(&rho, &h, dt).unwrap();
        let drop = 1.0 - p0max;
        let predicted = 0.25 * report.avg_dispersion_sq * dt * dt;
        assert!((drop - 6.25e-6).abs() < 2e-8, "drop {drop:.3e}");

        // Halving the exposure: the defect against ¼ΔĒ²δt² falls at least
        // cubically.
        let res = |t: f64| {
            let (p, _) = maximize_p0(&rho, &h, t).unwrap();
            ((1.0 - p) - 0.25 * report.avg_dispersion_sq * t * t).abs()
        };
        let _ = predicted;
        let ratio = res(0.02) / res(0.01);
        assert!(ratio > 6.0, "residual ratio {ratio}");
    }

    #[test]
    fn maximize_p0_never_beaten_by_grid() {
        let mut rng = StdRng::seed_from_u64(44);
        let rho = random_density::<f64>(2, 5e-2, &mut rng);
        let h = random_hermitian(2, &mut rng);
        let dt = 0.4;
        let (p0max, fstar) = maximize_p0(&rho, &h, dt).unwrap();
        let (attained, _) = run_unitary(&rho, &h, dt, &fstar).unwrap();
        assert!((attained - p0max).abs() < 1e-12);
        let steps = 60;
        for i in 0..steps {
            for j in 0..steps {
                let f = [
                    std::f64::consts::TAU * (i as f64 / steps as f64),
                    std::f64::consts::TAU * (j as f64 / steps as f64),
                ];
                let (p0, _) = run_unitary(&rho, &h, dt, &f).unwrap();
                assert!(p0 <= p0max + 1e-12, "grid beat the maximum at {f:?}");
            }
        }
    }

    #[test]
    fn maximize_p0_rejects_vanishing_overlap() {
        let rho = DensityOperator::<f64>::diagonal(&[0.8, 0.2]).unwrap();
        let h = pauli_x::<f64>().scale_re(0.5);
        // exp(−iσx·π/2) has zero diagonal in the computational basis.
        let result = maximize_p0(&rho, &h, std::f64::consts::PI);
        assert!(matches!(result, Err(Error::VanishingOverlap { .. })));
    }

    #[test]
    fn visibility_quotient_converges_to_dispersion() {
        let mut rng = StdRng::seed_from_u64(45);
        let rho = random_density::<f64>(3, 5e-2, &mut rng);
        let h = random_hermitian(3, &mut rng);
        let report = dispersions(&rho, &h).unwrap();
        let quotient = |dt: f64| {
            let (p0max, _) = maximize_p0(&rho, &h, dt).unwrap();
            4.0 * (1.0 - p0max) / (dt * dt)
        };
        let e1 = (quotient(0.02) - report.avg_dispersion_sq).abs();
        let e2 = (quotient(0.01) - report.avg_dispersion_sq).abs();
        let ratio = e1 / e2;
        assert!((3.0..5.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn purified_identity_run() {
        let rho = DensityOperator::<f64>::diagonal(&[0.8, 0.2]).unwrap();
        let decomp = decompose(&rho, 1e-12, 1e-9).unwrap();
        let step = NonunitaryStep::new(vec![0.0, 0.0], ComplexMatrix::identity(2), vec![0.0, 0.0])
            .unwrap();
        let (p0, out) = run_purified(&decomp, &step).unwrap();
        assert!((p0 - 1.0).abs() < 1e-14);
        assert!((out.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn purified_reproduces_unitary_at_zero_shift() {
        let mut rng = StdRng::seed_from_u64(46);
        for trial in 0..30 {
            let dim = 2 + trial % 3;
            let rho = random_density::<f64>(dim, 5e-2, &mut rng);
            let h = random_hermitian(dim, &mut rng);
            let dt = rng.gen_range(0.05..0.5);
            let phases: Vec<f64> = (0..dim)
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect();
            let (p0_unitary, _) = run_unitary(&rho, &h, dt, &phases).unwrap();
            let decomp = decompose(&rho, 1e-12, 1e-9).unwrap();
            let step =
                NonunitaryStep::new(vec![0.0; dim], unitary_exp(&h, dt).unwrap(), phases).unwrap();
            let (p0_purified, out) = run_purified(&decomp, &step).unwrap();
            assert!(
                (p0_unitary - p0_purified).abs() < 1e-12,
                "trial {trial}: {p0_unitary} vs {p0_purified}"
            );
            assert!((out.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn purified_probability_shift_series() {
        // U = 1, δp = (+ε, −ε) on (0.8, 0.2): the defect is the classical
        // term (1/16)Σδp²/p = (1/16)ε²(1/0.8 + 1/0.2) up to O(ε³).
        let rho = DensityOperator::<f64>::diagonal(&[0.8, 0.2]).unwrap();
        let decomp = decompose(&rho, 1e-12, 1e-9).unwrap();
        let eps = 1e-3;
        let step = NonunitaryStep::new(vec![eps, -eps], ComplexMatrix::identity(2), vec![0.0, 0.0])
            .unwrap();
        let (p0, _) = run_purified(&decomp, &step).unwrap();
        let predicted = eps * eps * (1.0 / 0.8 + 1.0 / 0.2) / 16.0;
        assert!((predicted - 3.90625e-7).abs() < 1e-17);
        assert!(
            ((1.0 - p0) - predicted).abs() < 1e-8,
            "defect {:.6e} vs {predicted:.6e}",
            1.0 - p0
        );
    }

    #[test]
    fn purified_reduced_state_after_arms() {
        let mut rng = StdRng::seed_from_u64(47);
        let rho = random_density::<f64>(3, 5e-2, &mut rng);
        let decomp = decompose(&rho, 1e-12, 1e-9).unwrap();
        let u = random_unitary(3, &mut rng);
        let delta_p = vec![0.04, -0.015, -0.025];
        let step = NonunitaryStep::new(delta_p.clone(), u.clone(), vec![0.1, 0.2, 0.3]).unwrap();
        let split = beam_splitter(&purified_input(&decomp).unwrap());
        let acted = apply_arms(&split, &decomp, &step).unwrap();
        let reduced = acted.reduced_internal(0).unwrap();
        // The conditional 0-beam state is U Σ(p+δp)|n⟩⟨n| U†.
        let mut expected = ComplexMatrix::<f64>::zeros(3);
        for k in 0..3 {
            let moved = u.apply(decomp.vector(k));
            expected.add_scaled_outer(decomp.probs()[k] + delta_p[k], &moved);
        }
        let diff = &reduced - &expected;
        assert!(diff.max_abs() < 1e-12, "deviation {:.3e}", diff.max_abs());
    }

    #[test]
    fn purified_combined_defect_matches_both_terms() {
        // Both contributions at once: a small unitary rotation plus a small
        // probability shift, with maximizing phases.
        let rho = DensityOperator::<f64>::diagonal(&[0.8, 0.2]).unwrap();
        let h = pauli_x::<f64>().scale_re(0.5);
        let dt = 2e-3;
        let eps = 1e-3;
        let decomp = decompose(&rho, 1e-12, 1e-9).unwrap();
        let (_, fstar) = maximize_p0(&rho, &h, dt).unwrap();
        let step =
            NonunitaryStep::new(vec![eps, -eps], unitary_exp(&h, dt).unwrap(), fstar).unwrap();
        let (p0, _) = run_purified(&decomp, &step).unwrap();
        let report = dispersions(&rho, &h).unwrap();
        let predicted = 0.25
            * (report.avg_dispersion_sq * dt * dt + 0.25 * (eps * eps / 0.8 + eps * eps / 0.2));
        let defect = 1.0 - p0;
        assert!(
            (defect - predicted).abs() < 1e-8,
            "defect {defect:.6e} vs {predicted:.6e}"
        );
    }

    #[test]
    fn nonunitary_step_validation() {
        assert!(matches!(
            NonunitaryStep::<f64>::new(vec![0.1, 0.0], ComplexMatrix::identity(2), vec![0.0, 0.0]),
            Err(Error::InvalidStep(_))
        ));
        let lopsided = ComplexMatrix::<f64>::from_fn(2, |i, j| {
            Complex::new(if i == j { 2.0 } else { 0.0 }, 0.0)
        });
        assert!(matches!(
            NonunitaryStep::new(vec![0.0, 0.0], lopsided, vec![0.0, 0.0]),
            Err(Error::NotUnitary { .. })
        ));
        assert!(matches!(
            NonunitaryStep::<f64>::new(vec![0.0, 0.0], ComplexMatrix::identity(2), vec![0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn purified_rejects_probability_violations() {
        let rho = DensityOperator::<f64>::diagonal(&[0.8, 0.2]).unwrap();
        let decomp = decompose(&rho, 1e-12, 1e-9).unwrap();
        let step = NonunitaryStep::new(vec![0.3, -0.3], ComplexMatrix::identity(2), vec![0.0, 0.0])
            .unwrap();
        // Branch 1 would end up at 0.2 − 0.3 < 0.
        assert!(matches!(
            run_purified(&decomp, &step),
            Err(Error::InvalidStep(_))
        ));
    }

    #[test]
    fn stages_preserve_norm() {
        let mut rng = StdRng::seed_from_u64(48);
        for _ in 0..40 {
            let rho = random_density::<f64>(3, 5e-2, &mut rng);
            let decomp = decompose(&rho, 1e-12, 1e-9).unwrap();
            let u = random_unitary(3, &mut rng);
            let step = NonunitaryStep::new(
                vec![0.01, 0.01, -0.02],
                u,
                vec![
                    rng.gen_range(0.0..std::f64::consts::TAU),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                ],
            )
            .unwrap();
            let input = purified_input(&decomp).unwrap();
            assert!((input.norm() - 1.0).abs() < 1e-12);
            let split = beam_splitter(&input);
            assert!((split.norm() - 1.0).abs() < 1e-12);
            let acted = apply_arms(&split, &decomp, &step).unwrap();
            assert!((acted.norm() - 1.0).abs() < 1e-12);
            let out = recombine(&acted);
            assert!((out.norm() - 1.0).abs() < 1e-12);
        }
    }
}

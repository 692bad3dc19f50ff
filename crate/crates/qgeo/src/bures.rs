//! Distance minimized over *all* decompositions, not just phases: the
//! overlap-matrix route to the Bures line element and its equivalence with
//! the Uhlmann fidelity.
//!
//! Each density operator admits a family of non-spectral decompositions
//! obtained by mixing branches with a unitary `V`. Minimizing the tuple
//! distance over the second `V` amounts to a polar decomposition of the
//! overlap matrix `M_kl = √(p_k q_l)⟨n_k|m_l⟩`, giving `Σp + Σq − 2 Tr|M|`.
//! That equals the fidelity route `2 − 2 Tr√(√ρ σ √ρ)` and can never exceed
//! the phase-only (spectral) line element.

use crate::error::{Error, Result};
use crate::matrix::{inner, matrix_sqrt_psd, polar_unitary, ComplexMatrix};
use crate::scalar::Scalar;
use crate::state::{DensityOperator, SpectralDecomposition};

/// Cross-Gram matrix of two decompositions with probability weights folded
/// in: `M_kl = √(p_k q_l)·⟨n_k|m_l⟩`. Satisfies `Tr(MM†) = Tr(ρσ) ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix<S> {
    matrix: ComplexMatrix<S>,
}

impl<S: Scalar> OverlapMatrix<S> {
    pub fn matrix(&self) -> &ComplexMatrix<S> {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.matrix.dim()
    }

    /// Sum of the singular values, `Tr|M|`.
    pub fn trace_abs(&self) -> Result<S> {
        let (abs_m, _) = polar_unitary(&self.matrix)?;
        Ok(abs_m.trace().re)
    }
}

/// The weighted cross-Gram matrix of `a` against `b`.
///
/// No branch matching is involved; all `rank²` overlaps enter.
pub fn overlap_matrix<S: Scalar>(
    a: &SpectralDecomposition<S>,
    b: &SpectralDecomposition<S>,
) -> Result<OverlapMatrix<S>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    if a.rank() != b.rank() {
        return Err(Error::RankMismatch {
            left: a.rank(),
            right: b.rank(),
        });
    }
    let r = a.rank();
    let mut m = ComplexMatrix::zeros(r);
    for k in 0..r {
        for l in 0..r {
            let w = (a.probs()[k] * b.probs()[l]).sqrt();
            m[(k, l)] = inner(a.vector(k), b.vector(l)) * w;
        }
    }
    Ok(OverlapMatrix { matrix: m })
}

/// Squared distance minimized over all decompositions of the second state:
/// `Σp + Σq − 2·Tr|M|`. Symmetric and never negative.
pub fn bures_line_element_sq<S: Scalar>(
    a: &SpectralDecomposition<S>,
    b: &SpectralDecomposition<S>,
) -> Result<S> {
    let m = overlap_matrix(a, b)?;
    let t = m.trace_abs()?;
    Ok((a.total_mass() + b.total_mass() - (t + t)).max(S::zero()))
}

/// Uhlmann fidelity `Tr√(√ρ σ √ρ)`, clamped into `[0, 1]`.
pub fn uhlmann_fidelity<S: Scalar>(
    rho: &DensityOperator<S>,
    sigma: &DensityOperator<S>,
) -> Result<S> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let tol = S::of(crate::DEFAULT_TOL);
    let root = matrix_sqrt_psd(rho.matrix(), tol)?;
    let inner_m = (&(&root * sigma.matrix()) * &root).hermitized();
    let f = matrix_sqrt_psd(&inner_m, tol)?.trace().re;
    Ok(f.max(S::zero()).min(S::one()))
}

/// Squared distance between the `V_a`-rotated decomposition of the first
/// state and the `V_b`-rotated decomposition of the second:
/// `Σp + Σq − 2·Re Tr[M V_b V_a†]`.
///
/// Minimizing over `V_b` at fixed `V_a` recovers `bures_line_element_sq`;
/// the minimum sits at `V_b = U† V_a` with `U` the polar unitary of `M`.
pub fn decomposition_distance_general<S: Scalar>(
    a: &SpectralDecomposition<S>,
    b: &SpectralDecomposition<S>,
    v_a: &ComplexMatrix<S>,
    v_b: &ComplexMatrix<S>,
) -> Result<S> {
    let m = overlap_matrix(a, b)?;
    let r = m.rank();
    let tol = S::of(crate::DEFAULT_TOL);
    for v in [v_a, v_b] {
        if v.dim() != r {
            return Err(Error::DimensionMismatch {
                left: r,
                right: v.dim(),
            });
        }
        let dev = v.unitary_deviation();
        if dev > tol {
            return Err(Error::NotUnitary {
                deviation: dev.as_f64(),
            });
        }
    }
    let cross = (&(m.matrix() * v_b) * &v_a.adjoint()).trace().re;
    Ok((a.total_mass() + b.total_mass() - (cross + cross)).max(S::zero()))
}

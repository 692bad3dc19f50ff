//! Density operators, their spectral decompositions, and gauge-aligned
//! decomposition paths.
//!
//! A decomposition carries the positive spectrum (zero eigenvalues are
//! discarded at `rank_tol`), unit eigenvectors, and one phase per branch.
//! Paths keep a continuous gauge: consecutive vectors of the same branch
//! have real nonnegative overlap, which is the discrete form of parallel
//! transport.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::{eig_hermitian, inner, ComplexMatrix};
use crate::scalar::Scalar;

/// Branch matching refuses to choose between two candidates closer than
/// this in |overlap|; such ties signal a level crossing.
const MATCHING_GAP: f64 = 1e-6;

/// Trace-one, Hermitian, positive semidefinite matrix.
///
/// Validation happens once, at construction; the stored matrix is the
/// Hermitian average of the input, so downstream eigensolves never reject it.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator<S> {
    matrix: ComplexMatrix<S>,
}

impl<S: Scalar> DensityOperator<S> {
    /// Validates Hermiticity, unit trace, and positive semidefiniteness
    /// within `tol`.
    pub fn new(matrix: ComplexMatrix<S>, tol: S) -> Result<Self> {
        let dev = matrix.hermitian_deviation();
        if dev > tol {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {:.3e})",
                dev.as_f64()
            )));
        }
        let tr = matrix.trace();
        let tr_err = (tr - Complex::new(S::one(), S::zero())).norm();
        if tr_err > tol {
            return Err(Error::InvalidState(format!(
                "trace differs from one by {:.3e}",
                tr_err.as_f64()
            )));
        }
        let hermitized = matrix.hermitized();
        let eig = eig_hermitian(&hermitized, tol)?;
        if let Some(&min) = eig.values.first() {
            if min < -tol {
                return Err(Error::InvalidState(format!(
                    "not positive semidefinite (minimum eigenvalue {:.3e})",
                    min.as_f64()
                )));
            }
        }
        Ok(Self { matrix: hermitized })
    }

    /// Diagonal density operator from a probability vector.
    pub fn diagonal(probs: &[S]) -> Result<Self> {
        Self::new(ComplexMatrix::diagonal(probs), S::of(crate::DEFAULT_TOL))
    }

    /// Wraps a matrix known to be a valid state by construction
    /// (e.g. a unitary conjugation of one). The Hermitian average is stored.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix<S>) -> Self {
        Self {
            matrix: matrix.hermitized(),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix<S> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Spectral decomposition of a density operator: positive probabilities,
/// unit eigenvectors, and a phase per branch.
///
/// `decompose` returns probabilities in descending order; alignment along a
/// path reorders branches to follow the previous point instead.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition<S> {
    probs: Vec<S>,
    vectors: Vec<Vec<Complex<S>>>,
    phases: Vec<S>,
    dim: usize,
}

impl<S: Scalar> SpectralDecomposition<S> {
    /// Builds a decomposition from explicit parts.
    ///
    /// Probabilities must be positive with total mass at most one, vectors
    /// orthonormal within the default tolerance. Branch order is taken as
    /// given (no sorting), so equal probabilities are allowed here even
    /// though `decompose` rejects them as degenerate.
    pub fn new(
        probs: Vec<S>,
        vectors: Vec<Vec<Complex<S>>>,
        phases: Vec<S>,
        dim: usize,
    ) -> Result<Self> {
        if probs.len() != vectors.len() || probs.len() != phases.len() {
            return Err(Error::DimensionMismatch {
                left: probs.len(),
                right: vectors.len().max(phases.len()),
            });
        }
        if probs.is_empty() {
            return Err(Error::InvalidState("empty decomposition".into()));
        }
        let tol = S::of(crate::DEFAULT_TOL);
        let mut mass = S::zero();
        for &p in &probs {
            if p <= S::zero() {
                return Err(Error::InvalidState(format!(
                    "non-positive probability {:.3e}",
                    p.as_f64()
                )));
            }
            mass += p;
        }
        if mass > S::one() + tol {
            return Err(Error::InvalidState(format!(
                "total mass {} exceeds one",
                mass.as_f64()
            )));
        }
        for (j, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: v.len(),
                });
            }
            for (k, w) in vectors.iter().enumerate() {
                let ov = inner(v, w);
                let target = if j == k { S::one() } else { S::zero() };
                if (ov.norm() - target).abs() > tol {
                    return Err(Error::InvalidState(format!(
                        "vectors {j} and {k} are not orthonormal"
                    )));
                }
            }
        }
        let rank = probs.len();
        let mut out = Self {
            probs,
            vectors,
            phases: vec![S::zero(); rank],
            dim,
        };
        out.set_phases(&phases)?;
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        self.probs.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn phases(&self) -> &[S] {
        &self.phases
    }

    pub fn vector(&self, k: usize) -> &[Complex<S>] {
        &self.vectors[k]
    }

    /// Sum of the kept probabilities (one, minus any discarded mass).
    pub fn total_mass(&self) -> S {
        self.probs.iter().copied().sum()
    }

    /// Replaces the stored phases, wrapped into `[0, 2*pi)`.
    pub fn set_phases(&mut self, phases: &[S]) -> Result<()> {
        if phases.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                left: self.rank(),
                right: phases.len(),
            });
        }
        let two_pi = S::PI() + S::PI();
        self.phases = phases
            .iter()
            .map(|&f| {
                let r = f % two_pi;
                if r < S::zero() {
                    r + two_pi
                } else {
                    r
                }
            })
            .collect();
        Ok(())
    }

    /// Multiplies branch `k`'s vector by `exp(i alpha)` (a gauge change).
    pub fn gauge_rotate(&mut self, k: usize, alpha: S) -> Result<()> {
        if k >= self.rank() {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.rank(),
            });
        }
        let z = Complex::from_polar(S::one(), alpha);
        for e in self.vectors[k].iter_mut() {
            *e *= z;
        }
        Ok(())
    }

    /// Reassembles `sum_k p_k |n_k><n_k|` (phases cancel).
    pub fn reconstruct(&self) -> ComplexMatrix<S> {
        let mut m = ComplexMatrix::zeros(self.dim);
        for (k, &p) in self.probs.iter().enumerate() {
            m.add_scaled_outer(p, &self.vectors[k]);
        }
        m
    }
}

/// Spectral decomposition of `rho` keeping eigenvalues above `rank_tol`.
///
/// The kept spectrum must be nondegenerate: consecutive kept eigenvalues
/// closer than `degeneracy_tol` are rejected, because the decomposition
/// (and the metric built on it) is not defined there.
pub fn decompose<S: Scalar>(
    rho: &DensityOperator<S>,
    rank_tol: S,
    degeneracy_tol: S,
) -> Result<SpectralDecomposition<S>> {
    let eig = eig_hermitian(rho.matrix(), S::of(crate::DEFAULT_TOL))?;
    let n = rho.dim();
    let mut probs = Vec::new();
    let mut vectors = Vec::new();
    for k in (0..n).rev() {
        if eig.values[k] > rank_tol {
            probs.push(eig.values[k]);
            vectors.push(eig.vector(k));
        }
    }
    if probs.is_empty() {
        return Err(Error::InvalidState(
            "no eigenvalue above the rank tolerance".into(),
        ));
    }
    for w in probs.windows(2) {
        let gap = w[0] - w[1];
        if gap <= degeneracy_tol {
            return Err(Error::DegenerateSpectrum { gap: gap.as_f64() });
        }
    }
    let rank = probs.len();
    Ok(SpectralDecomposition {
        probs,
        vectors,
        phases: vec![S::zero(); rank],
        dim: n,
    })
}

/// Matches the branches of `next` to those of `prev` and fixes the gauge.
///
/// Branch pairs are assigned greedily by descending |overlap|. The returned
/// decomposition lists `next`'s branches in `prev`'s order, each vector
/// multiplied by the phase that makes its overlap with the corresponding
/// `prev` vector real and nonnegative.
pub fn align_step<S: Scalar>(
    prev: &SpectralDecomposition<S>,
    next: &SpectralDecomposition<S>,
) -> Result<SpectralDecomposition<S>> {
    if prev.dim != next.dim {
        return Err(Error::DimensionMismatch {
            left: prev.dim,
            right: next.dim,
        });
    }
    if prev.rank() != next.rank() {
        return Err(Error::RankMismatch {
            left: prev.rank(),
            right: next.rank(),
        });
    }
    let r = prev.rank();
    let mut overlaps = vec![vec![Complex::new(S::zero(), S::zero()); r]; r];
    for j in 0..r {
        for k in 0..r {
            overlaps[j][k] = inner(&prev.vectors[j], &next.vectors[k]);
        }
    }

    let gap_tol = S::of(MATCHING_GAP);
    if r >= 2 {
        for j in 0..r {
            let mut mags: Vec<S> = overlaps[j].iter().map(|z| z.norm()).collect();
            mags.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
            let gap = mags[0] - mags[1];
            if gap < gap_tol {
                return Err(Error::AmbiguousMatching {
                    branch: j,
                    gap: gap.as_f64(),
                });
            }
        }
    }

    let mut pairs: Vec<(S, usize, usize)> = Vec::with_capacity(r * r);
    for j in 0..r {
        for k in 0..r {
            pairs.push((overlaps[j][k].norm(), j, k));
        }
    }
    pairs.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then((a.1, a.2).cmp(&(b.1, b.2)))
    });
    let mut row_used = vec![false; r];
    let mut col_used = vec![false; r];
    let mut perm = vec![usize::MAX; r];
    for &(_, j, k) in &pairs {
        if !row_used[j] && !col_used[k] {
            row_used[j] = true;
            col_used[k] = true;
            perm[j] = k;
        }
    }

    let mut probs = Vec::with_capacity(r);
    let mut vectors = Vec::with_capacity(r);
    let mut phases = Vec::with_capacity(r);
    for j in 0..r {
        let k = perm[j];
        let z = overlaps[j][k];
        let mag = z.norm();
        let mut v = next.vectors[k].clone();
        if mag > S::zero() {
            let phase = z.conj() / Complex::new(mag, S::zero());
            for e in v.iter_mut() {
                *e *= phase;
            }
        }
        probs.push(next.probs[k]);
        vectors.push(v);
        phases.push(next.phases[k]);
    }
    Ok(SpectralDecomposition {
        probs,
        vectors,
        phases,
        dim: next.dim,
    })
}

/// Decompositions sampled along a strictly increasing grid, with branches
/// matched and gauge-fixed step by step.
#[derive(Debug, Clone)]
pub struct AlignedPath<S> {
    times: Vec<S>,
    decomps: Vec<SpectralDecomposition<S>>,
}

impl<S: Scalar> AlignedPath<S> {
    /// Assembles a path from raw parts, checking the grid and that all
    /// decompositions share one dimension and rank. Gauge continuity is not
    /// enforced here; `check_connection` measures it.
    pub fn new(times: Vec<S>, decomps: Vec<SpectralDecomposition<S>>) -> Result<Self> {
        if times.len() != decomps.len() {
            return Err(Error::DimensionMismatch {
                left: times.len(),
                right: decomps.len(),
            });
        }
        if times.is_empty() {
            return Err(Error::DomainError("empty path".into()));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::DomainError(
                    "grid must be strictly increasing".into(),
                ));
            }
        }
        let dim = decomps[0].dim();
        let rank = decomps[0].rank();
        for (i, d) in decomps.iter().enumerate() {
            if d.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: d.dim(),
                });
            }
            if d.rank() != rank {
                return Err(Error::RankChange {
                    index: i,
                    expected: rank,
                    found: d.rank(),
                });
            }
        }
        Ok(Self { times, decomps })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn time(&self, i: usize) -> S {
        self.times[i]
    }

    pub fn times(&self) -> &[S] {
        &self.times
    }

    pub fn decomp(&self, i: usize) -> &SpectralDecomposition<S> {
        &self.decomps[i]
    }

    pub fn rank(&self) -> usize {
        self.decomps[0].rank()
    }

    pub fn dim(&self) -> usize {
        self.decomps[0].dim()
    }
}

/// Samples `family` on `grid`, decomposes each state, and aligns
/// consecutive decompositions.
///
/// The rank must stay constant along the grid; a change raises `RankChange`
/// with the offending index.
pub fn sample_path<S: Scalar, F>(
    family: F,
    grid: &[S],
    rank_tol: S,
    degeneracy_tol: S,
) -> Result<AlignedPath<S>>
where
    F: Fn(S) -> Result<DensityOperator<S>>,
{
    if grid.is_empty() {
        return Err(Error::DomainError("empty grid".into()));
    }
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::DomainError(
                "grid must be strictly increasing".into(),
            ));
        }
    }
    let mut decomps: Vec<SpectralDecomposition<S>> = Vec::with_capacity(grid.len());
    let mut rank = 0;
    for (idx, &t) in grid.iter().enumerate() {
        let rho = family(t)?;
        let d = decompose(&rho, rank_tol, degeneracy_tol)?;
        if idx == 0 {
            rank = d.rank();
            decomps.push(d);
        } else {
            if d.rank() != rank {
                return Err(Error::RankChange {
                    index: idx,
                    expected: rank,
                    found: d.rank(),
                });
            }
            let aligned = align_step(decomps.last().expect("nonempty"), &d)?;
            decomps.push(aligned);
        }
    }
    AlignedPath::new(grid.to_vec(), decomps)
}

//! Deterministic random generators for fuzz tests and CLI fuzz modes.
//!
//! All functions draw from a caller-supplied RNG, so a fixed seed fixes the
//! entire output.

use num_complex::Complex;
use rand::Rng;

use crate::matrix::{inner, vec_norm, ComplexMatrix};
use crate::scalar::Scalar;
use crate::state::DensityOperator;

fn draw<S: Scalar>(rng: &mut impl Rng) -> S {
    S::of(rng.gen_range(-1.0..1.0))
}

/// Dense matrix with independent entries uniform on the unit square.
pub fn random_matrix<S: Scalar>(dim: usize, rng: &mut impl Rng) -> ComplexMatrix<S> {
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = Complex::new(draw(rng), draw(rng));
        }
    }
    m
}

/// Random Hermitian matrix `(G + G^dagger)/2`.
pub fn random_hermitian<S: Scalar>(dim: usize, rng: &mut impl Rng) -> ComplexMatrix<S> {
    random_matrix(dim, rng).hermitized()
}

/// Haar-like random unitary from Gram-Schmidt on a random dense matrix.
pub fn random_unitary<S: Scalar>(dim: usize, rng: &mut impl Rng) -> ComplexMatrix<S> {
    loop {
        let g = random_matrix::<S>(dim, rng);
        let mut cols: Vec<Vec<Complex<S>>> = Vec::with_capacity(dim);
        let mut ok = true;
        for j in 0..dim {
            let mut v = g.column(j);
            for c in &cols {
                let proj = inner(c, &v);
                for (vi, ci) in v.iter_mut().zip(c.iter()) {
                    *vi -= *ci * proj;
                }
            }
            let norm = vec_norm(&v);
            if norm < S::of(1e-6) {
                ok = false;
                break;
            }
            let inv = S::one() / norm;
            for vi in v.iter_mut() {
                *vi *= inv;
            }
            cols.push(v);
        }
        if ok {
            let mut u = ComplexMatrix::zeros(dim);
            for (j, col) in cols.iter().enumerate() {
                for i in 0..dim {
                    u[(i, j)] = col[i];
                }
            }
            return u;
        }
    }
}

/// Probability vector with pairwise gaps and a floor of at least `min_gap`,
/// sorted descending.
///
/// The tightest such vector is `(d·g, (d−1)·g, …, g)`, so `min_gap` must
/// satisfy `g·d(d+1)/2 < 1`; the remaining mass is spread with descending
/// random increments, which keeps every gap at or above `g`.
pub fn random_probs<S: Scalar>(dim: usize, min_gap: S, rng: &mut impl Rng) -> Vec<S> {
    let base_total = min_gap * S::of((dim * (dim + 1)) as f64 / 2.0);
    assert!(
        base_total < S::one(),
        "min_gap too large for {dim} levels: base mass {} >= 1",
        base_total.as_f64()
    );
    let slack = S::one() - base_total;
    let mut extras: Vec<S> = (0..dim).map(|_| S::of(rng.gen_range(1e-6..1.0))).collect();
    extras.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let total: S = extras.iter().copied().sum();
    (0..dim)
        .map(|k| min_gap * S::of((dim - k) as f64) + slack * extras[k] / total)
        .collect()
}

/// Full-rank density operator with a spectrum separated by at least
/// `min_gap`, in a Haar-like random eigenbasis.
pub fn random_density<S: Scalar>(dim: usize, min_gap: S, rng: &mut impl Rng) -> DensityOperator<S> {
    let p = random_probs(dim, min_gap, rng);
    let u = random_unitary::<S>(dim, rng);
    let mut m = ComplexMatrix::zeros(dim);
    for (k, &pk) in p.iter().enumerate() {
        m.add_scaled_outer(pk, &u.column(k));
    }
    DensityOperator::from_matrix_unchecked(m)
}

//! Dense complex linear algebra for small Hermitian problems.
//!
//! Everything here is deterministic: the eigensolver is a cyclic Jacobi
//! iteration with a fixed sweep order and a fixed eigenvector phase
//! convention, so identical inputs produce bit-identical outputs. Dimensions
//! stay small (at most a few dozen), so dense `O(n^3)` algorithms are used
//! throughout.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_JACOBI_SWEEPS: usize = 64;

/// Square, row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<S> {
    dim: usize,
    data: Vec<Complex<S>>,
}

impl<S: Scalar> ComplexMatrix<S> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::new(S::zero(), S::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::new(S::one(), S::zero());
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<S>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a `dim x dim` matrix from row-major real and imaginary parts.
    pub fn from_parts(dim: usize, re: &[S], im: &[S]) -> Result<Self> {
        if re.len() != dim * dim || im.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: dim * dim,
                right: re.len().max(im.len()),
            });
        }
        Ok(Self {
            dim,
            data: re
                .iter()
                .zip(im.iter())
                .map(|(&r, &i)| Complex::new(r, i))
                .collect(),
        })
    }

    /// Diagonal matrix with the given real entries.
    pub fn diagonal(entries: &[S]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = Complex::new(e, S::zero());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex<S> {
        let mut t = Complex::new(S::zero(), S::zero());
        for i in 0..self.dim {
            t += self[(i, i)];
        }
        t
    }

    pub fn scale(&self, z: Complex<S>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&e| e * z).collect(),
        }
    }

    pub fn scale_re(&self, s: S) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&e| e * s).collect(),
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex<S>]) -> Vec<Complex<S>> {
        assert_eq!(v.len(), self.dim, "vector length must match matrix dim");
        let mut out = vec![Complex::new(S::zero(), S::zero()); self.dim];
        for i in 0..self.dim {
            let mut acc = Complex::new(S::zero(), S::zero());
            for j in 0..self.dim {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<Complex<S>> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &Self) -> Self {
        let n = self.dim;
        let m = other.dim;
        Self::from_fn(n * m, |i, j| self[(i / m, j / m)] * other[(i % m, j % m)])
    }

    /// Hermitian average `(A + A^dagger)/2` with an exactly Hermitian layout.
    pub fn hermitized(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        let half = S::of(0.5);
        for i in 0..n {
            out[(i, i)] = Complex::new(self[(i, i)].re, S::zero());
            for j in (i + 1)..n {
                let z = (self[(i, j)] + self[(j, i)].conj()) * half;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        out
    }

    /// Adds `c * v v^dagger` (real weight) in place, keeping exact Hermitian
    /// symmetry.
    pub fn add_scaled_outer(&mut self, c: S, v: &[Complex<S>]) {
        assert_eq!(v.len(), self.dim, "vector length must match matrix dim");
        let n = self.dim;
        for i in 0..n {
            let d = self[(i, i)].re + (v[i] * v[i].conj()).re * c;
            self[(i, i)] = Complex::new(d, S::zero());
            for j in (i + 1)..n {
                let z = self[(i, j)] + v[i] * v[j].conj() * c;
                self[(i, j)] = z;
                self[(j, i)] = z.conj();
            }
        }
    }

    pub fn frobenius_norm(&self) -> S {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(S::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn max_abs(&self) -> S {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(S::zero(), |a, b| a.max(b))
    }

    fn off_diagonal_norm(&self) -> S {
        let mut acc = S::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    acc += self[(i, j)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    /// Largest entry of `|A - A^dagger|`.
    pub fn hermitian_deviation(&self) -> S {
        let mut dev = S::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Largest entry of `|A^dagger A - 1|`.
    pub fn unitary_deviation(&self) -> S {
        let gram = &self.adjoint() * self;
        let mut dev = S::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let expect = if i == j { S::one() } else { S::zero() };
                dev = dev.max((gram[(i, j)] - Complex::new(expect, S::zero())).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: S) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn is_unitary(&self, tol: S) -> bool {
        self.unitary_deviation() <= tol
    }

    /// Positive semidefiniteness within `tol` (requires Hermiticity within
    /// `tol` as well).
    pub fn is_psd(&self, tol: S) -> Result<bool> {
        if !self.is_hermitian(tol) {
            return Ok(false);
        }
        let eig = eig_hermitian(self, tol)?;
        Ok(eig.values.first().is_none_or(|&min| min >= -tol))
    }
}

impl<S: Scalar> Index<(usize, usize)> for ComplexMatrix<S> {
    type Output = Complex<S>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<S> {
        &self.data[i * self.dim + j]
    }
}

impl<S: Scalar> IndexMut<(usize, usize)> for ComplexMatrix<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<S> {
        &mut self.data[i * self.dim + j]
    }
}

impl<S: Scalar> Add for &ComplexMatrix<S> {
    type Output = ComplexMatrix<S>;
    fn add(self, rhs: &ComplexMatrix<S>) -> ComplexMatrix<S> {
        assert_eq!(self.dim, rhs.dim, "matrix dims must match");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }
}

impl<S: Scalar> Sub for &ComplexMatrix<S> {
    type Output = ComplexMatrix<S>;
    fn sub(self, rhs: &ComplexMatrix<S>) -> ComplexMatrix<S> {
        assert_eq!(self.dim, rhs.dim, "matrix dims must match");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }
}

impl<S: Scalar> Mul for &ComplexMatrix<S> {
    type Output = ComplexMatrix<S>;
    fn mul(self, rhs: &ComplexMatrix<S>) -> ComplexMatrix<S> {
        assert_eq!(self.dim, rhs.dim, "matrix dims must match");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

pub fn pauli_x<S: Scalar>() -> ComplexMatrix<S> {
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 1)] = Complex::new(S::one(), S::zero());
    m[(1, 0)] = Complex::new(S::one(), S::zero());
    m
}

pub fn pauli_y<S: Scalar>() -> ComplexMatrix<S> {
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 1)] = Complex::new(S::zero(), -S::one());
    m[(1, 0)] = Complex::new(S::zero(), S::one());
    m
}

pub fn pauli_z<S: Scalar>() -> ComplexMatrix<S> {
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 0)] = Complex::new(S::one(), S::zero());
    m[(1, 1)] = Complex::new(-S::one(), S::zero());
    m
}

/// Inner product, conjugate-linear in the first argument.
pub fn inner<S: Scalar>(a: &[Complex<S>], b: &[Complex<S>]) -> Complex<S> {
    assert_eq!(a.len(), b.len(), "vector lengths must match");
    let mut acc = Complex::new(S::zero(), S::zero());
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * *y;
    }
    acc
}

pub fn vec_norm<S: Scalar>(v: &[Complex<S>]) -> S {
    v.iter()
        .map(|z| z.norm_sqr())
        .fold(S::zero(), |a, b| a + b)
        .sqrt()
}

/// Eigendecomposition of a Hermitian matrix.
///
/// `values` are ascending; column `k` of `vectors` is the unit eigenvector
/// of `values[k]`, with its largest-magnitude component made real positive
/// (first such component on magnitude ties).
#[derive(Debug, Clone)]
pub struct HermitianEigen<S> {
    pub values: Vec<S>,
    pub vectors: ComplexMatrix<S>,
}

impl<S: Scalar> HermitianEigen<S> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<Complex<S>> {
        self.vectors.column(k)
    }
}

/// Diagonalizes a Hermitian matrix by cyclic Jacobi rotations.
///
/// Rejects inputs whose Hermitian deviation exceeds `tol`; iterates on the
/// Hermitian average. The sweep order over index pairs is fixed, so the
/// result is bit-for-bit reproducible.
pub fn eig_hermitian<S: Scalar>(a: &ComplexMatrix<S>, tol: S) -> Result<HermitianEigen<S>> {
    let n = a.dim();
    let deviation = a.hermitian_deviation();
    if deviation > tol {
        return Err(Error::NotHermitian {
            deviation: deviation.as_f64(),
        });
    }
    let mut m = a.hermitized();
    let mut v = ComplexMatrix::identity(n);

    let scale = m.frobenius_norm();
    if n > 1 && scale > S::zero() {
        let target = S::epsilon() * scale * S::of(n as f64);
        let mut sweeps = 0;
        while m.off_diagonal_norm() > target {
            if sweeps == MAX_JACOBI_SWEEPS {
                return Err(Error::ConvergenceFailure {
                    op: "eig_hermitian",
                    iterations: MAX_JACOBI_SWEEPS,
                });
            }
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut m, &mut v, p, q);
                }
            }
            sweeps += 1;
        }
    }

    let raw: Vec<S> = (0..n).map(|i| m[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        raw[i]
            .partial_cmp(&raw[j])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });

    let mut values = Vec::with_capacity(n);
    let mut vectors = ComplexMatrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        values.push(raw[old_col]);
        let mut col = v.column(old_col);
        fix_phase(&mut col);
        for i in 0..n {
            vectors[(i, new_col)] = col[i];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Annihilates the `(p, q)` entry of Hermitian `m` with a unitary plane
/// rotation, accumulating the rotation into `v`.
fn jacobi_rotate<S: Scalar>(
    m: &mut ComplexMatrix<S>,
    v: &mut ComplexMatrix<S>,
    p: usize,
    q: usize,
) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag == S::zero() {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let tau = (aqq - app) / (mag + mag);
    let t = if tau >= S::zero() {
        S::one() / (tau + (S::one() + tau * tau).sqrt())
    } else {
        S::one() / (tau - (S::one() + tau * tau).sqrt())
    };
    let c = S::one() / (S::one() + t * t).sqrt();
    let s = t * c;
    // Unit phase of the off-diagonal entry; the rotation acts in the plane
    // where that entry has been made real.
    let w = apq.conj() / Complex::new(mag, S::zero());
    let wc = w.conj();
    let n = m.dim();

    for i in 0..n {
        let x = m[(i, p)];
        let y = m[(i, q)];
        m[(i, p)] = x * c - y * w * s;
        m[(i, q)] = x * s + y * w * c;
    }
    for j in 0..n {
        let x = m[(p, j)];
        let y = m[(q, j)];
        m[(p, j)] = x * c - y * wc * s;
        m[(q, j)] = x * s + y * wc * c;
    }
    m[(p, q)] = Complex::new(S::zero(), S::zero());
    m[(q, p)] = Complex::new(S::zero(), S::zero());
    m[(p, p)] = Complex::new(m[(p, p)].re, S::zero());
    m[(q, q)] = Complex::new(m[(q, q)].re, S::zero());

    for i in 0..n {
        let x = v[(i, p)];
        let y = v[(i, q)];
        v[(i, p)] = x * c - y * w * s;
        v[(i, q)] = x * s + y * w * c;
    }
}

/// Multiplies a vector by the unit phase that makes its largest-magnitude
/// component real positive.
fn fix_phase<S: Scalar>(col: &mut [Complex<S>]) {
    let mut best = 0;
    let mut best_mag = S::zero();
    for (i, z) in col.iter().enumerate() {
        let m = z.norm_sqr();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag > S::zero() {
        let z = col[best];
        let mag = z.norm();
        let phase = z.conj() / Complex::new(mag, S::zero());
        for e in col.iter_mut() {
            *e *= phase;
        }
        col[best] = Complex::new(mag, S::zero());
    }
}

/// `sum_k w_k v_k v_k^dagger` over the columns of `vectors`, assembled with
/// exact Hermitian symmetry.
pub(crate) fn weighted_outer_sum<S: Scalar>(
    vectors: &ComplexMatrix<S>,
    weights: &[S],
) -> ComplexMatrix<S> {
    let n = vectors.dim();
    assert_eq!(weights.len(), n, "one weight per column");
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        let mut d = S::zero();
        for (k, &w) in weights.iter().enumerate() {
            d += vectors[(i, k)].norm_sqr() * w;
        }
        out[(i, i)] = Complex::new(d, S::zero());
        for j in (i + 1)..n {
            let mut z = Complex::new(S::zero(), S::zero());
            for (k, &w) in weights.iter().enumerate() {
                z += vectors[(i, k)] * vectors[(j, k)].conj() * w;
            }
            out[(i, j)] = z;
            out[(j, i)] = z.conj();
        }
    }
    out
}

fn complex_outer_sum<S: Scalar>(
    vectors: &ComplexMatrix<S>,
    weights: &[Complex<S>],
) -> ComplexMatrix<S> {
    let n = vectors.dim();
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut z = Complex::new(S::zero(), S::zero());
            for (k, &w) in weights.iter().enumerate() {
                z += vectors[(i, k)] * vectors[(j, k)].conj() * w;
            }
            out[(i, j)] = z;
        }
    }
    out
}

/// Principal square root of a positive semidefinite Hermitian matrix.
///
/// Eigenvalues in `[-tol, 0)` are clamped to zero; anything below `-tol` is
/// rejected as not PSD.
pub fn matrix_sqrt_psd<S: Scalar>(a: &ComplexMatrix<S>, tol: S) -> Result<ComplexMatrix<S>> {
    let eig = eig_hermitian(a, tol)?;
    if let Some(&min) = eig.values.first() {
        if min < -tol {
            return Err(Error::NotPsd {
                min_eigenvalue: min.as_f64(),
            });
        }
    }
    let roots: Vec<S> = eig
        .values
        .iter()
        .map(|&l| if l > S::zero() { l.sqrt() } else { S::zero() })
        .collect();
    Ok(weighted_outer_sum(&eig.vectors, &roots))
}

/// Left polar decomposition `M = |M| U` with `|M| = sqrt(M M^dagger)` and
/// `U` unitary.
///
/// Built from the eigendecomposition of `M^dagger M`; for singular `M` the
/// missing left singular vectors are completed deterministically from the
/// canonical basis, so `U` is always a full unitary.
pub fn polar_unitary<S: Scalar>(
    m: &ComplexMatrix<S>,
) -> Result<(ComplexMatrix<S>, ComplexMatrix<S>)> {
    let n = m.dim();
    let gram = (&m.adjoint() * m).hermitized();
    let eig = eig_hermitian(&gram, S::one())?;
    let sigma: Vec<S> = eig
        .values
        .iter()
        .map(|&l| if l > S::zero() { l.sqrt() } else { S::zero() })
        .collect();
    let sigma_max = sigma.iter().fold(S::zero(), |a, &b| a.max(b));
    let cutoff = sigma_max * S::epsilon() * S::of(n as f64);

    let mut w_cols: Vec<Option<Vec<Complex<S>>>> = vec![None; n];
    for k in 0..n {
        if sigma[k] > cutoff {
            let x = eig.vector(k);
            let mut w = m.apply(&x);
            let inv = S::one() / sigma[k];
            for e in w.iter_mut() {
                *e *= inv;
            }
            w_cols[k] = Some(w);
        }
    }
    // Complete the deficient columns to an orthonormal set: for each, pick
    // the canonical basis vector with the largest residual after projecting
    // out the columns chosen so far.
    for k in 0..n {
        if w_cols[k].is_some() {
            continue;
        }
        let mut best: Option<(S, Vec<Complex<S>>)> = None;
        for cand in 0..n {
            let mut e = vec![Complex::new(S::zero(), S::zero()); n];
            e[cand] = Complex::new(S::one(), S::zero());
            for w in w_cols.iter().flatten() {
                let c = inner(w, &e);
                for (ei, wi) in e.iter_mut().zip(w.iter()) {
                    *ei -= *wi * c;
                }
            }
            let norm = vec_norm(&e);
            if best.as_ref().is_none_or(|(bn, _)| norm > *bn) {
                best = Some((norm, e));
            }
        }
        let (norm, mut e) = best.expect("nonzero dimension");
        let inv = S::one() / norm;
        for ei in e.iter_mut() {
            *ei *= inv;
        }
        w_cols[k] = Some(e);
    }

    let mut w = ComplexMatrix::zeros(n);
    for (k, col) in w_cols.iter().enumerate() {
        let col = col.as_ref().expect("all columns filled");
        for i in 0..n {
            w[(i, k)] = col[i];
        }
    }
    let abs_m = weighted_outer_sum(&w, &sigma);
    let u = &w * &eig.vectors.adjoint();
    Ok((abs_m, u))
}

/// `exp(-i H t)` for Hermitian `H` (hbar = 1), via eigendecomposition.
pub fn unitary_exp<S: Scalar>(h: &ComplexMatrix<S>, t: S) -> Result<ComplexMatrix<S>> {
    let eig = eig_hermitian(h, S::of(crate::DEFAULT_TOL))?;
    let phases: Vec<Complex<S>> = eig
        .values
        .iter()
        .map(|&l| Complex::from_polar(S::one(), -l * t))
        .collect();
    Ok(complex_outer_sum(&eig.vectors, &phases))
}

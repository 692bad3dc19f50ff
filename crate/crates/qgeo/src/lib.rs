//! Geometry along paths of mixed quantum states.
//!
//! The central object is a metric on spectral decompositions of density
//! operators: the squared distance between two nearby decompositions,
//! minimized over the free eigenvector phases, splits into a per-branch
//! projective (Fubini–Study) part plus a classical probability
//! (Fisher–Rao) part. On top of that sit unitary-evolution speed
//! identities, an interferometric read-out of the line element, closed-form
//! qubit geodesics, the Bures/Uhlmann comparison, and thermal response
//! coefficients for magnetic models.
//!
//! Everything is generic over the real scalar type (`f32` or `f64`) through
//! the [`scalar::Scalar`] trait; the `*64` aliases at the crate root cover
//! the common case.
//!
//! ```
//! use qgeo::{Density64, Matrix64};
//!
//! let rho = Density64::diagonal(&[0.8, 0.2]).unwrap();
//! let d = qgeo::state::decompose(&rho, qgeo::DEFAULT_RANK_TOL, qgeo::DEFAULT_DEGENERACY_TOL)
//!     .unwrap();
//! assert_eq!(d.rank(), 2);
//! let _h: Matrix64 = qgeo::matrix::pauli_x();
//! ```

// Index loops are kept where they mirror the subscript notation of the
// formulas, and `!(x > 0)`-style comparisons are deliberate: they reject
// NaN where the suggested rewrite would accept it.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bures;
pub mod dynamics;
pub mod error;
pub mod geodesics;
pub mod interferometry;
pub mod matrix;
pub mod metric;
pub mod sample;
pub mod scalar;
pub mod state;
pub mod thermal;

/// Default tolerance for Hermiticity, unitarity, and PSD validation.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default threshold below which an eigenvalue counts as zero rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;
/// Default minimum gap between kept eigenvalues of a state.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

pub use dynamics::DispersionReport;
pub use error::{Error, Result};
pub use geodesics::{BlochPoint, GeodesicSpec};
pub use interferometry::{InterferometerState, NonunitaryStep};
pub use matrix::{ComplexMatrix, HermitianEigen};
pub use metric::LineElementBreakdown;
pub use scalar::Scalar;
pub use state::{AlignedPath, DensityOperator, SpectralDecomposition};
pub use thermal::{MagneticModel, ThermalState};

/// Double-precision complex matrix.
pub type Matrix64 = ComplexMatrix<f64>;
/// Double-precision density operator.
pub type Density64 = DensityOperator<f64>;
/// Double-precision spectral decomposition.
pub type Decomposition64 = SpectralDecomposition<f64>;
/// Double-precision aligned path.
pub type Path64 = AlignedPath<f64>;

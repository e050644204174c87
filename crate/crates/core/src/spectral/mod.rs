//! Dense complex kernels for atomic norm minimization: steering vectors,
//! Hermitian Toeplitz structure, eigen-shrinkage, PSD truncation,
//! Vandermonde decomposition and amplitude recovery.
//!
//! Matrices are small (N <= 256) and dense; everything here is a pure
//! function of its inputs.

mod amplitudes;
mod eigen;
mod toeplitz;
mod vandermonde;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use amplitudes::{least_squares, recover_amplitudes, recover_amplitudes_at, LineSpectrum, SpectralLine, MAX_CONDITION};
pub use eigen::{
    eig_hermitian, hermitian_part, leading_eigenpairs, numerical_rank, psd_truncate, relative_asymmetry,
    shrink_eigenvalues, EigenPairs, HERMITIAN_TOL, RANK_TOL,
};
pub use toeplitz::{project_to_toeplitz, ToeplitzHermitian};
pub use vandermonde::{vandermonde_decompose, Decomposition, DecompositionStatus};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// Array manifold `a(f)` with entries `exp(j 2 pi f m)`, `m = 0..n`.
pub fn steering_vector(f: f64, n: usize) -> Result<CVector> {
    if !(0.0..1.0).contains(&f) {
        return Err(Error::domain(format!("frequency {f} outside [0, 1)")));
    }
    if n == 0 {
        return Err(Error::domain("steering vector length must be >= 1"));
    }
    Ok(atom(f, n))
}

/// Unchecked steering vector; any real `f` is accepted (the manifold is 1-periodic).
pub(crate) fn atom(f: f64, n: usize) -> CVector {
    DVector::from_fn(n, |m, _| Complex64::from_polar(1.0, 2.0 * PI * f * m as f64))
}

/// Reduce a frequency to the half-open circle `[0, 1)`.
pub fn wrap_frequency(f: f64) -> f64 {
    let w = f.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Circular distance between two normalized frequencies.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

pub(crate) fn check_vector(v: &CVector, what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::domain(format!("{what} must have at least one entry")));
    }
    if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::domain(format!("{what} contains non-finite entries")));
    }
    Ok(())
}

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::CMatrix;
use crate::error::{Error, Result};

/// Maximum relative Frobenius asymmetry accepted as "Hermitian".
pub const HERMITIAN_TOL: f64 = 1e-8;

/// Eigenvalues above `RANK_TOL * largest` count toward the numerical rank.
pub const RANK_TOL: f64 = 1e-9;

/// Eigenpairs of a Hermitian matrix, values sorted descending.
/// Column `i` of `vectors` belongs to `values[i]`.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenPairs {
    /// `V diag(values) V^H` using the given (possibly modified) values.
    pub fn reconstruct_with(&self, values: &[f64]) -> CMatrix {
        let n = self.vectors.nrows();
        let mut out = CMatrix::zeros(n, n);
        for (i, &lambda) in values.iter().enumerate() {
            if lambda == 0.0 {
                continue;
            }
            let v = self.vectors.column(i);
            out.ger(Complex64::new(lambda, 0.0), &v, &v.conjugate(), Complex64::new(1.0, 0.0));
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(&self.values)
    }

    pub fn rank(&self) -> usize {
        numerical_rank(&self.values)
    }
}

/// `||H - H^H||_F / (2 ||H||_F)`; zero for the zero matrix.
pub fn relative_asymmetry(h: &CMatrix) -> f64 {
    let norm = h.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (h - h.adjoint()).norm() / (2.0 * norm)
}

pub fn hermitian_part(h: &CMatrix) -> CMatrix {
    (h + h.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrized first; asymmetry beyond [`HERMITIAN_TOL`]
/// (relative Frobenius) is rejected.
pub fn eig_hermitian(h: &CMatrix) -> Result<EigenPairs> {
    let (rows, cols) = h.shape();
    if rows != cols || rows == 0 {
        return Err(Error::Shape {
            expected: "non-empty square matrix".into(),
            got: format!("{rows}x{cols}"),
        });
    }
    let asymmetry = relative_asymmetry(h);
    if asymmetry > HERMITIAN_TOL || !asymmetry.is_finite() {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(eig_symmetrized(hermitian_part(h)))
}

pub(crate) fn eig_symmetrized(h: CMatrix) -> EigenPairs {
    let n = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    EigenPairs { values, vectors }
}

/// Count of values above `RANK_TOL` times the largest value.
pub fn numerical_rank(values: &[f64]) -> usize {
    let largest = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(largest > 0.0) {
        return 0;
    }
    values.iter().filter(|&&v| v > RANK_TOL * largest).count()
}

/// Soft-thresholds eigenvalues: `max(value - tau, 0)`.
pub fn shrink_eigenvalues(values: &[f64], tau: f64) -> Result<Vec<f64>> {
    if !(tau >= 0.0) {
        return Err(Error::domain(format!("shrinkage threshold must be >= 0, got {tau}")));
    }
    Ok(values.iter().map(|&v| (v - tau).max(0.0)).collect())
}

/// Best PSD approximation of rank at most `r`: keeps the `r` algebraically
/// largest eigenpairs and clamps negative eigenvalues to zero.
pub fn psd_truncate(z: &CMatrix, r: usize) -> Result<CMatrix> {
    let n = z.nrows();
    if r == 0 || r > n {
        return Err(Error::domain(format!("truncation rank {r} outside 1..={n}")));
    }
    let eig = eig_hermitian(z)?;
    let kept: Vec<f64> = eig
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| if i < r { v.max(0.0) } else { 0.0 })
        .collect();
    Ok(hermitian_part(&eig.reconstruct_with(&kept)))
}


/// Eigenpairs of a Hermitian matrix whose eigenvalues exceed `threshold`,
/// by Lanczos iteration with full reorthogonalization.
///
/// `start` seeds the Krylov space. The basis grows until every Ritz pair above
/// the threshold has a residual below `1e-10 ||h||` and the leading Ritz value
/// under the threshold stays under it within its residual; at full dimension
/// the result is exact.
/// Invariant subspaces (breakdowns) are escaped by restarting with a
/// coordinate vector orthogonal to the current basis.
pub fn leading_eigenpairs(h: &CMatrix, threshold: f64, start: &super::CVector) -> EigenPairs {
    use nalgebra::{DMatrix, DVector};

    let n = h.nrows();
    let scale = h.norm().max(f64::MIN_POSITIVE);
    let one = Complex64::new(1.0, 0.0);

    let mut q = CMatrix::zeros(n, n);
    let mut alpha: Vec<f64> = Vec::with_capacity(n);
    let mut beta: Vec<f64> = Vec::with_capacity(n);

    let first = if start.norm() > 0.0 {
        start.clone()
    } else {
        super::CVector::from_element(n, one)
    };
    q.set_column(0, &(first.unscale(first.norm())));
    let mut next_coordinate = 0usize;
    let mut m = 0usize;
    let mut target = n.min(8);

    loop {
        // extend the basis to `target` vectors
        while m < target {
            let qm = q.column(m).into_owned();
            let mut w = h * &qm;
            let a = qm.dotc(&w).re;
            alpha.push(a);
            // full reorthogonalization (twice is enough)
            for _ in 0..2 {
                let basis = q.columns(0, m + 1);
                let coeffs = basis.adjoint() * &w;
                w -= basis * coeffs;
            }
            m += 1;
            if m == n {
                break;
            }
            let b = w.norm();
            if b > 1e-12 * scale {
                beta.push(b);
                q.set_column(m, &w.unscale(b));
            } else {
                // breakdown: continue from a fresh direction orthogonal to the basis
                beta.push(0.0);
                let mut fresh = None;
                while next_coordinate < n {
                    let mut e = super::CVector::zeros(n);
                    e[next_coordinate] = one;
                    next_coordinate += 1;
                    for _ in 0..2 {
                        let basis = q.columns(0, m);
                        let coeffs = basis.adjoint() * &e;
                        e -= basis * coeffs;
                    }
                    if e.norm() > 1e-8 {
                        fresh = Some(e.unscale(e.norm()));
                        break;
                    }
                }
                match fresh {
                    Some(e) => q.set_column(m, &e),
                    None => {
                        // basis already spans the space
                        break;
                    }
                }
            }
        }

        // Rayleigh-Ritz on the tridiagonal matrix
        let tri = DMatrix::<f64>::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if j == i + 1 {
                beta[i]
            } else if i == j + 1 {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(tri);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let residual_beta = if m < n && m <= beta.len() { beta[m - 1] } else { 0.0 };
        let residual = |j: usize| residual_beta * eig.eigenvectors[(m - 1, j)].abs();

        let above: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&j| eig.eigenvalues[j] > threshold)
            .collect();
        let all_converged = above.iter().all(|&j| residual(j) <= 1e-10 * scale);
        // the leading Ritz value below the threshold stays below it within its residual bound
        let has_floor = order
            .iter()
            .find(|&&j| eig.eigenvalues[j] <= threshold)
            .is_some_and(|&j| eig.eigenvalues[j] + residual(j) <= threshold);
        let exhausted = m >= n || residual_beta == 0.0 && next_coordinate >= n;

        if (all_converged && has_floor) || exhausted {
            let basis = q.columns(0, m);
            let values: Vec<f64> = above.iter().map(|&j| eig.eigenvalues[j]).collect();
            let mut vectors = CMatrix::zeros(n, above.len());
            for (c, &j) in above.iter().enumerate() {
                let s = DVector::<Complex64>::from_iterator(
                    m,
                    eig.eigenvectors.column(j).iter().map(|&x| Complex64::new(x, 0.0)),
                );
                vectors.set_column(c, &(basis * s));
            }
            return EigenPairs { values, vectors };
        }
        target = (m + 8).min(n);
    }
}

use num_complex::Complex64;

use nalgebra::{DMatrix, SymmetricEigen};

use super::{CMatrix, CVector, EigenPairs};
use crate::error::{Error, Result};

/// Hermitian Toeplitz matrix stored by its first row `r`:
/// `M[i][j] = r[j - i]` for `j >= i` and `M[i][j] = conj(r[i - j])` below the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzHermitian {
    first_row: Vec<Complex64>,
}

impl ToeplitzHermitian {
    /// Builds from a first row. The diagonal entry must be real; it is rejected
    /// otherwise rather than silently projected.
    pub fn from_first_row(first_row: Vec<Complex64>) -> Result<Self> {
        if first_row.is_empty() {
            return Err(Error::domain("Toeplitz first row must be non-empty"));
        }
        if first_row.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::domain("Toeplitz first row contains non-finite entries"));
        }
        if first_row[0].im != 0.0 {
            return Err(Error::domain(format!(
                "Toeplitz diagonal must be real, got imaginary part {}",
                first_row[0].im
            )));
        }
        Ok(Self { first_row })
    }

    /// `T = sum_k p_k a(f_k) a(f_k)^H`, the Toeplitz matrix generated by
    /// nonnegative powers at the given frequencies.
    pub fn from_atoms(freqs: &[f64], powers: &[f64], n: usize) -> Result<Self> {
        if freqs.len() != powers.len() {
            return Err(Error::Shape {
                expected: format!("{} powers", freqs.len()),
                got: format!("{}", powers.len()),
            });
        }
        if n == 0 {
            return Err(Error::domain("Toeplitz size must be >= 1"));
        }
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        for (&f, &p) in freqs.iter().zip(powers) {
            // (a a^H)[0][k] = exp(-j 2 pi f k)
            for (k, r) in row.iter_mut().enumerate() {
                *r += Complex64::from_polar(p, -2.0 * std::f64::consts::PI * f * k as f64);
            }
        }
        row[0].im = 0.0;
        Self::from_first_row(row)
    }

    pub fn size(&self) -> usize {
        self.first_row.len()
    }

    pub fn first_row(&self) -> &[Complex64] {
        &self.first_row
    }

    pub fn trace(&self) -> f64 {
        self.first_row[0].re * self.size() as f64
    }

    pub fn to_matrix(&self) -> CMatrix {
        let n = self.size();
        CMatrix::from_fn(n, n, |i, j| {
            if j >= i {
                self.first_row[j - i]
            } else {
                self.first_row[i - j].conj()
            }
        })
    }

    /// Matrix-vector product without materializing the matrix.
    pub fn apply(&self, x: &CVector) -> CVector {
        let n = self.size();
        CVector::from_fn(n, |i, _| {
            (0..n)
                .map(|j| {
                    let t = if j >= i {
                        self.first_row[j - i]
                    } else {
                        self.first_row[i - j].conj()
                    };
                    t * x[j]
                })
                .sum()
        })
    }

    /// Adds `shift` to the diagonal.
    /// Full eigendecomposition, eigenvalues descending.
    ///
    /// A Hermitian Toeplitz matrix is centro-Hermitian (`J T J = conj(T)`), so
    /// the sparse unitary `Q = [[I, jI], [J, -jJ]] / sqrt(2)` (with a unit middle
    /// entry for odd sizes) turns it into the real symmetric `Q^H T Q`.
    pub fn eig(&self) -> EigenPairs {
        let n = self.size();
        let t = self.to_matrix();
        let half = n / 2;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let j = Complex64::new(0.0, 1.0);
        // the two nonzero entries of each column of Q
        let column = |c: usize| -> [(usize, Complex64); 2] {
            if c < half {
                [(c, Complex64::new(s, 0.0)), (n - 1 - c, Complex64::new(s, 0.0))]
            } else if c == half && n % 2 == 1 {
                [(c, Complex64::new(1.0, 0.0)), (c, Complex64::new(0.0, 0.0))]
            } else {
                let i = c - half - n % 2;
                [(i, j * s), (n - 1 - i, -j * s)]
            }
        };
        let columns: Vec<_> = (0..n).map(column).collect();
        let mut tq = CMatrix::zeros(n, n);
        for (c, entries) in columns.iter().enumerate() {
            for &(row, q) in entries {
                if q != Complex64::new(0.0, 0.0) {
                    tq.column_mut(c).axpy(q, &t.column(row), Complex64::new(1.0, 0.0));
                }
            }
        }
        let real = DMatrix::<f64>::from_fn(n, n, |r, c| {
            columns[r]
                .iter()
                .map(|&(row, q)| (q.conj() * tq[(row, c)]).re)
                .sum()
        });
        let real = (&real + real.transpose()) * 0.5;
        let eig = SymmetricEigen::new(real);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = CMatrix::zeros(n, n);
        for (out, &i) in order.iter().enumerate() {
            let w = eig.eigenvectors.column(i);
            for (c, entries) in columns.iter().enumerate() {
                for &(row, q) in entries {
                    vectors[(row, out)] += q * w[c];
                }
            }
        }
        EigenPairs { values, vectors }
    }

    pub fn shifted(&self, shift: f64) -> Self {
        let mut row = self.first_row.clone();
        row[0].re += shift;
        Self { first_row: row }
    }
}

/// Orthogonal (Frobenius) projection of a square matrix onto the Hermitian
/// Toeplitz subspace: average each superdiagonal of the Hermitian part.
pub fn project_to_toeplitz(h: &CMatrix) -> Result<ToeplitzHermitian> {
    let (rows, cols) = h.shape();
    if rows != cols || rows == 0 {
        return Err(Error::Shape {
            expected: "non-empty square matrix".into(),
            got: format!("{rows}x{cols}"),
        });
    }
    let n = rows;
    let mut row = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n - k {
            // (h + h^H)/2 at (i, i+k)
            acc += (h[(i, i + k)] + h[(i + k, i)].conj()) * 0.5;
        }
        row.push(acc / (n - k) as f64);
    }
    row[0].im = 0.0;
    ToeplitzHermitian::from_first_row(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::atom;

    #[test]
    fn identity_projects_to_unit_row() {
        let t = project_to_toeplitz(&CMatrix::identity(4, 4)).unwrap();
        assert_eq!(t.first_row()[0], Complex64::new(1.0, 0.0));
        assert!(t.first_row()[1..].iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn diagonal_is_averaged() {
        let mut d = CMatrix::zeros(2, 2);
        d[(0, 0)] = Complex64::new(1.0, 0.0);
        d[(1, 1)] = Complex64::new(3.0, 0.0);
        let t = project_to_toeplitz(&d).unwrap();
        assert_eq!(t.first_row(), &[Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)]);
    }

    #[test]
    fn rank_one_vandermonde_is_fixed() {
        for &f in &[0.0, 0.13, 0.5, 0.91] {
            let a = atom(f, 6);
            let h = &a * a.adjoint();
            let t = project_to_toeplitz(&h).unwrap();
            assert!((t.to_matrix() - &h).norm() < 1e-12);
            let direct = ToeplitzHermitian::from_atoms(&[f], &[1.0], 6).unwrap();
            assert!((direct.to_matrix() - &h).norm() < 1e-12);
        }
    }

    #[test]
    fn apply_matches_dense_product() {
        let t = ToeplitzHermitian::from_atoms(&[0.1, 0.4], &[1.0, 2.5], 5).unwrap();
        let x = atom(0.33, 5);
        assert!((t.apply(&x) - t.to_matrix() * &x).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            project_to_toeplitz(&CMatrix::zeros(2, 3)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn rejects_complex_diagonal() {
        let row = vec![Complex64::new(1.0, 0.5)];
        assert!(ToeplitzHermitian::from_first_row(row).is_err());
    }

    #[test]
    fn real_transform_eig_matches_dense() {
        for n in [1usize, 2, 5, 8, 13, 16] {
            let t = ToeplitzHermitian::from_atoms(&[0.1, 0.43, 0.77], &[2.0, 1.0, 0.3], n)
                .unwrap()
                .shifted(0.05);
            let fast = t.eig();
            let dense = crate::spectral::eig_hermitian(&t.to_matrix()).unwrap();
            for (a, b) in fast.values.iter().zip(&dense.values) {
                assert!((a - b).abs() < 1e-10, "n = {n}");
            }
            assert!((fast.reconstruct() - t.to_matrix()).norm() < 1e-10, "n = {n}");
            let gram = fast.vectors.adjoint() * &fast.vectors;
            assert!((gram - CMatrix::identity(n, n)).norm() < 1e-10, "n = {n}");
        }
    }
}

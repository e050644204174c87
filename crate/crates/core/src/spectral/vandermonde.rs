//! Vandermonde decomposition of PSD Toeplitz matrices by root-MUSIC.
//!
//! The noise subspace `E_n` of `T` defines the null spectrum
//! `a(f)^H E_n E_n^H a(f)`, a Laurent polynomial in `z = exp(j 2 pi f)`.
//! Its roots nearest the unit circle give the frequencies; each one is then
//! refined by a few safeguarded Newton steps on the same null spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::eigen::eig_symmetrized;
use super::{wrap_frequency, CMatrix, EigenPairs, ToeplitzHermitian};
use crate::error::{Error, Result};

/// Roots closer than this (in cycles) are treated as one split multiple root.
const ROOT_MERGE_TOL: f64 = 1e-5;
const ABERTH_MAX_ITERS: usize = 500;
const POLISH_MAX_ITERS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionStatus {
    Ok,
    /// Numerical rank of `T` is below the requested model order.
    RankDeficient { rank: usize },
    /// Eigenvalues `k` and `k+1` coincide, so the signal subspace is not
    /// determined (e.g. a scaled identity).
    NoSubspaceGap,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Recovered frequencies in `[0, 1)`, ascending.
    pub frequencies: Vec<f64>,
    pub status: DecompositionStatus,
    /// Numerical rank of the input.
    pub rank: usize,
}

impl Decomposition {
    pub fn is_ok(&self) -> bool {
        self.status == DecompositionStatus::Ok
    }
}

/// Recovers `k` frequencies from a PSD Toeplitz matrix.
///
/// Degenerate inputs do not fail; they return best-effort frequencies and a
/// warning status.
pub fn vandermonde_decompose(t: &ToeplitzHermitian, k: usize) -> Result<Decomposition> {
    let n = t.size();
    if k == 0 || k >= n {
        return Err(Error::domain(format!(
            "model order {k} must satisfy 1 <= k < N = {n}"
        )));
    }
    let eig = eig_symmetrized(t.to_matrix());
    let rank = eig.rank();
    let status = if rank < k {
        DecompositionStatus::RankDeficient { rank }
    } else if eig.values[k] >= eig.values[k - 1] * (1.0 - super::RANK_TOL) {
        DecompositionStatus::NoSubspaceGap
    } else {
        DecompositionStatus::Ok
    };
    let frequencies = root_music(&eig, k);
    Ok(Decomposition {
        frequencies,
        status,
        rank,
    })
}

fn root_music(eig: &EigenPairs, k: usize) -> Vec<f64> {
    let n = eig.vectors.nrows();
    let signal = eig.vectors.columns(0, k).into_owned();

    // C = I - Es Es^H; c_l = sum over the l-th diagonal of C (l = col - row).
    let proj = CMatrix::identity(n, n) - &signal * signal.adjoint();
    let degree = 2 * (n - 1);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); degree + 1];
    for row in 0..n {
        for col in 0..n {
            // z^(col - row) shifted by n-1 so the polynomial has no negative powers
            coeffs[col + n - 1 - row] += proj[(row, col)];
        }
    }
    // coeffs[i] multiplies z^i
    let roots = polynomial_roots(&coeffs);

    let mut candidates: Vec<(f64, f64)> = roots
        .iter()
        .filter(|z| z.norm() > 0.0 && z.re.is_finite() && z.im.is_finite())
        .map(|z| ((z.norm() - 1.0).abs(), wrap_frequency(z.arg() / (2.0 * PI))))
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut picked: Vec<f64> = Vec::with_capacity(k);
    for &(_, f) in &candidates {
        if picked.len() == k {
            break;
        }
        if picked
            .iter()
            .all(|&g| super::circular_distance(f, g) > ROOT_MERGE_TOL)
        {
            picked.push(f);
        }
    }
    // Degenerate input with too few usable roots: fall back to the largest
    // samples of the signal-subspace spectrum on a uniform grid.
    if picked.len() < k {
        let grid = 8 * n;
        let mut scan: Vec<(f64, f64)> = (0..grid)
            .map(|i| {
                let f = i as f64 / grid as f64;
                (subspace_power(&signal, f).0, f)
            })
            .collect();
        scan.sort_by(|a, b| b.0.total_cmp(&a.0));
        for &(_, f) in &scan {
            if picked.len() == k {
                break;
            }
            if picked.iter().all(|&g| super::circular_distance(f, g) > ROOT_MERGE_TOL) {
                picked.push(f);
            }
        }
    }

    let polished: Vec<f64> = picked.iter().map(|&f| polish(&signal, f)).collect();
    let distinct = polished.iter().enumerate().all(|(i, &a)| {
        polished[i + 1..]
            .iter()
            .all(|&b| super::circular_distance(a, b) > ROOT_MERGE_TOL)
    });
    let mut out = if distinct { polished } else { picked };
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

/// Signal-subspace power `S(f) = ||Es^H a(f)||^2` and its first two derivatives.
fn subspace_power(signal: &CMatrix, f: f64) -> (f64, f64, f64) {
    let n = signal.nrows();
    let (mut s, mut ds, mut dds) = (0.0, 0.0, 0.0);
    for c in 0..signal.ncols() {
        let mut b = Complex64::new(0.0, 0.0);
        let mut db = Complex64::new(0.0, 0.0);
        let mut ddb = Complex64::new(0.0, 0.0);
        for m in 0..n {
            let w = 2.0 * PI * m as f64;
            let term = signal[(m, c)].conj() * Complex64::from_polar(1.0, w * f);
            b += term;
            db += term * Complex64::new(0.0, w);
            ddb += term * (-w * w);
        }
        s += b.norm_sqr();
        ds += 2.0 * (b.conj() * db).re;
        dds += 2.0 * (db.norm_sqr() + (b.conj() * ddb).re);
    }
    (s, ds, dds)
}

/// Newton refinement of a root-MUSIC frequency toward the nearest null of the
/// noise-subspace spectrum; only steps that increase `S(f)` are taken.
fn polish(signal: &CMatrix, f0: f64) -> f64 {
    let n = signal.nrows() as f64;
    let max_step = 0.25 / n;
    let mut f = f0;
    let (mut s, mut ds, mut dds) = subspace_power(signal, f);
    for _ in 0..POLISH_MAX_ITERS {
        if dds >= 0.0 {
            break;
        }
        let mut step = (-ds / dds).clamp(-max_step, max_step);
        if step.abs() < 1e-15 {
            break;
        }
        let mut accepted = false;
        for _ in 0..30 {
            let (s_new, ds_new, dds_new) = subspace_power(signal, f + step);
            if s_new >= s {
                f += step;
                s = s_new;
                ds = ds_new;
                dds = dds_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || step.abs() < 1e-14 {
            break;
        }
    }
    if (f - f0).abs() > max_step {
        return f0;
    }
    wrap_frequency(f)
}

/// All roots of `sum_i coeffs[i] z^i` by Aberth–Ehrlich iteration.
pub(crate) fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let negligible = |c: &Complex64| c.norm() <= scale * 1e-300;
    let lo = coeffs.iter().position(|c| !negligible(c)).unwrap_or(0);
    let hi = coeffs.iter().rposition(|c| !negligible(c)).unwrap_or(0);
    let poly: Vec<Complex64> = coeffs[lo..=hi].iter().map(|c| c / scale).collect();
    let degree = poly.len() - 1;
    if degree == 0 {
        return vec![Complex64::new(0.0, 0.0); lo];
    }

    // Initial guesses spread around a circle of the geometric-mean root radius.
    let radius = (poly[0].norm() / poly[degree].norm()).powf(1.0 / degree as f64);
    let radius = if radius.is_finite() && radius > 0.0 { radius } else { 1.0 };
    let mut z: Vec<Complex64> = (0..degree)
        .map(|i| Complex64::from_polar(radius, 2.0 * PI * i as f64 / degree as f64 + 0.4))
        .collect();

    let eval = |x: Complex64| -> (Complex64, Complex64) {
        let mut p = poly[degree];
        let mut dp = Complex64::new(0.0, 0.0);
        for c in poly[..degree].iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    };

    let mut converged = vec![false; degree];
    for _ in 0..ABERTH_MAX_ITERS {
        let mut all_done = true;
        for i in 0..degree {
            if converged[i] {
                continue;
            }
            let (p, dp) = eval(z[i]);
            // stop once |p(z)| is at the rounding level of the evaluation
            let bound = poly
                .iter()
                .rev()
                .fold(0.0, |acc, c| acc * z[i].norm() + c.norm());
            if p.norm() <= 8.0 * f64::EPSILON * bound {
                converged[i] = true;
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..degree)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let offset = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !offset.re.is_finite() || !offset.im.is_finite() {
                converged[i] = true;
                continue;
            }
            z[i] -= offset;
            if offset.norm() <= 1e-15 * z[i].norm().max(1e-300) {
                converged[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    z.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), lo));
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_known_polynomial() {
        // (z - 1)(z - 2j)(z + 0.5) = z^3 + (-0.5 - 2j) z^2 + (-0.5 + j) z + j
        let coeffs = [
            Complex64::new(0.0, 1.0),
            Complex64::new(-0.5, 1.0),
            Complex64::new(-0.5, -2.0),
            Complex64::new(1.0, 0.0),
        ];
        let roots = polynomial_roots(&coeffs);
        for want in [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(-0.5, 0.0),
        ] {
            assert!(roots.iter().any(|r| (r - want).norm() < 1e-10), "{roots:?}");
        }
    }

    #[test]
    fn single_atom_round_trip() {
        let t = ToeplitzHermitian::from_atoms(&[0.5], &[1.0], 8).unwrap();
        let d = vandermonde_decompose(&t, 1).unwrap();
        assert!(d.is_ok());
        assert!((d.frequencies[0] - 0.5).abs() < 1e-6, "{:?}", d.frequencies);
    }

    #[test]
    fn two_atom_round_trip() {
        let t = ToeplitzHermitian::from_atoms(&[0.2, 0.7], &[1.0, 2.0], 8).unwrap();
        let d = vandermonde_decompose(&t, 2).unwrap();
        assert!(d.is_ok());
        assert!((d.frequencies[0] - 0.2).abs() < 1e-6);
        assert!((d.frequencies[1] - 0.7).abs() < 1e-6);
    }

    #[test]
    fn scaled_identity_warns() {
        let mut row = vec![Complex64::new(0.0, 0.0); 6];
        row[0] = Complex64::new(3.0, 0.0);
        let t = ToeplitzHermitian::from_first_row(row).unwrap();
        let d = vandermonde_decompose(&t, 1).unwrap();
        assert_eq!(d.status, DecompositionStatus::NoSubspaceGap);
        assert_eq!(d.frequencies.len(), 1);
    }

    #[test]
    fn rank_deficient_warns() {
        let t = ToeplitzHermitian::from_atoms(&[0.3], &[1.0], 8).unwrap();
        let d = vandermonde_decompose(&t, 3).unwrap();
        assert_eq!(d.status, DecompositionStatus::RankDeficient { rank: 1 });
        assert_eq!(d.frequencies.len(), 3);
    }

    #[test]
    fn order_must_be_below_size() {
        let t = ToeplitzHermitian::from_atoms(&[0.3], &[1.0], 4).unwrap();
        assert!(vandermonde_decompose(&t, 4).is_err());
        assert!(vandermonde_decompose(&t, 0).is_err());
    }

    #[test]
    fn frequency_near_wrap_point() {
        let t = ToeplitzHermitian::from_atoms(&[0.999_99, 0.4], &[1.0, 1.0], 16).unwrap();
        let d = vandermonde_decompose(&t, 2).unwrap();
        assert!((d.frequencies[0] - 0.4).abs() < 1e-6);
        assert!((d.frequencies[1] - 0.999_99).abs() < 1e-6);
    }
}

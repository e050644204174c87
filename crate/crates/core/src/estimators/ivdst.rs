//! Iterative Vandermonde decomposition and shrinkage-thresholding (IVDST).
//!
//! Each iteration replaces an interior-point solve of the ANM program by
//!
//! 1. momentum extrapolation of the state `(y, v, T)`,
//! 2. a gradient step on the data fit for `y`,
//! 3. an eigendecomposition of the Toeplitz part,
//! 4. soft-thresholding of its eigenvalues,
//! 5. assembly of the bordered matrix `[[tr(L), y^H], [y, T]]`,
//! 6. its best PSD approximation of rank `rank(L) + 1`,
//! 7. and read-back of the new state from the blocks.
//!
//! The Toeplitz block read back in step 7 is not Toeplitz in general. It is
//! projected onto the Hermitian Toeplitz subspace before the next
//! eigendecomposition. The projection is linear, so this commutes with the
//! extrapolation, and the stored iterates keep the exact bordered PSD form.
//!
//! The bordered matrix in step 5 has rank at most `rank(L) + 2`, so step 6 is
//! computed exactly from a small projected eigenproblem.
//!
//! The momentum sequence restarts at `t = 1` whenever the extrapolated point
//! and the step taken from it disagree in direction (gradient restart).
//! Large arrays use a Lanczos solver for the eigenvalues above `tau` in
//! step 3; small ones use a real-symmetric transform of the Toeplitz block.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{extract_spectrum_at, IvdstConfig, SamplingMask, Shrinkage};
use crate::error::{Error, Result};
use crate::spectral::{
    check_vector, eig_hermitian, leading_eigenpairs, project_to_toeplitz, CMatrix, CVector, LineSpectrum,
    ToeplitzHermitian,
};

/// Multiplier on `sigma * sqrt(N ln N)` for the default shrinkage threshold.
pub const SHRINK_SCALE: f64 = 0.25;

/// The state is considered diverged once its norm grows past this factor.
const DIVERGENCE_GROWTH: f64 = 1e6;

/// Iterate `(y, v, T)` after an accepted step; `t` is the raw lower-right
/// block of the truncated bordered matrix.
#[derive(Debug, Clone)]
pub struct IvdstIterate {
    pub iteration: usize,
    pub y: CVector,
    pub v: f64,
    pub t: CMatrix,
    /// Rank kept by the eigenvalue shrinkage.
    pub shrunk_rank: usize,
}

impl IvdstIterate {
    fn norm(&self) -> f64 {
        (self.y.norm_squared() + self.v * self.v + self.t.norm_squared()).sqrt()
    }

    fn distance(&self, other: &IvdstIterate) -> f64 {
        ((&self.y - &other.y).norm_squared()
            + (self.v - other.v).powi(2)
            + (&self.t - &other.t).norm_squared())
        .sqrt()
    }

    /// `[[v, y^H], [y, T]]`
    pub fn bordered(&self) -> CMatrix {
        let n = self.y.len();
        let mut z = CMatrix::zeros(n + 1, n + 1);
        z[(0, 0)] = Complex64::new(self.v, 0.0);
        for i in 0..n {
            z[(i + 1, 0)] = self.y[i];
            z[(0, i + 1)] = self.y[i].conj();
        }
        z.view_mut((1, 1), (n, n)).copy_from(&self.t);
        z
    }
}

#[derive(Debug, Clone)]
pub struct IvdstResult {
    /// Final Toeplitz estimate, PSD.
    pub t: ToeplitzHermitian,
    pub spectrum: LineSpectrum,
    pub iterations: usize,
    pub converged: bool,
    /// Shrinkage threshold actually used.
    pub tau: f64,
    /// Eigenvalues of the Toeplitz block that survived the last shrinkage,
    /// i.e. the number of atoms in the current decomposition.
    pub rank: usize,
}

/// Array sizes below this use a dense eigendecomposition in the shrinkage step.
const DENSE_EIG_MAX: usize = 24;

/// Momentum weights `t_0 = 1`, `t_i = (1 + sqrt(4 t_{i-1}^2 + 1)) / 2`.
pub fn momentum_weights(count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut t = 1.0_f64;
    for _ in 0..count {
        out.push(t);
        t = (1.0 + (4.0 * t * t + 1.0).sqrt()) / 2.0;
    }
    out
}

/// Per-element noise standard deviation estimated from the smallest
/// eigenvalues of the forward-backward smoothed covariance.
///
/// Subarrays have length `L = N/2 + 1` and the smallest `ceil(L/3)`
/// eigenvalues are averaged, which stays clear of the signal subspace for up
/// to `L - ceil(L/3)` lines. Never below `1e-3` of the RMS sample magnitude.
pub fn estimate_noise_sigma(y: &CVector) -> f64 {
    let n = y.len();
    let rms = y.norm() / (n as f64).sqrt();
    let floor = 1e-3 * rms;
    if n < 4 {
        return floor;
    }
    let len = n / 2 + 1;
    let snapshots = n - len + 1;
    let mut r = CMatrix::zeros(len, len);
    for s in 0..snapshots {
        let sub = y.rows(s, len);
        r.ger(Complex64::new(1.0, 0.0), &sub, &sub.conjugate(), Complex64::new(1.0, 0.0));
    }
    // forward-backward average: (R + J conj(R) J) / 2
    let fb = CMatrix::from_fn(len, len, |i, j| {
        (r[(i, j)] + r[(len - 1 - i, len - 1 - j)].conj()) / (2.0 * snapshots as f64)
    });
    let mut values: Vec<f64> = SymmetricEigen::new(fb).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    let count = len.div_ceil(3);
    let mean = values[..count].iter().map(|v| v.max(0.0)).sum::<f64>() / count as f64;
    mean.sqrt().max(floor)
}

/// IVDST-ANM on samples `g` observed at `mask`, extracting `k` lines.
pub fn ivdst_anm(g: &CVector, mask: &SamplingMask, k: usize, cfg: &IvdstConfig) -> Result<IvdstResult> {
    ivdst_anm_observed(g, mask, k, cfg, |_| {})
}

/// As [`ivdst_anm`], calling `observer` with every accepted iterate.
pub fn ivdst_anm_observed(
    g: &CVector,
    mask: &SamplingMask,
    k: usize,
    cfg: &IvdstConfig,
    mut observer: impl FnMut(&IvdstIterate),
) -> Result<IvdstResult> {
    check_vector(g, "observation")?;
    cfg.validate()?;
    if g.len() != mask.observed().len() {
        return Err(Error::Shape {
            expected: format!("{} observed samples", mask.observed().len()),
            got: format!("{}", g.len()),
        });
    }
    let n = mask.ambient_size();
    if k == 0 || k >= n {
        return Err(Error::domain(format!("model order {k} must satisfy 1 <= k < N = {n}")));
    }
    let delta = cfg.step_size;

    // y = P^H g, T = Toep(y y^H), v = tr(T) / N
    let y0 = mask.embed(g);
    let tau = match cfg.shrinkage {
        Shrinkage::Fixed(tau) => tau,
        Shrinkage::NoiseSigma(sigma) => default_tau(delta, sigma, n),
        Shrinkage::Estimated => default_tau(delta, estimate_noise_sigma(&y0), n),
    };
    let t0 = project_to_toeplitz(&(&y0 * y0.adjoint()))?;
    let initial = IvdstIterate {
        iteration: 0,
        v: t0.trace() / n as f64,
        t: t0.to_matrix(),
        y: y0,
        shrunk_rank: 0,
    };
    let initial_norm = initial.norm();

    let mut previous = initial.clone();
    let mut current = initial;
    let mut t_prev = 1.0_f64;
    let mut converged = false;
    let mut iterations = 0;

    if initial_norm > 0.0 {
        for iter in 1..=cfg.max_iters {
            iterations = iter;
            let t_next = (1.0 + (4.0 * t_prev * t_prev + 1.0).sqrt()) / 2.0;
            let beta = (t_prev - 1.0) / t_next;
            t_prev = t_next;

            // 1. extrapolate
            let y_bar = &current.y + (&current.y - &previous.y) * Complex64::new(beta, 0.0);
            let t_bar = &current.t + (&current.t - &previous.t) * Complex64::new(beta, 0.0);

            // 2. gradient step on the data fit
            let residual = mask.sample(&y_bar) - g;
            let y_g = &y_bar - mask.embed(&residual) * Complex64::new(delta, 0.0);

            // 3-4. eigen-shrinkage of the (re-projected) Toeplitz block
            let t_g = project_to_toeplitz(&t_bar)?;
            let eig = if n >= DENSE_EIG_MAX {
                leading_eigenpairs(&t_g.to_matrix(), tau, &y_g)
            } else {
                t_g.eig()
            };
            let kept = eig.values.iter().take_while(|&&lambda| lambda > tau).count();
            // values are sorted descending, so the kept pairs lead
            let basis = eig.vectors.columns(0, kept).into_owned();
            let shrunk: Vec<f64> = eig.values[..kept].iter().map(|&lambda| lambda - tau).collect();

            // 5-7. rank-(r+1) PSD truncation of the bordered matrix, read back
            let next = truncate_bordered(&y_g, &basis, &shrunk, iter)?;

            // adaptive restart: drop the momentum once it points against the step
            let along = (&y_bar - &next.y).dotc(&(&next.y - &current.y)).re
                + (&t_bar - &next.t).dotc(&(&next.t - &current.t)).re;
            if along > 0.0 {
                t_prev = 1.0;
            }
            let change = next.distance(&current);
            let scale = current.norm();
            previous = current;
            current = next;

            let growth = current.norm() / initial_norm;
            if !growth.is_finite() || growth > DIVERGENCE_GROWTH {
                return Err(Error::Divergence {
                    step_size: delta,
                    growth,
                    iterations: iter,
                });
            }
            observer(&current);
            if change <= cfg.rel_tol * scale.max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }
    } else {
        converged = true;
    }

    let t = finalize_toeplitz(&current.t)?;
    let spectrum = extract_spectrum_at(g, mask.observed(), &t, k)?;
    Ok(IvdstResult {
        t,
        spectrum,
        iterations,
        converged,
        tau,
        rank: current.shrunk_rank,
    })
}

fn default_tau(delta: f64, sigma: f64, n: usize) -> f64 {
    let nf = n as f64;
    delta * SHRINK_SCALE * sigma * (nf * nf.ln()).sqrt()
}

/// Best PSD approximation of rank `r + 1` of
/// `Z = [[sum(shrunk), y^H], [y, V diag(shrunk) V^H]]` where `V` (`N x r`) has
/// orthonormal columns.
///
/// `Z` vanishes outside `span{e_0, [0; V], [0; y_perp]}`, so its nonzero
/// spectrum is that of the compression onto this `(r + 2)`-dimensional space.
pub(crate) fn truncate_bordered(
    y: &CVector,
    basis: &CMatrix,
    shrunk: &[f64],
    iteration: usize,
) -> Result<IvdstIterate> {
    let n = y.len();
    let r = shrunk.len();
    let trace: f64 = shrunk.iter().sum();

    let coords = basis.adjoint() * y;
    let perp = y - basis * &coords;
    let perp_norm = perp.norm();
    let use_perp = perp_norm > 1e-14 * y.norm().max(f64::MIN_POSITIVE);

    let mut b = CMatrix::zeros(n, r + usize::from(use_perp));
    b.view_mut((0, 0), (n, r)).copy_from(basis);
    if use_perp {
        b.set_column(r, &(perp / Complex64::new(perp_norm, 0.0)));
    }
    let m = b.ncols();

    // compressed matrix S = Q^H Z Q with Q = blockdiag(1, B)
    let by = b.adjoint() * y;
    let mut s = DMatrix::<Complex64>::zeros(m + 1, m + 1);
    s[(0, 0)] = Complex64::new(trace, 0.0);
    for j in 0..m {
        s[(0, j + 1)] = by[j].conj();
        s[(j + 1, 0)] = by[j];
    }
    for (j, &lambda) in shrunk.iter().enumerate() {
        s[(j + 1, j + 1)] = Complex64::new(lambda, 0.0);
    }

    let eig = crate::spectral::eig_hermitian(&s)?;
    let keep = (r + 1).min(m + 1);
    let values: Vec<f64> = eig
        .values
        .iter()
        .enumerate()
        .map(|(i, &lambda)| if i < keep { lambda.max(0.0) } else { 0.0 })
        .collect();
    let s_trunc = eig.reconstruct_with(&values);

    let lower = s_trunc.view((1, 0), (m, 1)).into_owned();
    let block = s_trunc.view((1, 1), (m, m)).into_owned();
    let y_next = &b * lower.column(0);
    let t_next = &b * block * b.adjoint();
    Ok(IvdstIterate {
        iteration,
        y: y_next,
        v: s_trunc[(0, 0)].re,
        t: crate::spectral::hermitian_part(&t_next),
        shrunk_rank: r,
    })
}

/// Toeplitz projection of the final block, diagonally loaded if needed so the
/// result is PSD (the shift leaves the eigenvectors untouched).
fn finalize_toeplitz(t: &CMatrix) -> Result<ToeplitzHermitian> {
    let projected = project_to_toeplitz(t)?;
    let eig = eig_hermitian(&projected.to_matrix())?;
    let smallest = *eig.values.last().expect("non-empty");
    if smallest < 0.0 {
        Ok(projected.shifted(-smallest))
    } else {
        Ok(projected)
    }
}

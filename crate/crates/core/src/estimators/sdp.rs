//! Atomic norm minimization by its semidefinite program, solved with ADMM.
//!
//! ```text
//! minimize    v + trace(T(u)) / N
//! subject to  [[v, g^H], [g, T(u)]] >= 0
//! ```
//!
//! The splitting alternates between the affine set of bordered matrices with
//! Toeplitz lower-right block (closed form) and the PSD cone (one full
//! eigendecomposition per iteration).

use num_complex::Complex64;

use super::{extract_spectrum, AdmmConfig, AnmState};
use crate::error::{Error, Result};
use crate::spectral::{
    check_vector, eig_hermitian, project_to_toeplitz, CMatrix, CVector, EigenPairs, LineSpectrum,
    ToeplitzHermitian,
};

#[derive(Debug, Clone)]
pub struct SdpAnmResult {
    pub state: AnmState,
    pub spectrum: LineSpectrum,
    /// `v + trace(T) / N` at the returned (feasible) state.
    pub objective: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

/// Solves the ANM program for the observation `g` and extracts `k` spectral lines.
///
/// Fails with [`Error::NotConverged`] (carrying the final residuals) when the
/// tolerances are not met within `cfg.max_iters`.
pub fn sdp_anm(g: &CVector, cfg: &AdmmConfig, k: usize) -> Result<SdpAnmResult> {
    check_vector(g, "observation")?;
    cfg.validate()?;
    let n = g.len();
    if n < 2 {
        return Err(Error::domain("SDP-ANM needs at least 2 samples"));
    }
    if k == 0 || k >= n {
        return Err(Error::domain(format!("model order {k} must satisfy 1 <= k < N = {n}")));
    }

    // The program is positively homogeneous in g; solve at unit RMS amplitude.
    let scale = g.norm() / (n as f64).sqrt();
    if scale == 0.0 {
        let t = ToeplitzHermitian::from_first_row(vec![Complex64::new(0.0, 0.0); n])?;
        return Ok(SdpAnmResult {
            state: AnmState { y: g.clone(), v: 0.0, t },
            spectrum: LineSpectrum::empty(),
            objective: 0.0,
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
        });
    }
    let gs = g.unscale(scale);
    let solved = admm(&gs, cfg)?;

    let (v, t) = make_feasible(&gs, solved.v, &solved.t)?;
    let state = AnmState {
        y: g.clone(),
        v: v * scale,
        t: scale_toeplitz(&t, scale)?,
    };
    let objective = state.objective();
    let spectrum = extract_spectrum(g, &state.t, k)?;
    Ok(SdpAnmResult {
        state,
        spectrum,
        objective,
        iterations: solved.iterations,
        primal_residual: solved.primal,
        dual_residual: solved.dual,
    })
}

struct AdmmSolution {
    v: f64,
    t: ToeplitzHermitian,
    iterations: usize,
    primal: f64,
    dual: f64,
}

fn admm(g: &CVector, cfg: &AdmmConfig) -> Result<AdmmSolution> {
    let n = g.len();
    let rho = cfg.penalty;

    // Warm start from the rank-one-free feasible point T = ||g|| I / sqrt(N), v = ||g|| sqrt(N).
    let mut z = bordered(g, g.norm() * (n as f64).sqrt(), &{
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        row[0] = Complex64::new(g.norm() / (n as f64).sqrt(), 0.0);
        ToeplitzHermitian::from_first_row(row)?
    });
    let mut dual = CMatrix::zeros(n + 1, n + 1);
    let mut v = 0.0;
    let mut t = ToeplitzHermitian::from_first_row(vec![Complex64::new(0.0, 0.0); n])?;
    let (mut primal_res, mut dual_res) = (f64::INFINITY, f64::INFINITY);

    for iter in 1..=cfg.max_iters {
        // structured update: argmin v + u_0 + rho/2 ||S(v,u) - (Z - U)||^2
        let target = &z - &dual;
        v = target[(0, 0)].re - 1.0 / rho;
        let block = target.view((1, 1), (n, n)).into_owned();
        let projected = project_to_toeplitz(&block)?;
        let mut row = projected.first_row().to_vec();
        row[0].re -= 1.0 / (rho * n as f64);
        t = ToeplitzHermitian::from_first_row(row)?;
        let s = bordered(g, v, &t);

        // cone update
        let z_prev = z;
        z = project_psd(&(&s + &dual))?;
        dual += &s - &z;

        let scale_primal = s.norm().max(z.norm()).max(1e-300);
        let scale_dual = (rho * dual.norm()).max(1e-300);
        primal_res = (&s - &z).norm() / scale_primal;
        dual_res = rho * (&z - &z_prev).norm() / scale_dual;
        if primal_res <= cfg.primal_tol && dual_res <= cfg.dual_tol {
            return Ok(AdmmSolution {
                v,
                t,
                iterations: iter,
                primal: primal_res,
                dual: dual_res,
            });
        }
    }
    let _ = (v, t);
    Err(Error::NotConverged {
        iterations: cfg.max_iters,
        primal: primal_res,
        dual: dual_res,
    })
}

pub(crate) fn bordered(y: &CVector, v: f64, t: &ToeplitzHermitian) -> CMatrix {
    let n = y.len();
    let mut z = CMatrix::zeros(n + 1, n + 1);
    z[(0, 0)] = Complex64::new(v, 0.0);
    for i in 0..n {
        z[(i + 1, 0)] = y[i];
        z[(0, i + 1)] = y[i].conj();
    }
    z.view_mut((1, 1), (n, n)).copy_from(&t.to_matrix());
    z
}

fn project_psd(m: &CMatrix) -> Result<CMatrix> {
    let eig: EigenPairs = eig_hermitian(m)?;
    let clipped: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0)).collect();
    Ok(eig.reconstruct_with(&clipped))
}

/// Shifts `v` and the diagonal of `T` by the most negative eigenvalue of the
/// bordered matrix, which restores exact feasibility without leaving the
/// structured set.
fn make_feasible(g: &CVector, v: f64, t: &ToeplitzHermitian) -> Result<(f64, ToeplitzHermitian)> {
    let eig = eig_hermitian(&bordered(g, v, t))?;
    let smallest = *eig.values.last().expect("non-empty");
    if smallest >= 0.0 {
        return Ok((v, t.clone()));
    }
    let shift = -smallest;
    Ok((v + shift, t.shifted(shift)))
}

fn scale_toeplitz(t: &ToeplitzHermitian, scale: f64) -> Result<ToeplitzHermitian> {
    ToeplitzHermitian::from_first_row(t.first_row().iter().map(|c| c * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::atom;

    #[test]
    fn single_atom_frequency_and_objective() {
        let g = atom(0.3, 8);
        let r = sdp_anm(&g, &AdmmConfig::default(), 1).unwrap();
        assert!((r.spectrum.lines[0].frequency - 0.3).abs() < 1e-4);
        // objective of the program as written is twice the atomic norm (= 1)
        assert!((r.objective - 2.0).abs() < 1e-3, "objective {}", r.objective);
        assert!(r.state.bordered_min_eigenvalue().unwrap() >= -1e-8);
    }

    #[test]
    fn objective_is_positively_homogeneous() {
        let g = atom(0.3, 8) + atom(0.55, 8) * Complex64::new(0.2, 0.4);
        let one = sdp_anm(&g, &AdmmConfig::default(), 2).unwrap();
        let two = sdp_anm(&(&g * Complex64::new(2.0, 0.0)), &AdmmConfig::default(), 2).unwrap();
        assert!((two.objective - 2.0 * one.objective).abs() <= 1e-9 * one.objective);
    }

    #[test]
    fn two_well_separated_atoms() {
        let g = atom(0.2, 8) + atom(0.8, 8);
        let r = sdp_anm(&g, &AdmmConfig::default(), 2).unwrap();
        let f = r.spectrum.frequencies();
        assert!((f[0] - 0.2).abs() < 1e-3 && (f[1] - 0.8).abs() < 1e-3, "{f:?}");
    }

    #[test]
    fn zero_observation() {
        let r = sdp_anm(&CVector::zeros(6), &AdmmConfig::default(), 1).unwrap();
        assert!(r.spectrum.is_empty());
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn reports_non_convergence() {
        let cfg = AdmmConfig {
            max_iters: 2,
            ..AdmmConfig::default()
        };
        let err = sdp_anm(&(atom(0.2, 8) + atom(0.5, 8)), &cfg, 2).unwrap_err();
        assert!(matches!(err, Error::NotConverged { iterations: 2, .. }));
    }
}

//! Line-spectrum estimators: accelerated ANM (IVDST), ANM through its
//! semidefinite program, and the gridded OMP / IST baselines.

mod grid;
mod ivdst;
mod sdp;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spectral::{
    eig_hermitian, recover_amplitudes_at, vandermonde_decompose, CVector, DecompositionStatus,
    LineSpectrum, ToeplitzHermitian,
};

pub use grid::{grid_peaks, ist_grid, omp_grid, IST_REL_TOL};
pub use ivdst::{
    estimate_noise_sigma, ivdst_anm, ivdst_anm_observed, momentum_weights, IvdstIterate, IvdstResult,
    SHRINK_SCALE,
};
pub use sdp::{sdp_anm, SdpAnmResult};

/// Row-selection operator `P`: which array elements were observed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingMask {
    observed: Vec<usize>,
    ambient_size: usize,
}

impl SamplingMask {
    pub fn new(observed: Vec<usize>, ambient_size: usize) -> Result<Self> {
        if observed.is_empty() {
            return Err(Error::domain("sampling mask must observe at least one element"));
        }
        if observed.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("sampling indices must be strictly increasing"));
        }
        if *observed.last().expect("non-empty") >= ambient_size {
            return Err(Error::domain(format!(
                "sampling index {} outside [0, {ambient_size})",
                observed.last().expect("non-empty")
            )));
        }
        Ok(Self {
            observed,
            ambient_size,
        })
    }

    pub fn full(n: usize) -> Self {
        Self {
            observed: (0..n).collect(),
            ambient_size: n,
        }
    }

    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    pub fn ambient_size(&self) -> usize {
        self.ambient_size
    }

    pub fn is_full(&self) -> bool {
        self.observed.len() == self.ambient_size
    }

    /// `P x`
    pub fn sample(&self, x: &CVector) -> CVector {
        CVector::from_iterator(self.observed.len(), self.observed.iter().map(|&i| x[i]))
    }

    /// `P^H g`: zero-filled embedding of the observed samples.
    pub fn embed(&self, g: &CVector) -> CVector {
        let mut out = CVector::zeros(self.ambient_size);
        for (&i, &value) in self.observed.iter().zip(g.iter()) {
            out[i] = value;
        }
        out
    }
}

/// The triple `(y, v, T)` of the atomic-norm program.
#[derive(Debug, Clone)]
pub struct AnmState {
    pub y: CVector,
    pub v: f64,
    pub t: ToeplitzHermitian,
}

impl AnmState {
    /// `v + trace(T) / N`
    pub fn objective(&self) -> f64 {
        self.v + self.t.trace() / self.t.size() as f64
    }

    /// Smallest eigenvalue of `[[v, y^H], [y, T]]`.
    pub fn bordered_min_eigenvalue(&self) -> Result<f64> {
        let z = sdp::bordered(&self.y, self.v, &self.t);
        Ok(*eig_hermitian(&z)?.values.last().expect("non-empty"))
    }
}

/// How the IVDST eigenvalue shrinkage threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shrinkage {
    /// Use this threshold as given.
    Fixed(f64),
    /// Known per-element noise standard deviation `sigma`:
    /// `tau = delta * SHRINK_SCALE * sigma * sqrt(N ln N)`.
    NoiseSigma(f64),
    /// As `NoiseSigma`, with sigma estimated from the data.
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvdstConfig {
    /// Gradient step `delta` on the data-fit term, `0 < delta <= 1`.
    pub step_size: f64,
    pub shrinkage: Shrinkage,
    pub max_iters: usize,
    pub rel_tol: f64,
}

impl Default for IvdstConfig {
    fn default() -> Self {
        Self {
            step_size: 1.0,
            shrinkage: Shrinkage::Estimated,
            max_iters: 2000,
            rel_tol: 1e-6,
        }
    }
}

impl IvdstConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size <= 1.0) {
            return Err(Error::domain(format!(
                "step size must lie in (0, 1], got {}",
                self.step_size
            )));
        }
        match self.shrinkage {
            Shrinkage::Fixed(t) if !(t > 0.0 && t.is_finite()) => {
                return Err(Error::domain(format!("shrinkage weight must be positive, got {t}")))
            }
            Shrinkage::NoiseSigma(s) if !(s >= 0.0 && s.is_finite()) => {
                return Err(Error::domain(format!("noise sigma must be >= 0, got {s}")))
            }
            _ => {}
        }
        if self.max_iters == 0 {
            return Err(Error::domain("max_iters must be >= 1"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::domain("rel_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmConfig {
    pub penalty: f64,
    pub max_iters: usize,
    pub primal_tol: f64,
    pub dual_tol: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            penalty: 1.0,
            max_iters: 100_000,
            primal_tol: 1e-6,
            dual_tol: 1e-6,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.penalty > 0.0) || self.max_iters == 0 || !(self.primal_tol > 0.0) || !(self.dual_tol > 0.0) {
            return Err(Error::domain("ADMM penalty, iterations and tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    /// Number of grid points `M` on `[0, 1)`.
    pub grid_size: usize,
    pub ist_threshold: f64,
    pub ist_max_iters: usize,
    pub omp_sparsity: usize,
}

impl GridConfig {
    /// `M = 8N`; IST threshold `3 sigma sqrt(ln M)` for known noise `sigma`
    /// (a small floor keeps it positive for noiseless data).
    pub fn for_array(n: usize, noise_sigma: f64, sparsity: usize) -> Self {
        let grid_size = 8 * n;
        let threshold = 3.0 * noise_sigma * (grid_size as f64).ln().sqrt();
        Self {
            grid_size,
            ist_threshold: threshold.max(1e-3),
            ist_max_iters: 2000,
            omp_sparsity: sparsity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_size == 0 {
            return Err(Error::domain("grid size must be >= 1"));
        }
        if !(self.ist_threshold > 0.0 && self.ist_threshold.is_finite()) {
            return Err(Error::domain(format!(
                "IST threshold must be positive, got {}",
                self.ist_threshold
            )));
        }
        if self.ist_max_iters == 0 {
            return Err(Error::domain("IST max_iters must be >= 1"));
        }
        Ok(())
    }
}

/// Frequencies from the Vandermonde decomposition of `t`, amplitudes by least
/// squares on the observed samples. A rank-deficient `t` yields only as many
/// lines as its rank (none for the zero matrix).
pub(crate) fn extract_spectrum_at(
    g: &CVector,
    rows: &[usize],
    t: &ToeplitzHermitian,
    k: usize,
) -> Result<LineSpectrum> {
    let mut decomposition = vandermonde_decompose(t, k)?;
    if let DecompositionStatus::RankDeficient { rank } = decomposition.status {
        if rank == 0 {
            return Ok(LineSpectrum::empty());
        }
        decomposition = vandermonde_decompose(t, rank)?;
    }
    recover_amplitudes_at(g, rows, &decomposition.frequencies)
}

pub(crate) fn extract_spectrum(g: &CVector, t: &ToeplitzHermitian, k: usize) -> Result<LineSpectrum> {
    let rows: Vec<usize> = (0..g.len()).collect();
    extract_spectrum_at(g, &rows, t, k)
}

/// The four compared estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Ivdst,
    Sdp,
    Omp,
    Ist,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Ivdst, Algorithm::Sdp, Algorithm::Omp, Algorithm::Ist];

    pub fn id(&self) -> &'static str {
        match self {
            Algorithm::Ivdst => "ivdst-anm",
            Algorithm::Sdp => "sdp-anm",
            Algorithm::Omp => "omp",
            Algorithm::Ist => "ist",
        }
    }

    pub fn is_gridless(&self) -> bool {
        matches!(self, Algorithm::Ivdst | Algorithm::Sdp)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ivdst" | "ivdst-anm" => Ok(Algorithm::Ivdst),
            "sdp" | "sdp-anm" => Ok(Algorithm::Sdp),
            "omp" => Ok(Algorithm::Omp),
            "ist" => Ok(Algorithm::Ist),
            other => Err(Error::domain(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// An estimator with its configuration, for per-pixel or per-trial dispatch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorSpec {
    Ivdst(IvdstConfig),
    Sdp(AdmmConfig),
    Omp(GridConfig),
    Ist(GridConfig),
}

impl EstimatorSpec {
    /// Default configuration of `algorithm` for an `n`-element array with
    /// known noise level `noise_sigma` (0 for noiseless).
    pub fn with_defaults(algorithm: Algorithm, n: usize, noise_sigma: f64, k: usize) -> Self {
        match algorithm {
            Algorithm::Ivdst => EstimatorSpec::Ivdst(IvdstConfig {
                shrinkage: if noise_sigma > 0.0 {
                    Shrinkage::NoiseSigma(noise_sigma)
                } else {
                    Shrinkage::Estimated
                },
                ..IvdstConfig::default()
            }),
            Algorithm::Sdp => EstimatorSpec::Sdp(AdmmConfig::default()),
            Algorithm::Omp => EstimatorSpec::Omp(GridConfig::for_array(n, noise_sigma, k)),
            Algorithm::Ist => EstimatorSpec::Ist(GridConfig::for_array(n, noise_sigma, k)),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            EstimatorSpec::Ivdst(_) => Algorithm::Ivdst,
            EstimatorSpec::Sdp(_) => Algorithm::Sdp,
            EstimatorSpec::Omp(_) => Algorithm::Omp,
            EstimatorSpec::Ist(_) => Algorithm::Ist,
        }
    }

    /// Runs the estimator on a fully sampled observation and returns at most
    /// `k` lines (IST output is reduced to its `k` dominant grid peaks).
    pub fn estimate(&self, g: &CVector, k: usize) -> Result<LineSpectrum> {
        match self {
            EstimatorSpec::Ivdst(cfg) => Ok(ivdst_anm(g, &SamplingMask::full(g.len()), k, cfg)?.spectrum),
            EstimatorSpec::Sdp(cfg) => Ok(sdp_anm(g, cfg, k)?.spectrum),
            EstimatorSpec::Omp(cfg) => omp_grid(g, k, cfg),
            EstimatorSpec::Ist(cfg) => Ok(grid_peaks(&ist_grid(g, cfg)?, cfg.grid_size, k)),
        }
    }

    /// Like [`estimate`](Self::estimate) with `k` as an upper bound: IVDST
    /// extracts as many lines as atoms survive its shrinkage (IST is sparse by
    /// construction; SDP and OMP use `k`).
    pub fn estimate_at_most(&self, g: &CVector, k: usize) -> Result<LineSpectrum> {
        match self {
            EstimatorSpec::Ivdst(cfg) => {
                let result = ivdst_anm(g, &SamplingMask::full(g.len()), k, cfg)?;
                let order = result.rank.min(k);
                if order == 0 {
                    Ok(LineSpectrum::empty())
                } else if order < k {
                    extract_spectrum(g, &result.t, order)
                } else {
                    Ok(result.spectrum)
                }
            }
            _ => self.estimate(g, k),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn mask_validation() {
        assert!(SamplingMask::new(vec![], 4).is_err());
        assert!(SamplingMask::new(vec![1, 1], 4).is_err());
        assert!(SamplingMask::new(vec![0, 4], 4).is_err());
        let m = SamplingMask::new(vec![0, 2, 3], 4).unwrap();
        let x = CVector::from_fn(4, |i, _| Complex64::new(i as f64, 0.0));
        let g = m.sample(&x);
        assert_eq!(g.len(), 3);
        let back = m.embed(&g);
        assert_eq!(back[1], Complex64::new(0.0, 0.0));
        assert_eq!(back[3], x[3]);
    }

    #[test]
    fn config_validation() {
        let bad = IvdstConfig {
            step_size: 1.5,
            ..IvdstConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(IvdstConfig::default().validate().is_ok());
        let mut g = GridConfig::for_array(8, 0.0, 1);
        assert_eq!(g.grid_size, 64);
        g.ist_threshold = 0.0;
        assert!(g.validate().is_err());
    }

    #[test]
    fn algorithm_ids_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.id().parse::<Algorithm>().unwrap(), a);
        }
        assert!("music".parse::<Algorithm>().is_err());
    }
}

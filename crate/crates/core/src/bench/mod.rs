//! Scoring of line-spectrum estimates and the Monte-Carlo sweeps built on it.

mod sweep;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::estimators::Algorithm;
use crate::spectral::{circular_distance, LineSpectrum};
use crate::tomosar::{ArrayGeometry, GroundTruth, PointCloud};

pub use sweep::{
    run_sweep, run_trials, synthetic_observation, trial_seed, SweepConfig, SweepKind, SweepRow, SweepTable,
    TrialDraw,
};

/// Largest list size scored by exhaustive matching.
pub const MAX_MATCH_SIZE: usize = 8;

/// Distance charged for each component without a partner.
pub const MISSING_PENALTY: f64 = 0.5;

/// Result of matching estimated to true frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub rmse: f64,
    /// Largest matched distance, the penalty if anything was unmatched.
    pub max_error: f64,
    /// `(estimate index, truth index)` pairs.
    pub pairs: Vec<(usize, usize)>,
    /// Components without a partner; non-zero flags a count mismatch.
    pub unmatched: usize,
}

impl Match {
    pub fn is_padded(&self) -> bool {
        self.unmatched > 0
    }

    fn sum_squares(&self) -> f64 {
        self.rmse * self.rmse * self.components() as f64
    }

    fn components(&self) -> usize {
        self.pairs.len() + self.unmatched
    }
}

/// Minimum-RMSE matching under the circular distance `min(|d|, 1 - |d|)`.
///
/// Every assignment of the shorter list into the longer one is tried. Each
/// component of the longer list left without a partner adds a distance of
/// [`MISSING_PENALTY`]. The RMSE is taken over the length of the longer list.
pub fn circular_match_rmse(estimate: &[f64], truth: &[f64]) -> Result<Match> {
    if estimate.len().max(truth.len()) > MAX_MATCH_SIZE {
        return Err(Error::domain(format!(
            "exhaustive matching supports at most {MAX_MATCH_SIZE} components, got {} and {}",
            estimate.len(),
            truth.len()
        )));
    }
    if estimate.iter().chain(truth).any(|f| !f.is_finite()) {
        return Err(Error::domain("frequencies must be finite"));
    }
    let swap = estimate.len() > truth.len();
    let (short, long) = if swap { (truth, estimate) } else { (estimate, truth) };

    let mut best = (f64::INFINITY, Vec::new());
    let mut used = vec![false; long.len()];
    let mut current = Vec::with_capacity(short.len());
    assign(short, long, 0.0, &mut used, &mut current, &mut best);

    let (matched_sq, assignment) = best;
    let unmatched = long.len() - short.len();
    let total = long.len();
    let rmse = if total == 0 {
        0.0
    } else {
        ((matched_sq + unmatched as f64 * MISSING_PENALTY * MISSING_PENALTY) / total as f64).sqrt()
    };
    let mut max_error = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| circular_distance(short[i], long[j]))
        .fold(0.0, f64::max);
    if unmatched > 0 {
        max_error = max_error.max(MISSING_PENALTY);
    }
    let pairs = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| if swap { (j, i) } else { (i, j) })
        .collect();
    Ok(Match {
        rmse,
        max_error,
        pairs,
        unmatched,
    })
}

/// Depth-first search over injective assignments with branch-and-bound.
fn assign(
    short: &[f64],
    long: &[f64],
    partial: f64,
    used: &mut [bool],
    current: &mut Vec<usize>,
    best: &mut (f64, Vec<usize>),
) {
    if partial >= best.0 {
        return;
    }
    let i = current.len();
    if i == short.len() {
        *best = (partial, current.clone());
        return;
    }
    for j in 0..long.len() {
        if used[j] {
            continue;
        }
        let d = circular_distance(short[i], long[j]);
        used[j] = true;
        current.push(j);
        assign(short, long, partial + d * d, used, current, best);
        current.pop();
        used[j] = false;
    }
}

/// One estimator run on one Monte-Carlo draw.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub algorithm: Algorithm,
    pub truth: LineSpectrum,
    pub estimate: LineSpectrum,
    /// Wall-clock time of the estimator call (s).
    pub runtime: f64,
    pub seed: u64,
    /// Error message when the estimator failed.
    pub failure: Option<String>,
}

impl TrialResult {
    /// Matched score; a failed run scores as if nothing was found.
    pub fn score(&self) -> Result<Match> {
        let estimate = if self.failure.is_some() {
            Vec::new()
        } else {
            self.estimate.frequencies()
        };
        circular_match_rmse(&estimate, &self.truth.frequencies())
    }
}

/// Fraction of trials whose largest matched frequency error is below `eps`.
pub fn success_rate(trials: &[TrialResult], eps: f64) -> Result<f64> {
    if trials.is_empty() {
        return Err(Error::domain("success rate of an empty trial list"));
    }
    if !(eps > 0.0) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    let mut hits = 0usize;
    for trial in trials {
        if trial.score()?.max_error < eps {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials.len() as f64)
}

/// Cramér–Rao bound on the frequency variance of one complex sinusoid in
/// white noise, `6 / ((2 pi)^2 snr n (n^2 - 1))`.
pub fn crlb_single_tone(n: usize, snr_db: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("CRLB needs n >= 2, got {n}")));
    }
    let snr = 10f64.powf(snr_db / 10.0);
    let n = n as f64;
    Ok(6.0 / ((2.0 * PI).powi(2) * snr * n * (n * n - 1.0)))
}

/// Height accuracy of a reconstructed point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneScore {
    /// Pooled per-pixel matched RMSE with missing-component penalty (m).
    pub rmse: f64,
    /// The same in normalized frequency.
    pub rmse_frequency: f64,
    /// RMSE over matched pairs only (m).
    pub matched_rmse: f64,
    pub matched: usize,
    /// True scatterers without an estimate.
    pub missed: usize,
    /// Estimates without a true scatterer.
    pub spurious: usize,
    /// Pixels whose largest matched error is below `eps`.
    pub pixel_success: f64,
}

/// Scores a point cloud against the scene ground truth pixel by pixel with
/// [`circular_match_rmse`] on normalized elevation, pooling the squared errors
/// of all components.
pub fn score_scene(
    cloud: &PointCloud,
    truth: &GroundTruth,
    geom: &ArrayGeometry,
    eps: f64,
) -> Result<SceneScore> {
    let span = geom.unambiguous_span();
    let mut per_pixel: Vec<Vec<f64>> = vec![Vec::new(); truth.azimuth() * truth.range()];
    for p in &cloud.points {
        if p.azimuth >= truth.azimuth() || p.range >= truth.range() {
            return Err(Error::domain(format!(
                "point at ({}, {}) outside the {}x{} scene",
                p.azimuth,
                p.range,
                truth.azimuth(),
                truth.range()
            )));
        }
        per_pixel[p.azimuth * truth.range() + p.range].push(geom.freq_from_elevation(p.height));
    }

    let (mut total_sq, mut components) = (0.0, 0usize);
    let (mut matched_sq, mut matched) = (0.0, 0usize);
    let (mut missed, mut spurious, mut scored, mut hits) = (0, 0, 0usize, 0usize);
    for a in 0..truth.azimuth() {
        for r in 0..truth.range() {
            let est = &per_pixel[a * truth.range() + r];
            let tru: Vec<f64> = truth
                .at(a, r)
                .iter()
                .map(|s| geom.freq_from_elevation(s.elevation))
                .collect();
            if est.is_empty() && tru.is_empty() {
                continue;
            }
            let m = circular_match_rmse(est, &tru)?;
            total_sq += m.sum_squares();
            components += m.components();
            for &(i, j) in &m.pairs {
                matched_sq += circular_distance(est[i], tru[j]).powi(2);
            }
            matched += m.pairs.len();
            if est.len() < tru.len() {
                missed += m.unmatched;
            } else {
                spurious += m.unmatched;
            }
            scored += 1;
            if m.max_error < eps {
                hits += 1;
            }
        }
    }
    let rmse_frequency = if components == 0 { 0.0 } else { (total_sq / components as f64).sqrt() };
    let matched_rmse = if matched == 0 { 0.0 } else { (matched_sq / matched as f64).sqrt() * span };
    Ok(SceneScore {
        rmse: rmse_frequency * span,
        rmse_frequency,
        matched_rmse,
        matched,
        missed,
        spurious,
        pixel_success: if scored == 0 { 1.0 } else { hits as f64 / scored as f64 },
    })
}

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{score_scene, success_rate, TrialResult};
use crate::error::{Error, Result};
use crate::estimators::{AdmmConfig, Algorithm, EstimatorSpec, IvdstConfig};
use crate::spectral::{atom, wrap_frequency, CVector, LineSpectrum, SpectralLine};
use crate::tomosar::{
    add_noise, noise_sigma_for, reconstruct_volume, simulate_building_scene, AmplitudeFloor,
    ArrayGeometry, EstimatorChoice, SceneConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// Grid over SNR (dB).
    Snr,
    /// Grid over the number of array elements.
    Elements,
    /// Grid over the line count relative to the array size, `K / N`.
    Sparseness,
    /// Grid over the SNR (dB) of the building scene.
    Scene,
}

impl SweepKind {
    pub fn id(&self) -> &'static str {
        match self {
            SweepKind::Snr => "snr",
            SweepKind::Elements => "elements",
            SweepKind::Sparseness => "sparseness",
            SweepKind::Scene => "scene",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snr" => Ok(SweepKind::Snr),
            "elements" => Ok(SweepKind::Elements),
            "sparseness" => Ok(SweepKind::Sparseness),
            "scene" => Ok(SweepKind::Scene),
            other => Err(Error::domain(format!(
                "unknown sweep kind `{other}` (expected snr, elements, sparseness or scene)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub algorithms: Vec<Algorithm>,
    /// Array used wherever the grid does not set `N`.
    pub geometry: ArrayGeometry,
    /// SNR (dB) wherever the grid does not set it; infinite means noiseless.
    pub snr_db: f64,
    /// Line count wherever the grid does not set it.
    pub targets: usize,
    /// Fixed true frequencies; `None` draws them at random each trial.
    pub frequencies: Option<Vec<f64>>,
    /// Minimum circular separation of random lines; default `1 / N`.
    pub min_separation: Option<f64>,
    /// Success threshold; default `1 / (2N)`.
    pub eps: Option<f64>,
    /// IVDST settings; `None` uses the defaults with the true noise level.
    pub ivdst: Option<IvdstConfig>,
    pub sdp: AdmmConfig,
    /// Scene settings for [`SweepKind::Scene`].
    pub scene: SceneConfig,
    pub k_max: usize,
    pub amplitude_floor: AmplitudeFloor,
}

impl Default for SweepConfig {
    /// SNR sweep of one random line at N = 8 from -10 to 40 dB, all algorithms.
    fn default() -> Self {
        SweepConfig {
            kind: SweepKind::Snr,
            grid: (0..11).map(|i| -10.0 + 5.0 * i as f64).collect(),
            trials: 200,
            algorithms: Algorithm::ALL.to_vec(),
            geometry: ArrayGeometry::default(),
            snr_db: 30.0,
            targets: 1,
            frequencies: None,
            min_separation: None,
            eps: None,
            ivdst: None,
            sdp: AdmmConfig::default(),
            scene: SceneConfig::default(),
            k_max: 3,
            amplitude_floor: AmplitudeFloor::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::config("sweep.grid", "must not be empty"));
        }
        if self.trials == 0 {
            return Err(Error::config("sweep.trials", "must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("sweep.algorithms", "must name at least one algorithm"));
        }
        self.geometry.validate()?;
        for &value in &self.grid {
            let ok = match self.kind {
                SweepKind::Snr | SweepKind::Scene => !value.is_nan(),
                SweepKind::Elements => value >= 2.0 && value.fract() == 0.0,
                SweepKind::Sparseness => value > 0.0 && value < 1.0,
            };
            if !ok {
                return Err(Error::config(
                    "sweep.grid",
                    format!("value {value} is invalid for a {} sweep", self.kind),
                ));
            }
        }
        if self.kind != SweepKind::Sparseness && self.frequencies.is_none() && self.targets == 0 {
            return Err(Error::config("sweep.targets", "must be at least 1"));
        }
        if let Some(freqs) = &self.frequencies {
            if freqs.is_empty() || freqs.iter().any(|f| !(0.0..1.0).contains(f)) {
                return Err(Error::config("sweep.frequencies", "must be a non-empty list in [0, 1)"));
            }
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0) {
                return Err(Error::config("sweep.eps", "must be positive"));
            }
        }
        if let Some(sep) = self.min_separation {
            if !(sep >= 0.0) {
                return Err(Error::config("sweep.min_separation", "must be non-negative"));
            }
        }
        if let Some(cfg) = &self.ivdst {
            cfg.validate()?;
        }
        self.sdp.validate()?;
        Ok(())
    }

    /// Array size, SNR and line count at a grid value.
    fn point(&self, value: f64) -> (usize, f64, usize) {
        let n = self.geometry.n_elements;
        let k = self.frequencies.as_ref().map_or(self.targets, Vec::len);
        match self.kind {
            SweepKind::Snr | SweepKind::Scene => (n, value, k),
            SweepKind::Elements => (value as usize, self.snr_db, k),
            SweepKind::Sparseness => (n, self.snr_db, ((value * n as f64).round() as usize).max(1)),
        }
    }

    fn estimator(&self, algorithm: Algorithm, n: usize, sigma: f64, k: usize) -> EstimatorSpec {
        match (algorithm, &self.ivdst) {
            (Algorithm::Ivdst, Some(cfg)) => EstimatorSpec::Ivdst(*cfg),
            (Algorithm::Sdp, _) => EstimatorSpec::Sdp(self.sdp),
            _ => EstimatorSpec::with_defaults(algorithm, n, sigma, k),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub algorithm: Algorithm,
    /// Root mean square over trials of the per-trial matched RMSE
    /// (normalized frequency; metres for scene sweeps).
    pub rmse_mean: f64,
    pub success_rate: f64,
    pub runtime_mean: f64,
    pub runtime_median: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub kind: SweepKind,
    pub rows: Vec<SweepRow>,
}

/// Seed of one trial, mixed from the master seed and the grid and trial
/// indices so that results never depend on scheduling.
pub fn trial_seed(master: u64, grid_index: usize, trial_index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((grid_index as u64) << 32) | trial_index as u64);
    rng.random()
}

/// A synthetic observation and its truth.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDraw {
    pub seed: u64,
    pub truth: LineSpectrum,
    pub g: CVector,
    pub noise_sigma: f64,
}

/// `k` frequencies uniformly distributed subject to a minimum circular
/// separation: uniform points on the shortened circle are spread by the
/// separation and rotated at random.
fn separated_frequencies(k: usize, separation: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let slack = 1.0 - k as f64 * separation;
    if slack < 0.0 {
        return Err(Error::domain(format!(
            "cannot place {k} lines with separation {separation}"
        )));
    }
    let mut points: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * slack).collect();
    points.sort_by(|a, b| a.total_cmp(b));
    let shift: f64 = rng.random();
    let mut freqs: Vec<f64> = points
        .iter()
        .enumerate()
        .map(|(i, &p)| wrap_frequency(p + i as f64 * separation + shift))
        .collect();
    freqs.sort_by(|a, b| a.total_cmp(b));
    Ok(freqs)
}

/// Unit-magnitude lines with random phases at `freqs` (random when `None`),
/// observed by `n` elements with circular Gaussian noise at `snr_db` over the
/// total line power.
pub fn synthetic_observation(
    n: usize,
    k: usize,
    freqs: Option<&[f64]>,
    separation: f64,
    snr_db: f64,
    seed: u64,
) -> Result<TrialDraw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let freqs = match freqs {
        Some(f) => f.to_vec(),
        None => separated_frequencies(k, separation, &mut rng)?,
    };
    let lines: Vec<SpectralLine> = freqs
        .iter()
        .map(|&frequency| SpectralLine {
            frequency,
            amplitude: Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI),
        })
        .collect();
    let mut g = lines
        .iter()
        .fold(CVector::zeros(n), |acc, l| acc + atom(l.frequency, n) * l.amplitude);
    let noise_sigma = if snr_db.is_finite() {
        let sigma = noise_sigma_for(lines.len() as f64, snr_db);
        add_noise(&mut g, sigma, &mut rng);
        sigma
    } else if snr_db > 0.0 {
        0.0
    } else {
        return Err(Error::domain(format!("snr_db must be finite or +inf, got {snr_db}")));
    };
    Ok(TrialDraw {
        seed,
        truth: LineSpectrum::new(lines),
        g,
        noise_sigma,
    })
}

/// Runs one grid point and trial for every configured algorithm.
fn run_trial(cfg: &SweepConfig, value: f64, seed: u64) -> Result<Vec<TrialResult>> {
    let (n, snr, k) = cfg.point(value);
    let separation = cfg.min_separation.unwrap_or(1.0 / n as f64);
    let draw = synthetic_observation(n, k, cfg.frequencies.as_deref(), separation, snr, seed)?;
    Ok(cfg
        .algorithms
        .iter()
        .map(|&algorithm| {
            let spec = cfg.estimator(algorithm, n, draw.noise_sigma, k);
            let start = Instant::now();
            let outcome = spec.estimate(&draw.g, k);
            let runtime = start.elapsed().as_secs_f64();
            let (estimate, failure) = match outcome {
                Ok(spectrum) => (spectrum, None),
                Err(e) => (LineSpectrum::empty(), Some(e.to_string())),
            };
            TrialResult {
                algorithm,
                truth: draw.truth.clone(),
                estimate,
                runtime,
                seed,
                failure,
            }
        })
        .collect())
}

/// All trial results, grouped per grid point in grid order.
pub fn run_trials(cfg: &SweepConfig, seed: u64) -> Result<Vec<Vec<TrialResult>>> {
    cfg.validate()?;
    if cfg.kind == SweepKind::Scene {
        return Err(Error::domain("scene sweeps have no per-line trials"));
    }
    let jobs: Vec<(usize, usize)> = (0..cfg.grid.len())
        .flat_map(|g| (0..cfg.trials).map(move |t| (g, t)))
        .collect();
    let results: Vec<Vec<TrialResult>> = jobs
        .par_iter()
        .map(|&(g, t)| run_trial(cfg, cfg.grid[g], trial_seed(seed, g, t)))
        .collect::<Result<_>>()?;
    let mut grouped = vec![Vec::new(); cfg.grid.len()];
    for ((g, _), trial) in jobs.into_iter().zip(results) {
        grouped[g].extend(trial);
    }
    Ok(grouped)
}

fn summarize(param: f64, algorithm: Algorithm, scores: &[f64], success: f64, runtimes: &mut [f64]) -> SweepRow {
    let count = scores.len();
    runtimes.sort_by(|a, b| a.total_cmp(b));
    let median = if count % 2 == 1 {
        runtimes[count / 2]
    } else {
        (runtimes[count / 2 - 1] + runtimes[count / 2]) / 2.0
    };
    SweepRow {
        param,
        algorithm,
        rmse_mean: (scores.iter().map(|s| s * s).sum::<f64>() / count as f64).sqrt(),
        success_rate: success,
        runtime_mean: runtimes.iter().sum::<f64>() / count as f64,
        runtime_median: median,
        trials: count,
    }
}

/// Monte-Carlo sweep: one row per grid point and algorithm, deterministic in
/// `seed`. Failed estimator runs count as trials that found nothing.
pub fn run_sweep(cfg: &SweepConfig, seed: u64) -> Result<SweepTable> {
    if cfg.kind == SweepKind::Scene {
        return run_scene_sweep(cfg, seed);
    }
    let grouped = run_trials(cfg, seed)?;
    let mut rows = Vec::new();
    for (g, trials) in grouped.iter().enumerate() {
        let (n, _, _) = cfg.point(cfg.grid[g]);
        let eps = cfg.eps.unwrap_or(1.0 / (2.0 * n as f64));
        for &algorithm in &cfg.algorithms {
            let mine: Vec<TrialResult> = trials.iter().filter(|t| t.algorithm == algorithm).cloned().collect();
            let scores = mine.iter().map(|t| t.score().map(|m| m.rmse)).collect::<Result<Vec<_>>>()?;
            let mut runtimes: Vec<f64> = mine.iter().map(|t| t.runtime).collect();
            let success = success_rate(&mine, eps)?;
            rows.push(summarize(cfg.grid[g], algorithm, &scores, success, &mut runtimes));
        }
    }
    Ok(SweepTable { kind: cfg.kind, rows })
}

fn run_scene_sweep(cfg: &SweepConfig, seed: u64) -> Result<SweepTable> {
    cfg.validate()?;
    let geom = cfg.geometry;
    let eps = cfg.eps.unwrap_or(1.0 / (2.0 * geom.n_elements as f64));
    let mut rows = Vec::new();
    for (g, &snr) in cfg.grid.iter().enumerate() {
        let scene = SceneConfig {
            snr_db: snr.is_finite().then_some(snr),
            ..cfg.scene
        };
        let mut per_algorithm: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> =
            vec![(Vec::new(), Vec::new(), Vec::new()); cfg.algorithms.len()];
        for t in 0..cfg.trials {
            let (stack, truth) = simulate_building_scene(&geom, &scene, trial_seed(seed, g, t))?;
            for (i, &algorithm) in cfg.algorithms.iter().enumerate() {
                let start = Instant::now();
                let rec = reconstruct_volume(&stack, &EstimatorChoice::Adaptive(algorithm), cfg.k_max, cfg.amplitude_floor)?;
                let runtime = start.elapsed().as_secs_f64();
                let score = score_scene(&rec.cloud, &truth, &geom, eps)?;
                per_algorithm[i].0.push(score.rmse);
                per_algorithm[i].1.push(score.pixel_success);
                per_algorithm[i].2.push(runtime);
            }
        }
        for (i, &algorithm) in cfg.algorithms.iter().enumerate() {
            let (scores, success, runtimes) = &mut per_algorithm[i];
            let mean_success = success.iter().sum::<f64>() / success.len() as f64;
            rows.push(summarize(snr, algorithm, scores, mean_success, runtimes));
        }
    }
    Ok(SweepTable { kind: SweepKind::Scene, rows })
}

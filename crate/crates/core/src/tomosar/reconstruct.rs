use rayon::prelude::*;

use super::{CloudPoint, PointCloud, SlcStack};
use crate::error::{Error, Result};
use crate::estimators::{estimate_noise_sigma, Algorithm, EstimatorSpec};

/// Estimator applied to each pixel.
#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorChoice {
    /// The same configuration everywhere.
    Fixed(EstimatorSpec),
    /// Default configuration of the algorithm, tuned per pixel to its
    /// estimated noise level.
    Adaptive(Algorithm),
}

impl EstimatorChoice {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            EstimatorChoice::Fixed(spec) => spec.algorithm(),
            EstimatorChoice::Adaptive(alg) => *alg,
        }
    }
}

/// Minimum line amplitude kept in the point cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmplitudeFloor {
    Fixed(f64),
    /// Multiple of the noise standard deviation estimated in each pixel.
    NoiseMultiple(f64),
}

impl Default for AmplitudeFloor {
    fn default() -> Self {
        AmplitudeFloor::NoiseMultiple(3.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PixelFailure {
    pub azimuth: usize,
    pub range: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub pixels: usize,
    pub skipped: usize,
    pub failures: Vec<PixelFailure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub cloud: PointCloud,
    pub diagnostics: Diagnostics,
}

/// Runs the estimator on every pixel (at most `k_max` lines each) and
/// collects the lines above the amplitude floor as points at their
/// elevations.
///
/// Pixels are processed in parallel on the current rayon pool and merged in
/// pixel order. A pixel whose estimator fails is skipped and reported in the
/// diagnostics.
pub fn reconstruct_volume(
    stack: &SlcStack,
    estimator: &EstimatorChoice,
    k_max: usize,
    floor: AmplitudeFloor,
) -> Result<Reconstruction> {
    let n = stack.channels();
    if k_max == 0 || k_max >= n {
        return Err(Error::domain(format!(
            "k_max = {k_max} must satisfy 1 <= k_max <= N - 1 = {}",
            n - 1
        )));
    }
    match floor {
        AmplitudeFloor::Fixed(v) | AmplitudeFloor::NoiseMultiple(v) if v.is_nan() || v < 0.0 => {
            return Err(Error::domain(format!("amplitude floor must be non-negative, got {v}")));
        }
        _ => {}
    }
    let geom = *stack.geometry();
    let (azimuth, range) = (stack.azimuth(), stack.range());

    let results: Vec<std::result::Result<Vec<CloudPoint>, PixelFailure>> = (0..azimuth * range)
        .into_par_iter()
        .map(|index| {
            let (a, r) = (index / range, index % range);
            let g = stack.pixel(a, r);
            if g.norm() == 0.0 {
                return Ok(Vec::new());
            }
            let sigma = estimate_noise_sigma(&g);
            let spec = match estimator {
                EstimatorChoice::Fixed(spec) => *spec,
                EstimatorChoice::Adaptive(alg) => EstimatorSpec::with_defaults(*alg, n, sigma, k_max),
            };
            let threshold = match floor {
                AmplitudeFloor::Fixed(v) => v,
                AmplitudeFloor::NoiseMultiple(m) => m * sigma,
            };
            let lines = spec.estimate_at_most(&g, k_max).map_err(|e| PixelFailure {
                azimuth: a,
                range: r,
                message: e.to_string(),
            })?;
            Ok(lines
                .lines
                .iter()
                .filter(|line| line.amplitude.norm() >= threshold)
                .map(|line| CloudPoint {
                    azimuth: a,
                    range: r,
                    height: geom.elevation_from_freq(line.frequency),
                    intensity: line.amplitude.norm(),
                })
                .collect())
        })
        .collect();

    let mut cloud = PointCloud::default();
    let mut diagnostics = Diagnostics {
        pixels: results.len(),
        ..Diagnostics::default()
    };
    for result in results {
        match result {
            Ok(points) => cloud.points.extend(points),
            Err(failure) => {
                diagnostics.skipped += 1;
                diagnostics.failures.push(failure);
            }
        }
    }
    Ok(Reconstruction { cloud, diagnostics })
}

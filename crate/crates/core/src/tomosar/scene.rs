//! Box-building scene seen by a side-looking array.
//!
//! Slant-range bins run from near to far range. A scatterer at height `h`
//! shares its bin with a ground patch and sits `h / sin(theta)` above it in
//! elevation. A building of height `H` and depth `D` whose facade base falls
//! in bin `x_b` therefore produces
//!
//! - facade layover in `[x_b - H cos(theta) / dr, x_b)` over the ground,
//! - roof returns at elevation `H / sin(theta)` in
//!   `[x_b - H cos(theta) / dr, x_b - H cos(theta) / dr + D sin(theta) / dr)`,
//! - hidden ground under the footprint and a shadow behind it, both empty.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{add_noise, noise_sigma_for, synthesize, ArrayGeometry, Scatterer, SlcStack};
use crate::error::{Error, Result};

/// Stream key separating reflectivity phases from noise draws.
const PHASE_STREAM_KEY: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildingConfig {
    /// First azimuth line covered by the building.
    pub azimuth_start: usize,
    /// One past the last azimuth line.
    pub azimuth_end: usize,
    /// Slant-range bin (fractional) of the facade base.
    pub base_range_bin: f64,
    /// Ground-range depth of the footprint (m).
    pub depth: f64,
    /// Height (m).
    pub height: f64,
}

impl Default for BuildingConfig {
    fn default() -> Self {
        BuildingConfig {
            azimuth_start: 5,
            azimuth_end: 16,
            base_range_bin: 30.5,
            depth: 24.0,
            height: 30.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneConfig {
    pub azimuth_size: usize,
    pub range_size: usize,
    /// Slant-range pixel spacing (m).
    pub range_spacing: f64,
    /// Per-pixel SNR over the total scatterer power; `None` is noiseless.
    pub snr_db: Option<f64>,
    /// Residual ground elevation gained per range bin (m), e.g. terrain left
    /// over after flat-earth removal. Surfaces above ground inherit it.
    pub terrain_slope: f64,
    pub ground_amplitude: f64,
    pub wall_amplitude: f64,
    pub roof_amplitude: f64,
    /// `None` leaves flat ground.
    pub building: Option<BuildingConfig>,
}

impl Default for SceneConfig {
    /// 21 azimuth lines by 64 range bins at 30 dB.
    fn default() -> Self {
        SceneConfig {
            azimuth_size: 21,
            range_size: 64,
            range_spacing: 2.0,
            snr_db: Some(30.0),
            terrain_slope: 0.15,
            ground_amplitude: 1.0,
            wall_amplitude: 1.0,
            roof_amplitude: 1.0,
            building: Some(BuildingConfig::default()),
        }
    }
}

impl SceneConfig {
    pub fn validate(&self, geom: &ArrayGeometry) -> Result<()> {
        geom.validate()?;
        if self.azimuth_size == 0 {
            return Err(Error::config("scene.azimuth_size", "must be positive"));
        }
        if self.range_size == 0 {
            return Err(Error::config("scene.range_size", "must be positive"));
        }
        if !(self.range_spacing.is_finite() && self.range_spacing > 0.0) {
            return Err(Error::config("scene.range_spacing", "must be positive"));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(Error::config("scene.snr_db", "must be finite"));
            }
        }
        let span = geom.unambiguous_span();
        let ground_top = self.terrain_slope * (self.range_size - 1) as f64;
        if !(self.terrain_slope.is_finite() && self.terrain_slope >= 0.0) || ground_top >= span {
            return Err(Error::config(
                "scene.terrain_slope",
                format!("must be non-negative with ground elevations below the span {span:.2} m"),
            ));
        }
        for (path, value) in [
            ("scene.ground_amplitude", self.ground_amplitude),
            ("scene.wall_amplitude", self.wall_amplitude),
            ("scene.roof_amplitude", self.roof_amplitude),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::config(path, "must be non-negative"));
            }
        }
        if let Some(b) = &self.building {
            if b.azimuth_start >= b.azimuth_end || b.azimuth_end > self.azimuth_size {
                return Err(Error::config(
                    "scene.building.azimuth_end",
                    format!(
                        "azimuth extent [{}, {}) must be non-empty and within {} lines",
                        b.azimuth_start, b.azimuth_end, self.azimuth_size
                    ),
                ));
            }
            if !(b.depth.is_finite() && b.depth > 0.0) {
                return Err(Error::config("scene.building.depth", "must be positive"));
            }
            if !b.base_range_bin.is_finite() {
                return Err(Error::config("scene.building.base_range_bin", "must be finite"));
            }
            if !(b.height.is_finite() && b.height >= 0.0) {
                return Err(Error::config("scene.building.height", "must be non-negative"));
            }
            let roof = ground_top + b.height / geom.view_angle.to_radians().sin();
            if roof >= span {
                return Err(Error::config(
                    "scene.building.height",
                    format!(
                        "roof elevation up to {roof:.2} m exceeds the unambiguous span {span:.2} m"
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// True scatterers of every pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    azimuth: usize,
    range: usize,
    pixels: Vec<Vec<Scatterer>>,
}

impl GroundTruth {
    /// Truth of an `azimuth x range` scene from per-pixel scatterer lists in
    /// azimuth-major order.
    pub fn new(azimuth: usize, range: usize, pixels: Vec<Vec<Scatterer>>) -> Result<Self> {
        if pixels.len() != azimuth * range {
            return Err(Error::Shape {
                expected: format!("{} pixels", azimuth * range),
                got: format!("{} pixels", pixels.len()),
            });
        }
        Ok(GroundTruth { azimuth, range, pixels })
    }

    pub fn azimuth(&self) -> usize {
        self.azimuth
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn at(&self, azimuth: usize, range: usize) -> &[Scatterer] {
        &self.pixels[azimuth * self.range + range]
    }

    pub fn scatterer_count(&self) -> usize {
        self.pixels.iter().map(Vec::len).sum()
    }
}

/// Surfaces present in one pixel, as (elevation, amplitude), ground first.
fn pixel_layers(cfg: &SceneConfig, geom: &ArrayGeometry, azimuth: usize, range: usize) -> Vec<(f64, f64)> {
    let floor = cfg.terrain_slope * range as f64;
    let ground = (floor, cfg.ground_amplitude);
    let building = match &cfg.building {
        Some(b) if (b.azimuth_start..b.azimuth_end).contains(&azimuth) && b.height > 0.0 => b,
        _ => return vec![ground],
    };
    let theta = geom.view_angle.to_radians();
    let dr = cfg.range_spacing;
    let x = range as f64;
    let base = building.base_range_bin;
    let top = base - building.height * theta.cos() / dr;
    let roof_end = top + building.depth * theta.sin() / dr;
    let footprint_end = base + building.depth * theta.sin() / dr;
    let shadow_end = footprint_end + building.height * theta.tan() * theta.sin() / dr;

    let mut layers = Vec::with_capacity(3);
    if x < base || x >= shadow_end {
        layers.push(ground);
    }
    if x >= top && x < base {
        let h = (base - x) * dr / theta.cos();
        layers.push((floor + h / theta.sin(), cfg.wall_amplitude));
    }
    if x >= top && x < roof_end {
        layers.push((floor + building.height / theta.sin(), cfg.roof_amplitude));
    }
    layers
}

/// Simulates the stack and its ground truth.
///
/// Reflectivities have the configured magnitudes and uniform random phases.
/// Each pixel draws its phases and its noise from its own random streams,
/// and element `n` always takes the `n`-th noise draw, so the first channels
/// of a larger array reproduce a smaller one.
pub fn simulate_building_scene(
    geom: &ArrayGeometry,
    cfg: &SceneConfig,
    seed: u64,
) -> Result<(SlcStack, GroundTruth)> {
    cfg.validate(geom)?;
    let mut stack = SlcStack::zeros(*geom, cfg.azimuth_size, cfg.range_size)?;
    let mut pixels = Vec::with_capacity(cfg.azimuth_size * cfg.range_size);
    for a in 0..cfg.azimuth_size {
        for r in 0..cfg.range_size {
            let pixel_index = (a * cfg.range_size + r) as u64;
            let mut phase_rng = ChaCha8Rng::seed_from_u64(seed ^ PHASE_STREAM_KEY);
            phase_rng.set_stream(pixel_index);
            let scatterers: Vec<Scatterer> = pixel_layers(cfg, geom, a, r)
                .into_iter()
                .map(|(elevation, amplitude)| {
                    let phase = phase_rng.random::<f64>() * 2.0 * PI;
                    Scatterer {
                        elevation,
                        reflectivity: Complex64::from_polar(amplitude, phase),
                    }
                })
                .collect();
            let mut g = synthesize(&scatterers, geom);
            if let Some(snr) = cfg.snr_db {
                let power: f64 = scatterers.iter().map(|s| s.reflectivity.norm_sqr()).sum();
                let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
                noise_rng.set_stream(pixel_index);
                add_noise(&mut g, noise_sigma_for(power, snr), &mut noise_rng);
            }
            stack.set_pixel(a, r, &g);
            pixels.push(scatterers);
        }
    }
    Ok((
        stack,
        GroundTruth {
            azimuth: cfg.azimuth_size,
            range: cfg.range_size,
            pixels,
        },
    ))
}

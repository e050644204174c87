//! TomoSAR forward model: array geometry, elevation/frequency mapping, echo
//! synthesis, building scenes and per-pixel volumetric reconstruction.

mod reconstruct;
mod scene;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::spectral::{atom, CVector};

pub use reconstruct::{
    reconstruct_volume, AmplitudeFloor, Diagnostics, EstimatorChoice, PixelFailure, Reconstruction,
};
pub use scene::{simulate_building_scene, BuildingConfig, GroundTruth, SceneConfig};

/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Uniform linear array of `N` phase centres with baselines `b_n = (n-1) d_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub n_elements: usize,
    /// Element spacing `d_s` (m).
    pub element_spacing: f64,
    /// Wavelength (m).
    pub wavelength: f64,
    /// Reference slant range `r0` (m).
    pub reference_range: f64,
    /// Look angle from vertical (degrees).
    pub view_angle: f64,
}

impl Default for ArrayGeometry {
    /// 8 elements at 0.11 m, X band (9.6 GHz), 1 km range, 45 degree view.
    fn default() -> Self {
        ArrayGeometry {
            n_elements: 8,
            element_spacing: 0.11,
            wavelength: SPEED_OF_LIGHT / 9.6e9,
            reference_range: 1000.0,
            view_angle: 45.0,
        }
    }
}

impl ArrayGeometry {
    pub fn new(
        n_elements: usize,
        element_spacing: f64,
        wavelength: f64,
        reference_range: f64,
        view_angle: f64,
    ) -> Result<Self> {
        let geom = ArrayGeometry {
            n_elements,
            element_spacing,
            wavelength,
            reference_range,
            view_angle,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_elements < 2 {
            return Err(Error::domain(format!(
                "array needs at least 2 elements, got {}",
                self.n_elements
            )));
        }
        for (name, value) in [
            ("element_spacing", self.element_spacing),
            ("wavelength", self.wavelength),
            ("reference_range", self.reference_range),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {value}")));
            }
        }
        if !(self.view_angle > 0.0 && self.view_angle < 90.0) {
            return Err(Error::domain(format!(
                "view_angle must lie in (0, 90) degrees, got {}",
                self.view_angle
            )));
        }
        Ok(())
    }

    /// Baseline of element `n` (zero-based), `n d_s`.
    pub fn baseline(&self, n: usize) -> f64 {
        n as f64 * self.element_spacing
    }

    /// Elevation aperture `(N-1) d_s`.
    pub fn aperture(&self) -> f64 {
        self.baseline(self.n_elements - 1)
    }

    /// Unambiguous elevation span `lambda r0 / (2 d_s)`.
    pub fn unambiguous_span(&self) -> f64 {
        self.wavelength * self.reference_range / (2.0 * self.element_spacing)
    }

    /// Spatial frequency `2 s d_s / (lambda r0)`, reduced modulo 1.
    pub fn freq_from_elevation(&self, s: f64) -> f64 {
        crate::spectral::wrap_frequency(s / self.unambiguous_span())
    }

    /// Inverse of [`freq_from_elevation`](Self::freq_from_elevation) on the unambiguous span.
    pub fn elevation_from_freq(&self, f: f64) -> f64 {
        f * self.unambiguous_span()
    }

    /// Rayleigh elevation resolution `lambda r0 / (2 (N-1) d_s)`.
    pub fn rayleigh_resolution(&self) -> f64 {
        self.wavelength * self.reference_range / (2.0 * self.aperture())
    }

    pub fn with_elements(&self, n_elements: usize) -> Self {
        ArrayGeometry {
            n_elements,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    /// Elevation (m).
    pub elevation: f64,
    pub reflectivity: Complex64,
}

impl Scatterer {
    pub fn new(elevation: f64, reflectivity: Complex64) -> Result<Self> {
        if !(elevation.is_finite() && reflectivity.re.is_finite() && reflectivity.im.is_finite()) {
            return Err(Error::domain("scatterer elevation and reflectivity must be finite"));
        }
        Ok(Scatterer {
            elevation,
            reflectivity,
        })
    }

    fn check_span(&self, geom: &ArrayGeometry) -> Result<()> {
        let span = geom.unambiguous_span();
        if !(0.0..span).contains(&self.elevation) {
            return Err(Error::domain(format!(
                "elevation {} m outside the unambiguous span [0, {span})",
                self.elevation
            )));
        }
        Ok(())
    }
}

/// Observation vector of one azimuth-range pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelEcho {
    pub g: CVector,
    /// Per-element noise standard deviation used in the synthesis.
    pub noise_sigma: f64,
}

/// Noise standard deviation giving `snr_db` over a total signal power.
pub fn noise_sigma_for(signal_power: f64, snr_db: f64) -> f64 {
    (signal_power / 10f64.powf(snr_db / 10.0)).sqrt()
}

/// Adds circular complex Gaussian noise of standard deviation `sigma` per
/// element; element `n` always takes the `n`-th draw of `rng`.
pub fn add_noise(g: &mut CVector, sigma: f64, rng: &mut ChaCha8Rng) {
    let scale = sigma / std::f64::consts::SQRT_2;
    for x in g.iter_mut() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *x += Complex64::new(re, im) * scale;
    }
}

/// Noiseless superposition `sum_k gamma_k a(f_k)`.
pub fn synthesize(scatterers: &[Scatterer], geom: &ArrayGeometry) -> CVector {
    let n = geom.n_elements;
    scatterers.iter().fold(CVector::zeros(n), |acc, s| {
        acc + atom(geom.freq_from_elevation(s.elevation), n) * s.reflectivity
    })
}

/// Echo `g = sum_k gamma_k a(f_k) + w` of one pixel.
///
/// The noise is scaled to `snr_db` relative to the total scatterer power
/// `sum_k |gamma_k|^2`; `None` gives a noiseless echo.
pub fn pixel_echo(
    scatterers: &[Scatterer],
    geom: &ArrayGeometry,
    snr_db: Option<f64>,
    seed: u64,
) -> Result<PixelEcho> {
    geom.validate()?;
    for s in scatterers {
        s.check_span(geom)?;
    }
    let mut g = synthesize(scatterers, geom);
    let noise_sigma = match snr_db {
        Some(snr) => {
            if !snr.is_finite() {
                return Err(Error::domain(format!("snr_db must be finite, got {snr}")));
            }
            let power: f64 = scatterers.iter().map(|s| s.reflectivity.norm_sqr()).sum();
            let sigma = noise_sigma_for(power, snr);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            add_noise(&mut g, sigma, &mut rng);
            sigma
        }
        None => 0.0,
    };
    Ok(PixelEcho { g, noise_sigma })
}

/// Channels x azimuth x range stack of single-look complex images.
#[derive(Debug, Clone, PartialEq)]
pub struct SlcStack {
    geometry: ArrayGeometry,
    azimuth: usize,
    range: usize,
    /// Channel-major, then azimuth, then range.
    data: Vec<Complex64>,
}

impl SlcStack {
    pub fn zeros(geometry: ArrayGeometry, azimuth: usize, range: usize) -> Result<Self> {
        geometry.validate()?;
        if azimuth == 0 || range == 0 {
            return Err(Error::domain("stack dimensions must be positive"));
        }
        Ok(SlcStack {
            data: vec![Complex64::new(0.0, 0.0); geometry.n_elements * azimuth * range],
            geometry,
            azimuth,
            range,
        })
    }

    pub fn from_data(
        geometry: ArrayGeometry,
        azimuth: usize,
        range: usize,
        data: Vec<Complex64>,
    ) -> Result<Self> {
        let stack = SlcStack::zeros(geometry, azimuth, range)?;
        if data.len() != stack.data.len() {
            return Err(Error::Shape {
                expected: format!("{} samples", stack.data.len()),
                got: format!("{} samples", data.len()),
            });
        }
        Ok(SlcStack { data, ..stack })
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn channels(&self) -> usize {
        self.geometry.n_elements
    }

    pub fn azimuth(&self) -> usize {
        self.azimuth
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    fn index(&self, channel: usize, azimuth: usize, range: usize) -> usize {
        (channel * self.azimuth + azimuth) * self.range + range
    }

    pub fn get(&self, channel: usize, azimuth: usize, range: usize) -> Complex64 {
        self.data[self.index(channel, azimuth, range)]
    }

    /// Observation vector of pixel `(azimuth, range)` across channels.
    pub fn pixel(&self, azimuth: usize, range: usize) -> CVector {
        CVector::from_fn(self.channels(), |c, _| self.get(c, azimuth, range))
    }

    pub fn set_pixel(&mut self, azimuth: usize, range: usize, g: &CVector) {
        assert_eq!(g.len(), self.channels(), "pixel length must match channel count");
        for (c, &x) in g.iter().enumerate() {
            let i = self.index(c, azimuth, range);
            self.data[i] = x;
        }
    }

    /// The first `n` channels as a stack of an `n`-element array.
    pub fn truncate_channels(&self, n: usize) -> Result<Self> {
        if n < 2 || n > self.channels() {
            return Err(Error::domain(format!(
                "cannot keep {n} of {} channels",
                self.channels()
            )));
        }
        let keep = n * self.azimuth * self.range;
        Ok(SlcStack {
            geometry: self.geometry.with_elements(n),
            azimuth: self.azimuth,
            range: self.range,
            data: self.data[..keep].to_vec(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudPoint {
    pub azimuth: usize,
    pub range: usize,
    /// Elevation above the ground reference (m).
    pub height: f64,
    pub intensity: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<CloudPoint>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Heights found at one pixel.
    pub fn heights_at(&self, azimuth: usize, range: usize) -> Vec<f64> {
        self.points
            .iter()
            .filter(|p| p.azimuth == azimuth && p.range == range)
            .map(|p| p.height)
            .collect()
    }
}

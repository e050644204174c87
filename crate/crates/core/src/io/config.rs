//! TOML run configuration.
//!
//! Every section is optional except `[geometry]`, which must at least give
//! `n_elements`. Unknown keys are rejected. Values are checked as they are
//! read and errors name the offending key, e.g. `geometry.n_elements`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bench::{SweepConfig, SweepKind};
use crate::error::{Error, Result};
use crate::estimators::{AdmmConfig, Algorithm, EstimatorSpec, GridConfig, IvdstConfig, Shrinkage};
use crate::tomosar::{
    AmplitudeFloor, ArrayGeometry, BuildingConfig, EstimatorChoice, SceneConfig, SPEED_OF_LIGHT,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    geometry: RawGeometry,
    estimator: Option<RawEstimator>,
    sweep: Option<RawSweep>,
    scene: Option<RawScene>,
    pixel: Option<RawPixel>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    n_elements: i64,
    element_spacing: Option<f64>,
    carrier_frequency: Option<f64>,
    wavelength: Option<f64>,
    reference_range: Option<f64>,
    view_angle: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEstimator {
    algorithm: Option<String>,
    max_order: Option<i64>,
    amplitude_floor: Option<f64>,
    noise_multiple: Option<f64>,
    ivdst: Option<RawIvdst>,
    sdp: Option<RawSdp>,
    grid: Option<RawGrid>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIvdst {
    step_size: Option<f64>,
    max_iters: Option<i64>,
    rel_tol: Option<f64>,
    threshold: Option<f64>,
    noise_sigma: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSdp {
    penalty: Option<f64>,
    max_iters: Option<i64>,
    primal_tol: Option<f64>,
    dual_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    grid_size: Option<i64>,
    ist_threshold: Option<f64>,
    ist_max_iters: Option<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    kind: Option<String>,
    grid: Option<Vec<f64>>,
    trials: Option<i64>,
    algorithms: Option<Vec<String>>,
    snr_db: Option<f64>,
    targets: Option<i64>,
    frequencies: Option<Vec<f64>>,
    min_separation: Option<f64>,
    eps: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    azimuth_size: Option<i64>,
    range_size: Option<i64>,
    range_spacing: Option<f64>,
    azimuth_spacing: Option<f64>,
    snr_db: Option<f64>,
    terrain_slope: Option<f64>,
    ground_amplitude: Option<f64>,
    wall_amplitude: Option<f64>,
    roof_amplitude: Option<f64>,
    building: Option<RawBuilding>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBuilding {
    enabled: Option<bool>,
    azimuth_start: Option<i64>,
    azimuth_end: Option<i64>,
    base_range_bin: Option<f64>,
    depth: Option<f64>,
    height: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPixel {
    frequencies: Option<Vec<f64>>,
    snr_db: Option<f64>,
    samples: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
}

/// Estimator selection shared by `estimate` and `reconstruct`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSettings {
    pub algorithm: Algorithm,
    /// Largest number of lines sought per pixel.
    pub max_order: usize,
    pub amplitude_floor: AmplitudeFloor,
    /// Explicit IVDST settings; `None` derives them per pixel.
    pub ivdst: Option<IvdstConfig>,
    pub sdp: AdmmConfig,
    pub grid_size: Option<usize>,
    pub ist_threshold: Option<f64>,
    pub ist_max_iters: Option<usize>,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        EstimatorSettings {
            algorithm: Algorithm::Ivdst,
            max_order: 3,
            amplitude_floor: AmplitudeFloor::default(),
            ivdst: None,
            sdp: AdmmConfig::default(),
            grid_size: None,
            ist_threshold: None,
            ist_max_iters: None,
        }
    }
}

impl EstimatorSettings {
    fn has_overrides(&self, algorithm: Algorithm) -> bool {
        match algorithm {
            Algorithm::Ivdst => self.ivdst.is_some(),
            Algorithm::Sdp => self.sdp != AdmmConfig::default(),
            Algorithm::Omp | Algorithm::Ist => {
                self.grid_size.is_some() || self.ist_threshold.is_some() || self.ist_max_iters.is_some()
            }
        }
    }

    /// Configuration of `algorithm` for an `n`-element array at noise level
    /// `noise_sigma`, with explicit settings taking precedence.
    pub fn spec(&self, algorithm: Algorithm, n: usize, noise_sigma: f64, k: usize) -> EstimatorSpec {
        let grid = |base: GridConfig| GridConfig {
            grid_size: self.grid_size.unwrap_or(base.grid_size),
            ist_threshold: self.ist_threshold.unwrap_or(base.ist_threshold),
            ist_max_iters: self.ist_max_iters.unwrap_or(base.ist_max_iters),
            omp_sparsity: base.omp_sparsity,
        };
        match EstimatorSpec::with_defaults(algorithm, n, noise_sigma, k) {
            EstimatorSpec::Ivdst(cfg) => EstimatorSpec::Ivdst(self.ivdst.unwrap_or(cfg)),
            EstimatorSpec::Sdp(_) => EstimatorSpec::Sdp(self.sdp),
            EstimatorSpec::Omp(cfg) => EstimatorSpec::Omp(grid(cfg)),
            EstimatorSpec::Ist(cfg) => EstimatorSpec::Ist(grid(cfg)),
        }
    }

    /// Per-pixel choice for `algorithm`: explicit settings are used as
    /// given, otherwise defaults follow each pixel's noise estimate.
    pub fn choice(&self, algorithm: Algorithm, n: usize) -> EstimatorChoice {
        if self.has_overrides(algorithm) {
            EstimatorChoice::Fixed(self.spec(algorithm, n, 0.0, self.max_order))
        } else {
            EstimatorChoice::Adaptive(algorithm)
        }
    }
}

/// Observation for the single-pixel `estimate` command.
#[derive(Debug, Clone, PartialEq)]
pub enum PixelSource {
    /// Unit lines with random phases at these frequencies; `snr_db` of
    /// `None` is noiseless.
    Synthetic { frequencies: Vec<f64>, snr_db: Option<f64> },
    /// Measured samples, one per element.
    Samples(Vec<num_complex::Complex64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub geometry: ArrayGeometry,
    pub estimator: EstimatorSettings,
    pub sweep: SweepConfig,
    pub scene: SceneConfig,
    /// Azimuth pixel spacing (m), used for point-cloud coordinates.
    pub azimuth_spacing: f64,
    pub pixel: Option<PixelSource>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            geometry: ArrayGeometry::default(),
            estimator: EstimatorSettings::default(),
            sweep: SweepConfig::default(),
            scene: SceneConfig::default(),
            azimuth_spacing: 1.0,
            pixel: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn count(path: &str, value: i64, min: i64) -> Result<usize> {
    if value < min {
        return Err(Error::config(path, format!("must be at least {min}, got {value}")));
    }
    usize::try_from(value).map_err(|_| Error::config(path, format!("{value} is out of range")))
}

fn positive(path: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::config(path, format!("must be positive and finite, got {value}")))
    }
}

fn non_negative(path: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::config(path, format!("must be non-negative and finite, got {value}")))
    }
}

fn finite(path: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::config(path, format!("must be finite, got {value}")))
    }
}

fn algorithm(path: &str, id: &str) -> Result<Algorithm> {
    id.parse().map_err(|_| {
        Error::config(path, format!("unknown algorithm `{id}` (expected ivdst-anm, sdp-anm, omp or ist)"))
    })
}

fn geometry(raw: RawGeometry) -> Result<ArrayGeometry> {
    let d = ArrayGeometry::default();
    let n_elements = count("geometry.n_elements", raw.n_elements, 2)?;
    if n_elements > u16::MAX as usize {
        return Err(Error::config("geometry.n_elements", format!("must be at most {}", u16::MAX)));
    }
    let wavelength = match (raw.wavelength, raw.carrier_frequency) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "geometry.wavelength",
                "give either wavelength or carrier_frequency, not both",
            ))
        }
        (Some(w), None) => positive("geometry.wavelength", w)?,
        (None, Some(f)) => SPEED_OF_LIGHT / positive("geometry.carrier_frequency", f)?,
        (None, None) => d.wavelength,
    };
    let view_angle = raw.view_angle.unwrap_or(d.view_angle);
    if !(view_angle > 0.0 && view_angle < 90.0) {
        return Err(Error::config("geometry.view_angle", format!("must lie in (0, 90) degrees, got {view_angle}")));
    }
    Ok(ArrayGeometry {
        n_elements,
        element_spacing: positive("geometry.element_spacing", raw.element_spacing.unwrap_or(d.element_spacing))?,
        wavelength,
        reference_range: positive("geometry.reference_range", raw.reference_range.unwrap_or(d.reference_range))?,
        view_angle,
    })
}

fn estimator(raw: RawEstimator, n: usize) -> Result<EstimatorSettings> {
    let d = EstimatorSettings::default();
    let algorithm = match raw.algorithm {
        Some(id) => algorithm("estimator.algorithm", &id)?,
        None => d.algorithm,
    };
    let max_order = match raw.max_order {
        Some(k) => count("estimator.max_order", k, 1)?,
        None => d.max_order.min(n - 1),
    };
    if max_order >= n {
        return Err(Error::config("estimator.max_order", format!("must be below n_elements = {n}")));
    }
    let amplitude_floor = match (raw.amplitude_floor, raw.noise_multiple) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "estimator.amplitude_floor",
                "give either amplitude_floor or noise_multiple, not both",
            ))
        }
        (Some(v), None) => AmplitudeFloor::Fixed(non_negative("estimator.amplitude_floor", v)?),
        (None, Some(v)) => AmplitudeFloor::NoiseMultiple(non_negative("estimator.noise_multiple", v)?),
        (None, None) => d.amplitude_floor,
    };
    let ivdst = raw.ivdst.map(ivdst).transpose()?;
    let sdp = match raw.sdp {
        Some(s) => {
            let base = AdmmConfig::default();
            AdmmConfig {
                penalty: positive("estimator.sdp.penalty", s.penalty.unwrap_or(base.penalty))?,
                max_iters: match s.max_iters {
                    Some(v) => count("estimator.sdp.max_iters", v, 1)?,
                    None => base.max_iters,
                },
                primal_tol: positive("estimator.sdp.primal_tol", s.primal_tol.unwrap_or(base.primal_tol))?,
                dual_tol: positive("estimator.sdp.dual_tol", s.dual_tol.unwrap_or(base.dual_tol))?,
            }
        }
        None => d.sdp,
    };
    let (grid_size, ist_threshold, ist_max_iters) = match raw.grid {
        Some(g) => (
            g.grid_size.map(|v| count("estimator.grid.grid_size", v, 2)).transpose()?,
            g.ist_threshold.map(|v| positive("estimator.grid.ist_threshold", v)).transpose()?,
            g.ist_max_iters.map(|v| count("estimator.grid.ist_max_iters", v, 1)).transpose()?,
        ),
        None => (None, None, None),
    };
    Ok(EstimatorSettings {
        algorithm,
        max_order,
        amplitude_floor,
        ivdst,
        sdp,
        grid_size,
        ist_threshold,
        ist_max_iters,
    })
}

fn ivdst(raw: RawIvdst) -> Result<IvdstConfig> {
    let base = IvdstConfig::default();
    let step_size = raw.step_size.unwrap_or(base.step_size);
    if !(step_size > 0.0 && step_size <= 1.0) {
        return Err(Error::config("estimator.ivdst.step_size", format!("must lie in (0, 1], got {step_size}")));
    }
    let shrinkage = match (raw.threshold, raw.noise_sigma) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "estimator.ivdst.threshold",
                "give either threshold or noise_sigma, not both",
            ))
        }
        (Some(t), None) => Shrinkage::Fixed(positive("estimator.ivdst.threshold", t)?),
        (None, Some(s)) => Shrinkage::NoiseSigma(positive("estimator.ivdst.noise_sigma", s)?),
        (None, None) => base.shrinkage,
    };
    Ok(IvdstConfig {
        step_size,
        shrinkage,
        max_iters: match raw.max_iters {
            Some(v) => count("estimator.ivdst.max_iters", v, 1)?,
            None => base.max_iters,
        },
        rel_tol: positive("estimator.ivdst.rel_tol", raw.rel_tol.unwrap_or(base.rel_tol))?,
    })
}

fn sweep(raw: RawSweep, geometry: ArrayGeometry, settings: &EstimatorSettings) -> Result<SweepConfig> {
    let d = SweepConfig::default();
    let kind = match raw.kind {
        Some(k) => k
            .parse::<SweepKind>()
            .map_err(|_| Error::config("sweep.kind", format!("unknown kind `{k}` (expected snr, elements, sparseness or scene)")))?,
        None => d.kind,
    };
    let grid = raw.grid.unwrap_or_else(|| default_grid(kind));
    if grid.is_empty() {
        return Err(Error::config("sweep.grid", "must not be empty"));
    }
    let algorithms = match raw.algorithms {
        Some(ids) => ids
            .iter()
            .map(|id| algorithm("sweep.algorithms", id))
            .collect::<Result<Vec<_>>>()?,
        None => d.algorithms,
    };
    if algorithms.is_empty() {
        return Err(Error::config("sweep.algorithms", "must name at least one algorithm"));
    }
    if let Some(freqs) = &raw.frequencies {
        if freqs.is_empty() || freqs.iter().any(|f| !(0.0..1.0).contains(f)) {
            return Err(Error::config("sweep.frequencies", "must be a non-empty list of values in [0, 1)"));
        }
    }
    let cfg = SweepConfig {
        kind,
        grid,
        trials: match raw.trials {
            Some(t) => count("sweep.trials", t, 1)?,
            None => d.trials,
        },
        algorithms,
        geometry,
        snr_db: match raw.snr_db {
            Some(s) if s.is_nan() => return Err(Error::config("sweep.snr_db", "must not be NaN")),
            Some(s) => s,
            None => d.snr_db,
        },
        targets: match raw.targets {
            Some(k) => count("sweep.targets", k, 1)?,
            None => d.targets,
        },
        frequencies: raw.frequencies,
        min_separation: raw.min_separation.map(|v| non_negative("sweep.min_separation", v)).transpose()?,
        eps: raw.eps.map(|v| positive("sweep.eps", v)).transpose()?,
        ivdst: settings.ivdst,
        sdp: settings.sdp,
        scene: d.scene,
        k_max: settings.max_order,
        amplitude_floor: settings.amplitude_floor,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Grid of each sweep kind when none is configured.
pub fn default_grid(kind: SweepKind) -> Vec<f64> {
    match kind {
        SweepKind::Snr | SweepKind::Scene => (0..11).map(|i| -10.0 + 5.0 * i as f64).collect(),
        SweepKind::Elements => vec![4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0],
        SweepKind::Sparseness => vec![0.1, 0.2, 0.25, 0.3, 0.4, 0.5],
    }
}

fn scene(raw: RawScene, geometry: &ArrayGeometry) -> Result<(SceneConfig, f64)> {
    let d = SceneConfig::default();
    let building = match raw.building {
        Some(b) if b.enabled == Some(false) => None,
        Some(b) => {
            let base = BuildingConfig::default();
            Some(BuildingConfig {
                azimuth_start: match b.azimuth_start {
                    Some(v) => count("scene.building.azimuth_start", v, 0)?,
                    None => base.azimuth_start,
                },
                azimuth_end: match b.azimuth_end {
                    Some(v) => count("scene.building.azimuth_end", v, 1)?,
                    None => base.azimuth_end,
                },
                base_range_bin: finite("scene.building.base_range_bin", b.base_range_bin.unwrap_or(base.base_range_bin))?,
                depth: positive("scene.building.depth", b.depth.unwrap_or(base.depth))?,
                height: non_negative("scene.building.height", b.height.unwrap_or(base.height))?,
            })
        }
        None => d.building,
    };
    let cfg = SceneConfig {
        azimuth_size: match raw.azimuth_size {
            Some(v) => count("scene.azimuth_size", v, 1)?,
            None => d.azimuth_size,
        },
        range_size: match raw.range_size {
            Some(v) => count("scene.range_size", v, 1)?,
            None => d.range_size,
        },
        range_spacing: positive("scene.range_spacing", raw.range_spacing.unwrap_or(d.range_spacing))?,
        snr_db: match raw.snr_db {
            Some(s) if s == f64::INFINITY => None,
            Some(s) => Some(finite("scene.snr_db", s)?),
            None => d.snr_db,
        },
        terrain_slope: non_negative("scene.terrain_slope", raw.terrain_slope.unwrap_or(d.terrain_slope))?,
        ground_amplitude: non_negative("scene.ground_amplitude", raw.ground_amplitude.unwrap_or(d.ground_amplitude))?,
        wall_amplitude: non_negative("scene.wall_amplitude", raw.wall_amplitude.unwrap_or(d.wall_amplitude))?,
        roof_amplitude: non_negative("scene.roof_amplitude", raw.roof_amplitude.unwrap_or(d.roof_amplitude))?,
        building,
    };
    cfg.validate(geometry)?;
    let azimuth_spacing = positive("scene.azimuth_spacing", raw.azimuth_spacing.unwrap_or(1.0))?;
    Ok((cfg, azimuth_spacing))
}

fn pixel(raw: RawPixel, n: usize) -> Result<PixelSource> {
    match (raw.frequencies, raw.samples) {
        (Some(_), Some(_)) => Err(Error::config("pixel.samples", "give either frequencies or samples, not both")),
        (None, None) => Err(Error::config("pixel.frequencies", "missing: give frequencies or samples")),
        (Some(frequencies), None) => {
            if frequencies.is_empty() || frequencies.iter().any(|f| !(0.0..1.0).contains(f)) {
                return Err(Error::config("pixel.frequencies", "must be a non-empty list of values in [0, 1)"));
            }
            let snr_db = match raw.snr_db {
                Some(s) if s == f64::INFINITY => None,
                Some(s) => Some(finite("pixel.snr_db", s)?),
                None => None,
            };
            Ok(PixelSource::Synthetic { frequencies, snr_db })
        }
        (None, Some(samples)) => {
            if raw.snr_db.is_some() {
                return Err(Error::config("pixel.snr_db", "only applies to synthetic frequencies"));
            }
            if samples.len() != n {
                return Err(Error::config(
                    "pixel.samples",
                    format!("expected {n} samples (one per element), got {}", samples.len()),
                ));
            }
            if samples.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::config("pixel.samples", "must be finite"));
            }
            Ok(PixelSource::Samples(
                samples.iter().map(|&[re, im]| num_complex::Complex64::new(re, im)).collect(),
            ))
        }
    }
}

/// Parses and validates a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.message().to_string()))?;
    let geometry = geometry(raw.geometry)?;
    let n = geometry.n_elements;
    let estimator = match raw.estimator {
        Some(e) => estimator(e, n)?,
        None => EstimatorSettings {
            max_order: EstimatorSettings::default().max_order.min(n - 1),
            ..EstimatorSettings::default()
        },
    };
    let (scene, azimuth_spacing) = match raw.scene {
        Some(s) => scene(s, &geometry)?,
        None => {
            let d = SceneConfig::default();
            d.validate(&geometry)?;
            (d, 1.0)
        }
    };
    let mut sweep = match raw.sweep {
        Some(s) => sweep(s, geometry, &estimator)?,
        None => SweepConfig {
            geometry,
            k_max: estimator.max_order,
            ivdst: estimator.ivdst,
            sdp: estimator.sdp,
            amplitude_floor: estimator.amplitude_floor,
            ..SweepConfig::default()
        },
    };
    sweep.scene = scene;
    Ok(RunConfig {
        seed: raw.seed.unwrap_or(0),
        geometry,
        estimator,
        sweep,
        scene,
        azimuth_spacing,
        pixel: raw.pixel.map(|p| pixel(p, n)).transpose()?,
        output_dir: raw
            .output
            .and_then(|o| o.directory)
            .unwrap_or_else(|| PathBuf::from("out")),
    })
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        path: path.display().to_string(),
        message: format!("cannot read config file: {e}"),
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_of(err: Error) -> String {
        match err {
            Error::Config { path, .. } => path,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn minimal_estimate_config() {
        let cfg = parse_config("[geometry]\nn_elements = 8\n\n[pixel]\nfrequencies = [0.25]\n").unwrap();
        assert_eq!(cfg.geometry, ArrayGeometry::default());
        assert_eq!(cfg.estimator.algorithm, Algorithm::Ivdst);
        assert_eq!(
            cfg.pixel,
            Some(PixelSource::Synthetic {
                frequencies: vec![0.25],
                snr_db: None
            })
        );
    }

    #[test]
    fn zero_elements_names_the_field() {
        let err = parse_config("[geometry]\nn_elements = 0\n").unwrap_err();
        assert_eq!(path_of(err), "geometry.n_elements");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config("[geometry]\nn_elements = 8\n[geomtry]\nn_elements = 8\n").unwrap_err();
        assert!(matches!(&err, Error::ConfigParse(m) if m.contains("geomtry")), "{err}");
        let err = parse_config("[geometry]\nn_elements = 8\nelement_spacng = 0.1\n").unwrap_err();
        assert!(matches!(&err, Error::ConfigParse(m) if m.contains("element_spacng")), "{err}");
    }

    #[test]
    fn missing_geometry_is_an_error() {
        let err = parse_config("seed = 3\n").unwrap_err();
        assert!(matches!(&err, Error::ConfigParse(m) if m.contains("geometry")), "{err}");
        let err = parse_config("[geometry]\nview_angle = 30\n").unwrap_err();
        assert!(matches!(&err, Error::ConfigParse(m) if m.contains("n_elements")), "{err}");
    }

    #[test]
    fn invariant_violations_name_their_path() {
        let cases = [
            ("[geometry]\nn_elements = 8\nelement_spacing = -1\n", "geometry.element_spacing"),
            ("[geometry]\nn_elements = 8\nview_angle = 90\n", "geometry.view_angle"),
            ("[geometry]\nn_elements = 8\n[estimator]\nmax_order = 8\n", "estimator.max_order"),
            ("[geometry]\nn_elements = 8\n[estimator]\nalgorithm = \"music\"\n", "estimator.algorithm"),
            ("[geometry]\nn_elements = 8\n[estimator.ivdst]\nstep_size = 1.5\n", "estimator.ivdst.step_size"),
            ("[geometry]\nn_elements = 8\n[sweep]\ntrials = 0\n", "sweep.trials"),
            ("[geometry]\nn_elements = 8\n[sweep]\nkind = \"fig3\"\n", "sweep.kind"),
            ("[geometry]\nn_elements = 8\n[scene]\nrange_size = 0\n", "scene.range_size"),
            ("[geometry]\nn_elements = 8\n[scene.building]\nheight = 1000\n", "scene.building.height"),
            ("[geometry]\nn_elements = 8\n[pixel]\nsamples = [[1, 0]]\n", "pixel.samples"),
            ("[geometry]\nn_elements = 8\n[pixel]\nsnr_db = 10\n", "pixel.frequencies"),
        ];
        for (text, path) in cases {
            assert_eq!(path_of(parse_config(text).unwrap_err()), path, "{text}");
        }
    }

    #[test]
    fn full_config_round_trips_into_types() {
        let text = r#"
seed = 42

[geometry]
n_elements = 16
element_spacing = 0.2
carrier_frequency = 5.0e9
reference_range = 700
view_angle = 35

[estimator]
algorithm = "omp"
max_order = 2
amplitude_floor = 0.5

[estimator.grid]
grid_size = 256

[sweep]
kind = "sparseness"
grid = [0.1, 0.2]
trials = 7
algorithms = ["ivdst-anm", "ist"]
snr_db = 20

[scene]
azimuth_size = 4
range_size = 32
azimuth_spacing = 2.5
snr_db = inf

[scene.building]
enabled = false

[output]
directory = "results"
"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.geometry.n_elements, 16);
        assert!((cfg.geometry.wavelength - SPEED_OF_LIGHT / 5e9).abs() < 1e-15);
        assert_eq!(cfg.estimator.amplitude_floor, AmplitudeFloor::Fixed(0.5));
        assert!(matches!(cfg.estimator.choice(Algorithm::Omp, 16), EstimatorChoice::Fixed(EstimatorSpec::Omp(g)) if g.grid_size == 256));
        assert_eq!(cfg.estimator.choice(Algorithm::Ivdst, 16), EstimatorChoice::Adaptive(Algorithm::Ivdst));
        assert_eq!(cfg.sweep.kind, SweepKind::Sparseness);
        assert_eq!(cfg.sweep.trials, 7);
        assert_eq!(cfg.sweep.algorithms, vec![Algorithm::Ivdst, Algorithm::Ist]);
        assert_eq!(cfg.sweep.geometry.n_elements, 16);
        assert_eq!(cfg.scene.snr_db, None);
        assert_eq!(cfg.scene.building, None);
        assert_eq!(cfg.azimuth_spacing, 2.5);
        assert_eq!(cfg.output_dir, PathBuf::from("results"));
    }
}

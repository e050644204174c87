//! Text formats: sweep and truth CSV, spectrum listings and ASCII PLY.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! re-reading recovers every `f64` exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::bench::{SweepKind, SweepRow, SweepTable};
use crate::error::{Error, Result};
use crate::spectral::LineSpectrum;
use crate::tomosar::{ArrayGeometry, GroundTruth, PointCloud, Scatterer};

pub const SWEEP_HEADER: [&str; 7] = [
    "param",
    "algorithm",
    "rmse_mean",
    "success_rate",
    "runtime_mean_s",
    "runtime_median_s",
    "trials",
];

pub const TRUTH_HEADER: [&str; 5] = ["azimuth", "range", "height_m", "re", "im"];

/// Rows in output order: by parameter, then algorithm id.
pub fn sorted_rows(table: &SweepTable) -> Vec<&SweepRow> {
    let mut rows: Vec<&SweepRow> = table.rows.iter().collect();
    rows.sort_by(|a, b| {
        a.param
            .total_cmp(&b.param)
            .then_with(|| a.algorithm.to_string().cmp(&b.algorithm.to_string()))
    });
    rows
}

pub fn write_sweep_csv(table: &SweepTable, path: &Path) -> Result<()> {
    if table.rows.is_empty() {
        return Err(Error::domain("cannot write an empty sweep table"));
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SWEEP_HEADER)?;
    for row in sorted_rows(table) {
        w.write_record([
            row.param.to_string(),
            row.algorithm.to_string(),
            row.rmse_mean.to_string(),
            row.success_rate.to_string(),
            row.runtime_mean.to_string(),
            row.runtime_median.to_string(),
            row.trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    let raw = record.get(i).unwrap_or_default();
    raw.trim()
        .parse()
        .map_err(|_| Error::Format(format!("line {line}: cannot parse `{raw}` in column {}", i + 1)))
}

fn check_header(reader: &mut csv::Reader<File>, expected: &[&str]) -> Result<()> {
    let header = reader.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Format(format!(
            "expected header `{}`, found `{}`",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

pub fn read_sweep_csv(path: &Path, kind: SweepKind) -> Result<SweepTable> {
    let mut reader = csv::Reader::from_path(path)?;
    check_header(&mut reader, &SWEEP_HEADER)?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i as u64 + 2;
        let algorithm = record
            .get(1)
            .unwrap_or_default()
            .parse()
            .map_err(|e| Error::Format(format!("line {line}: {e}")))?;
        rows.push(SweepRow {
            param: field(&record, 0, line)?,
            algorithm,
            rmse_mean: field(&record, 2, line)?,
            success_rate: field(&record, 3, line)?,
            runtime_mean: field(&record, 4, line)?,
            runtime_median: field(&record, 5, line)?,
            trials: field(&record, 6, line)?,
        });
    }
    Ok(SweepTable { kind, rows })
}

/// One line per true scatterer.
pub fn write_truth_csv(truth: &GroundTruth, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRUTH_HEADER)?;
    for a in 0..truth.azimuth() {
        for r in 0..truth.range() {
            for s in truth.at(a, r) {
                w.write_record([
                    a.to_string(),
                    r.to_string(),
                    s.elevation.to_string(),
                    s.reflectivity.re.to_string(),
                    s.reflectivity.im.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads the truth of an `azimuth x range` scene.
pub fn read_truth_csv(path: &Path, azimuth: usize, range: usize) -> Result<GroundTruth> {
    let mut reader = csv::Reader::from_path(path)?;
    check_header(&mut reader, &TRUTH_HEADER)?;
    let mut pixels = vec![Vec::new(); azimuth * range];
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i as u64 + 2;
        let (a, r): (usize, usize) = (field(&record, 0, line)?, field(&record, 1, line)?);
        if a >= azimuth || r >= range {
            return Err(Error::Format(format!("line {line}: pixel ({a}, {r}) outside the {azimuth}x{range} scene")));
        }
        let scatterer = Scatterer::new(
            field(&record, 2, line)?,
            Complex64::new(field(&record, 3, line)?, field(&record, 4, line)?),
        )
        .map_err(|e| Error::Format(format!("line {line}: {e}")))?;
        pixels[a * range + r].push(scatterer);
    }
    GroundTruth::new(azimuth, range, pixels)
}

/// Writes a spectrum as CSV `frequency,elevation_m,amplitude,re,im`.
pub fn write_spectrum(spectrum: &LineSpectrum, geom: &ArrayGeometry, out: &mut impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frequency", "elevation_m", "amplitude", "re", "im"])?;
    for line in &spectrum.lines {
        w.write_record([
            line.frequency.to_string(),
            geom.elevation_from_freq(line.frequency).to_string(),
            line.amplitude.norm().to_string(),
            line.amplitude.re.to_string(),
            line.amplitude.im.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Pixel spacing used to place cloud points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelSpacing {
    /// Azimuth spacing (m).
    pub azimuth: f64,
    /// Range spacing (m).
    pub range: f64,
}

/// ASCII PLY with `x` = azimuth position, `y` = range position (both m),
/// `z` = the point height as given, and `intensity`.
pub fn write_point_cloud_ply(cloud: &PointCloud, spacing: PixelSpacing, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(
        out,
        "ply\nformat ascii 1.0\ncomment tomo-anm point cloud\nelement vertex {}\n\
         property double x\nproperty double y\nproperty double z\nproperty double intensity\nend_header\n",
        cloud.len()
    )?;
    for p in &cloud.points {
        writeln!(
            out,
            "{} {} {} {}",
            p.azimuth as f64 * spacing.azimuth,
            p.range as f64 * spacing.range,
            p.height,
            p.intensity
        )?;
    }
    out.flush()?;
    Ok(())
}

//! Gridded compressed-sensing baselines over the dictionary
//! `A_M = { a(m / M) : m = 0..M }`.

use num_complex::Complex64;

use super::GridConfig;
use crate::error::{Error, Result};
use crate::spectral::{atom, check_vector, least_squares, CMatrix, CVector, LineSpectrum, SpectralLine};

/// Relative change below which IST stops.
pub const IST_REL_TOL: f64 = 1e-8;

fn dictionary(n: usize, grid_size: usize) -> CMatrix {
    let mut a = CMatrix::zeros(n, grid_size);
    for m in 0..grid_size {
        a.set_column(m, &atom(m as f64 / grid_size as f64, n));
    }
    a
}

fn check_grid(n: usize, cfg: &GridConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.grid_size < n {
        return Err(Error::domain(format!(
            "grid size {} must be >= observation length {n}",
            cfg.grid_size
        )));
    }
    Ok(())
}

/// Orthogonal matching pursuit: `k` greedy selections by residual correlation,
/// each followed by a full least-squares refit on the selected atoms.
pub fn omp_grid(g: &CVector, k: usize, cfg: &GridConfig) -> Result<LineSpectrum> {
    check_vector(g, "observation")?;
    let n = g.len();
    check_grid(n, cfg)?;
    if k == 0 {
        return Err(Error::domain("OMP sparsity must be >= 1"));
    }
    let m_total = cfg.grid_size;
    let dict = dictionary(n, m_total);
    let g_norm = g.norm();

    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut coeffs = CVector::zeros(0);
    let mut residual = g.clone();
    while selected.len() < k.min(m_total) {
        if residual.norm() <= 1e-12 * g_norm || g_norm == 0.0 {
            break;
        }
        let correlations = dict.adjoint() * &residual;
        let best = (0..m_total)
            .filter(|m| !selected.contains(m))
            .max_by(|&a, &b| correlations[a].norm().total_cmp(&correlations[b].norm()));
        let Some(best) = best else { break };
        selected.push(best);
        let sub = dict.select_columns(selected.iter());
        coeffs = least_squares(&sub, g);
        residual = g - &sub * &coeffs;
    }

    let mut lines: Vec<SpectralLine> = selected
        .iter()
        .zip(coeffs.iter())
        .map(|(&m, &amplitude)| SpectralLine {
            frequency: m as f64 / m_total as f64,
            amplitude,
        })
        .collect();
    lines.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    Ok(LineSpectrum::new(lines))
}

/// Iterative soft thresholding on the gridded synthesis model,
/// `x <- soft(x + A^H (g - A x) / L, threshold / L)` with `L = ||A^H A||_2`.
///
/// Returns every grid component whose magnitude exceeds the threshold.
pub fn ist_grid(g: &CVector, cfg: &GridConfig) -> Result<LineSpectrum> {
    check_vector(g, "observation")?;
    let n = g.len();
    check_grid(n, cfg)?;
    let m_total = cfg.grid_size;
    let dict = dictionary(n, m_total);
    // A A^H = M I for a uniform grid with M >= N
    let lipschitz = m_total as f64;
    let step_threshold = cfg.ist_threshold / lipschitz;

    let mut x = CVector::zeros(m_total);
    for _ in 0..cfg.ist_max_iters {
        let residual = g - &dict * &x;
        let mut next = &x + dict.adjoint() * residual / Complex64::new(lipschitz, 0.0);
        for c in next.iter_mut() {
            *c = soft_threshold(*c, step_threshold);
        }
        let change = (&next - &x).norm();
        let scale = next.norm();
        x = next;
        if change <= IST_REL_TOL * scale || scale == 0.0 {
            break;
        }
    }

    Ok(LineSpectrum::new(
        x.iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > cfg.ist_threshold)
            .map(|(m, &amplitude)| SpectralLine {
                frequency: m as f64 / m_total as f64,
                amplitude,
            })
            .collect(),
    ))
}

fn soft_threshold(c: Complex64, t: f64) -> Complex64 {
    let mag = c.norm();
    if mag <= t {
        Complex64::new(0.0, 0.0)
    } else {
        c * ((mag - t) / mag)
    }
}

/// Reduces a gridded spectrum to at most `k` peaks: components with a larger
/// immediate grid neighbour are dropped, then the strongest `k` are kept.
pub fn grid_peaks(spectrum: &LineSpectrum, grid_size: usize, k: usize) -> LineSpectrum {
    let index = |f: f64| (f * grid_size as f64).round() as i64;
    let magnitude_at = |m: i64| -> f64 {
        let wrapped = m.rem_euclid(grid_size as i64);
        spectrum
            .lines
            .iter()
            .find(|l| index(l.frequency).rem_euclid(grid_size as i64) == wrapped)
            .map_or(0.0, |l| l.amplitude.norm())
    };
    let peaks: Vec<SpectralLine> = spectrum
        .lines
        .iter()
        .copied()
        .filter(|l| {
            let m = index(l.frequency);
            let mag = l.amplitude.norm();
            magnitude_at(m - 1) <= mag && magnitude_at(m + 1) <= mag
        })
        .collect();
    LineSpectrum::new(peaks).strongest(k)
}

use nalgebra::SVD;
use num_complex::Complex64;

use super::{atom, check_vector, circular_distance, CMatrix, CVector};
use crate::error::{Error, Result};

/// Condition numbers above this make amplitude recovery fail.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    /// Normalized frequency in `[0, 1)`.
    pub frequency: f64,
    pub amplitude: Complex64,
}

/// A set of (frequency, complex amplitude) components.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LineSpectrum {
    pub lines: Vec<SpectralLine>,
}

impl LineSpectrum {
    pub fn new(lines: Vec<SpectralLine>) -> Self {
        Self { lines }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.lines.iter().map(|l| l.frequency).collect()
    }

    pub fn amplitudes(&self) -> Vec<Complex64> {
        self.lines.iter().map(|l| l.amplitude).collect()
    }

    /// Synthesizes `sum_k c_k a(f_k)` of length `n`.
    pub fn synthesize(&self, n: usize) -> CVector {
        let mut out = CVector::zeros(n);
        for line in &self.lines {
            out += atom(line.frequency, n) * line.amplitude;
        }
        out
    }

    /// Keeps the components whose amplitude magnitude is at least `floor`.
    pub fn above(&self, floor: f64) -> Self {
        Self::new(
            self.lines
                .iter()
                .copied()
                .filter(|l| l.amplitude.norm() >= floor)
                .collect(),
        )
    }

    /// The `k` strongest components, ordered by frequency.
    pub fn strongest(&self, k: usize) -> Self {
        let mut lines = self.lines.clone();
        lines.sort_by(|a, b| b.amplitude.norm().total_cmp(&a.amplitude.norm()));
        lines.truncate(k);
        lines.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
        Self::new(lines)
    }

    /// Minimum pairwise circular distance, `None` for fewer than two lines.
    pub fn min_separation(&self) -> Option<f64> {
        let f = self.frequencies();
        let mut best: Option<f64> = None;
        for i in 0..f.len() {
            for j in i + 1..f.len() {
                let d = circular_distance(f[i], f[j]);
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        }
        best
    }
}

/// Minimum-norm least-squares solution of `a c = y`; singular values below
/// `1e-12 * max` are treated as zero.
pub fn least_squares(a: &CMatrix, y: &CVector) -> CVector {
    let svd = SVD::new(a.clone(), true, true);
    let smax = svd.singular_values.max();
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut coeffs = u.adjoint() * y;
    for (c, &s) in coeffs.iter_mut().zip(svd.singular_values.iter()) {
        if s > 1e-12 * smax {
            *c /= s;
        } else {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    v_t.adjoint() * coeffs
}

/// Least-squares amplitudes for fixed frequencies:
/// `argmin_c || [a(f_1) .. a(f_K)] c - y ||`.
pub fn recover_amplitudes(y: &CVector, freqs: &[f64]) -> Result<LineSpectrum> {
    let rows: Vec<usize> = (0..y.len()).collect();
    recover_amplitudes_at(y, &rows, freqs)
}

/// Amplitude recovery from samples taken at array positions `rows`
/// (`y[i]` observed at element `rows[i]`).
pub fn recover_amplitudes_at(y: &CVector, rows: &[usize], freqs: &[f64]) -> Result<LineSpectrum> {
    check_vector(y, "observation")?;
    if rows.len() != y.len() {
        return Err(Error::Shape {
            expected: format!("{} sample positions", y.len()),
            got: format!("{}", rows.len()),
        });
    }
    let n = y.len();
    if freqs.is_empty() {
        return Ok(LineSpectrum::empty());
    }
    if freqs.len() > n {
        return Err(Error::domain(format!(
            "{} frequencies exceed observation length {n}",
            freqs.len()
        )));
    }
    let k = freqs.len();
    let mut a = CMatrix::zeros(n, k);
    for (j, &f) in freqs.iter().enumerate() {
        for (i, &row) in rows.iter().enumerate() {
            a[(i, j)] = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * f * row as f64);
        }
    }
    let svd = SVD::new(a, true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut coeffs = u.adjoint() * y;
    for (c, &s) in coeffs.iter_mut().zip(svd.singular_values.iter()) {
        *c /= s;
    }
    let c = v_t.adjoint() * coeffs;
    Ok(LineSpectrum::new(
        freqs
            .iter()
            .zip(c.iter())
            .map(|(&frequency, &amplitude)| SpectralLine {
                frequency,
                amplitude,
            })
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_single_fit() {
        let y = atom(0.1, 8) * Complex64::new(3.0, 0.0);
        let s = recover_amplitudes(&y, &[0.1]).unwrap();
        assert!((s.lines[0].amplitude - Complex64::new(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn exact_two_component_fit() {
        let y = atom(0.2, 8) + atom(0.7, 8) * Complex64::new(0.0, 2.0);
        let s = recover_amplitudes(&y, &[0.2, 0.7]).unwrap();
        assert!((s.lines[0].amplitude - Complex64::new(1.0, 0.0)).norm() < 1e-8);
        assert!((s.lines[1].amplitude - Complex64::new(0.0, 2.0)).norm() < 1e-8);
    }

    #[test]
    fn duplicate_frequencies_are_ill_conditioned() {
        let y = atom(0.2, 8);
        assert!(matches!(
            recover_amplitudes(&y, &[0.2, 0.7, 0.7]),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn near_duplicates_below_threshold_still_solve() {
        // condition number of this system is ~1.4e4, well under the cutoff
        let y = atom(0.2, 8);
        let s = recover_amplitudes(&y, &[0.2, 0.70001, 0.70002]).unwrap();
        assert!((s.lines[0].amplitude - Complex64::new(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn residual_is_orthogonal_to_atoms() {
        let y = atom(0.21, 8) + atom(0.66, 8) * Complex64::new(0.3, -0.2);
        let freqs = [0.2, 0.65];
        let s = recover_amplitudes(&y, &freqs).unwrap();
        let r = &y - s.synthesize(8);
        for &f in &freqs {
            assert!(atom(f, 8).dotc(&r).norm() < 1e-10);
        }
    }

    #[test]
    fn strongest_keeps_largest() {
        let s = LineSpectrum::new(vec![
            SpectralLine { frequency: 0.5, amplitude: Complex64::new(0.1, 0.0) },
            SpectralLine { frequency: 0.1, amplitude: Complex64::new(2.0, 0.0) },
            SpectralLine { frequency: 0.3, amplitude: Complex64::new(1.0, 0.0) },
        ]);
        assert_eq!(s.strongest(2).frequencies(), vec![0.1, 0.3]);
    }
}

//! Fine-grid maximum-likelihood line estimator used as a reference.
//!
//! For one or two lines in white noise the ML frequencies maximize the
//! energy of `g` projected onto the span of their steering vectors. The
//! search is exhaustive over a 10^4-point grid (all pairs for two lines),
//! then polished by alternating golden-section searches within one cell.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use tomo_anm::spectral::{steering_vector, CVector};

pub const ORACLE_GRID: usize = 10_000;

fn correlation(g: &CVector, f: f64) -> Complex64 {
    steering_vector(f, g.len()).unwrap().dotc(g)
}

fn dirichlet(n: usize, delta: f64) -> Complex64 {
    (0..n).map(|m| Complex64::from_polar(1.0, 2.0 * PI * delta * m as f64)).sum()
}

/// Projected energy for two lines from their correlations and cross term.
fn pair_energy(n: f64, b1: Complex64, b2: Complex64, c: Complex64) -> f64 {
    let det = n * n - c.norm_sqr();
    if det <= 1e-9 * n * n {
        return b1.norm_sqr().max(b2.norm_sqr()) / n;
    }
    (n * b1.norm_sqr() + n * b2.norm_sqr() - 2.0 * (b1.conj() * c * b2).re) / det
}

fn energy(g: &CVector, freqs: &[f64]) -> f64 {
    let n = g.len() as f64;
    match freqs {
        [f] => correlation(g, *f).norm_sqr() / n,
        [f1, f2] => pair_energy(n, correlation(g, *f1), correlation(g, *f2), dirichlet(g.len(), f2 - f1)),
        _ => unreachable!(),
    }
}

fn golden_max(mut lo: f64, mut hi: f64, objective: impl Fn(f64) -> f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (objective(a), objective(b));
    for _ in 0..80 {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = objective(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = objective(a);
        }
    }
    (lo + hi) / 2.0
}

/// ML frequencies of `k` (1 or 2) lines in `g`, in `[0, 1)`, ascending.
pub fn ml_frequencies(g: &CVector, k: usize) -> Vec<f64> {
    let n = g.len();
    let m = ORACLE_GRID;
    let step = 1.0 / m as f64;
    let b: Vec<Complex64> = (0..m).map(|i| correlation(g, i as f64 * step)).collect();
    let mut freqs = match k {
        1 => {
            let best = (0..m).max_by(|&x, &y| b[x].norm_sqr().total_cmp(&b[y].norm_sqr())).unwrap();
            vec![best as f64 * step]
        }
        2 => {
            let c: Vec<Complex64> = (0..m).map(|d| dirichlet(n, d as f64 * step)).collect();
            let nf = n as f64;
            let mut best = (f64::NEG_INFINITY, 0, 0);
            for i in 0..m {
                for j in i + 1..m {
                    let e = pair_energy(nf, b[i], b[j], c[j - i]);
                    if e > best.0 {
                        best = (e, i, j);
                    }
                }
            }
            vec![best.1 as f64 * step, best.2 as f64 * step]
        }
        _ => panic!("the oracle handles one or two lines"),
    };
    for _ in 0..20 {
        for i in 0..freqs.len() {
            let centre = freqs[i];
            let f = golden_max(centre - step, centre + step, |x| {
                let mut trial = freqs.clone();
                trial[i] = x;
                energy(g, &trial)
            });
            freqs[i] = f;
        }
    }
    let mut out: Vec<f64> = freqs.iter().map(|f| f.rem_euclid(1.0)).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Largest distance from each reference frequency to its nearest estimate.
pub fn max_error(estimate: &[f64], reference: &[f64]) -> f64 {
    reference
        .iter()
        .map(|r| {
            estimate
                .iter()
                .map(|e| tomo_anm::spectral::circular_distance(*e, *r))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

//! Gnuplot scripts for sweep tables.

use std::path::Path;

use crate::bench::{SweepKind, SweepTable};
use crate::error::{Error, Result};
use crate::estimators::Algorithm;

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Script plotting `table`, read from the CSV file `csv`. SNR sweeps plot
/// RMSE with the single-tone CRLB of an `n_elements` array, element sweeps
/// plot runtime on log-log axes and sparseness sweeps plot RMSE.
pub fn plot_script(table: &SweepTable, csv: &str, n_elements: usize) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::domain("cannot plot an empty sweep table"));
    }
    let (xlabel, ylabel, column, logx) = match table.kind {
        SweepKind::Snr => ("SNR (dB)", "frequency RMSE (cycles)", 3, false),
        SweepKind::Elements => ("number of elements N", "runtime (s)", 5, true),
        SweepKind::Sparseness => ("sparseness K/N", "frequency RMSE (cycles)", 3, false),
        SweepKind::Scene => {
            return Err(Error::domain("scene tables have no plot; use snr, elements or sparseness"))
        }
    };
    let mut algorithms: Vec<Algorithm> = Vec::new();
    for row in &table.rows {
        if !algorithms.contains(&row.algorithm) {
            algorithms.push(row.algorithm);
        }
    }
    let (lo, hi) = table
        .rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.param), hi.max(r.param)));
    let image = Path::new(csv).with_extension("png");

    let mut s = String::new();
    s.push_str("# gnuplot script generated by tomo-anm\n");
    s.push_str("set datafile separator \",\"\n");
    s.push_str("set terminal pngcairo size 800,600\n");
    s.push_str(&format!("set output {}\n", quoted(&image.to_string_lossy())));
    s.push_str(&format!("set xlabel {}\nset ylabel {}\n", quoted(xlabel), quoted(ylabel)));
    s.push_str("set grid\nset key top right\n");
    s.push_str(if logx { "set logscale xy\n" } else { "set logscale y\n" });
    if lo < hi {
        s.push_str(&format!("set xrange [{lo}:{hi}]\n"));
    }
    let mut series: Vec<String> = algorithms
        .iter()
        .map(|a| {
            format!(
                "{} skip 1 using 1:(strcol(2) eq {} ? ${column} : 1/0) with linespoints title {}",
                quoted(csv),
                quoted(a.id()),
                quoted(a.id())
            )
        })
        .collect();
    if table.kind == SweepKind::Snr {
        s.push_str(&format!("N = {n_elements}\n"));
        s.push_str("crlb(x) = sqrt(6.0 / ((2*pi)**2 * 10**(x/10.0) * N * (N*N - 1)))\n");
        series.push("crlb(x) with lines lc rgb \"black\" title \"CRLB\"".to_string());
    }
    s.push_str("plot ");
    s.push_str(&series.join(", \\\n     "));
    s.push('\n');
    Ok(s)
}

/// Writes [`plot_script`] output to `path`.
pub fn emit_plot_script(table: &SweepTable, csv: &Path, n_elements: usize, path: &Path) -> Result<()> {
    let csv = csv
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .ok_or_else(|| Error::domain("CSV path has no file name"))?;
    std::fs::write(path, plot_script(table, &csv, n_elements)?)?;
    Ok(())
}

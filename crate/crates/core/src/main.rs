use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use tomo_anm::bench::{crlb_single_tone, run_sweep, score_scene, synthetic_observation, SweepKind};
use tomo_anm::estimators::{estimate_noise_sigma, Algorithm};
use tomo_anm::io::{
    default_grid, emit_plot_script, load_config, read_slc_stack, read_truth_csv, sorted_rows, write_point_cloud_ply,
    write_slc_stack, write_spectrum, write_sweep_csv, write_truth_csv, PixelSource, PixelSpacing, RunConfig,
};
use tomo_anm::spectral::CVector;
use tomo_anm::tomosar::{reconstruct_volume, simulate_building_scene, GroundTruth, SlcStack};
use tomo_anm::{Error, Result};

/// Gridless TomoSAR elevation estimation by atomic norm minimization.
#[derive(Debug, Parser)]
#[command(name = "tomo-anm", version)]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master random seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte-Carlo trials per grid point (overrides the config).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Comma-separated algorithms: ivdst-anm, sdp-anm, omp, ist.
    #[arg(long, global = true, value_delimiter = ',')]
    algos: Option<Vec<String>>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the building scene; writes stack.tsar and truth.csv.
    Simulate,
    /// Estimate the spectrum of one pixel and print it as CSV.
    Estimate {
        /// Take the pixel from this stack instead of the config.
        #[arg(long, requires_all = ["azimuth", "range"])]
        stack: Option<PathBuf>,
        #[arg(long)]
        azimuth: Option<usize>,
        #[arg(long)]
        range: Option<usize>,
    },
    /// Reconstruct a stack into point clouds, one PLY per algorithm.
    Reconstruct {
        /// Stack file; the configured scene is simulated when omitted.
        #[arg(long)]
        stack: Option<PathBuf>,
        /// Ground truth CSV for scoring a stack file.
        #[arg(long, requires = "stack")]
        truth: Option<PathBuf>,
    },
    /// Run a Monte-Carlo sweep; writes the CSV table and a gnuplot script.
    Sweep {
        /// snr, elements, sparseness or scene (overrides the config).
        #[arg(long)]
        kind: Option<String>,
    },
    /// Print the single-tone Cramer-Rao bound over an SNR grid.
    Crlb {
        /// Array sizes (default: the configured array).
        #[arg(long, value_delimiter = ',')]
        elements: Option<Vec<usize>>,
        /// SNR grid in dB (default: -10 to 40 in steps of 5).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        snr: Option<Vec<f64>>,
    },
}

fn usage(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

fn reason(e: Error) -> String {
    match e {
        Error::Domain(m) => m,
        other => other.to_string(),
    }
}

fn algorithms(cli: &Cli, default: &[Algorithm]) -> Result<Vec<Algorithm>> {
    match &cli.algos {
        None => Ok(default.to_vec()),
        Some(ids) if ids.is_empty() => Err(usage("--algos", "must name at least one algorithm")),
        Some(ids) => ids
            .iter()
            .map(|id| id.parse::<Algorithm>().map_err(|e| usage("--algos", reason(e))))
            .collect(),
    }
}

fn output_dir(cfg: &RunConfig) -> Result<&Path> {
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| {
        usage("output.directory", format!("cannot create {}: {e}", cfg.output_dir.display()))
    })?;
    Ok(&cfg.output_dir)
}

fn input(path: &Path, flag: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(flag, format!("{} does not exist", path.display())))
    }
}

fn simulate(cfg: &RunConfig) -> Result<(SlcStack, GroundTruth)> {
    simulate_building_scene(&cfg.geometry, &cfg.scene, cfg.seed)
}

fn cmd_simulate(cfg: &RunConfig) -> Result<()> {
    let (stack, truth) = simulate(cfg)?;
    let dir = output_dir(cfg)?;
    write_slc_stack(&stack, &dir.join("stack.tsar"))?;
    write_truth_csv(&truth, &dir.join("truth.csv"))?;
    println!(
        "wrote {} ({}x{}x{}) and {} ({} scatterers)",
        dir.join("stack.tsar").display(),
        stack.channels(),
        stack.azimuth(),
        stack.range(),
        dir.join("truth.csv").display(),
        truth.scatterer_count()
    );
    Ok(())
}

fn cmd_estimate(
    cli: &Cli,
    cfg: &RunConfig,
    stack: &Option<PathBuf>,
    azimuth: Option<usize>,
    range: Option<usize>,
) -> Result<()> {
    let algos = algorithms(cli, &[cfg.estimator.algorithm])?;
    let mut k = cfg.estimator.max_order;
    let (g, geometry, sigma): (CVector, _, Option<f64>) = match stack {
        Some(path) => {
            input(path, "--stack")?;
            let stack = read_slc_stack(path, &cfg.geometry)?;
            let (a, r) = (azimuth.unwrap_or(0), range.unwrap_or(0));
            if a >= stack.azimuth() || r >= stack.range() {
                return Err(usage(
                    "--azimuth",
                    format!("pixel ({a}, {r}) outside the {}x{} stack", stack.azimuth(), stack.range()),
                ));
            }
            (stack.pixel(a, r), *stack.geometry(), None)
        }
        None => match &cfg.pixel {
            Some(PixelSource::Synthetic { frequencies, snr_db }) => {
                let n = cfg.geometry.n_elements;
                k = frequencies.len();
                if k >= n {
                    return Err(usage("pixel.frequencies", format!("at most {} lines fit {n} elements", n - 1)));
                }
                let draw = synthetic_observation(
                    n,
                    frequencies.len(),
                    Some(frequencies),
                    0.0,
                    snr_db.unwrap_or(f64::INFINITY),
                    cfg.seed,
                )?;
                (draw.g, cfg.geometry, Some(draw.noise_sigma))
            }
            Some(PixelSource::Samples(samples)) => (CVector::from_vec(samples.clone()), cfg.geometry, None),
            None => return Err(usage("pixel", "give a [pixel] section or --stack with --azimuth and --range")),
        },
    };
    let n = geometry.n_elements;
    let k = k.min(n - 1);
    let sigma = sigma.unwrap_or_else(|| estimate_noise_sigma(&g));
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for alg in algos {
        let spec = cfg.estimator.spec(alg, n, sigma, k);
        let spectrum = spec.estimate_at_most(&g, k)?;
        writeln!(out, "# {alg}")?;
        write_spectrum(&spectrum, &geometry, &mut out)?;
    }
    Ok(())
}

fn cmd_reconstruct(cli: &Cli, cfg: &RunConfig, stack: &Option<PathBuf>, truth: &Option<PathBuf>) -> Result<()> {
    let algos = algorithms(cli, &[cfg.estimator.algorithm])?;
    let (stack, truth) = match stack {
        Some(path) => {
            input(path, "--stack")?;
            let stack = read_slc_stack(path, &cfg.geometry)?;
            let truth = match truth {
                Some(t) => {
                    input(t, "--truth")?;
                    Some(read_truth_csv(t, stack.azimuth(), stack.range())?)
                }
                None => None,
            };
            (stack, truth)
        }
        None => {
            let (stack, truth) = simulate(cfg)?;
            (stack, Some(truth))
        }
    };
    let n = stack.channels();
    let k_max = cfg.estimator.max_order;
    if k_max >= n {
        return Err(usage("estimator.max_order", format!("must be below the stack's {n} channels")));
    }
    let dir = output_dir(cfg)?;
    let spacing = PixelSpacing {
        azimuth: cfg.azimuth_spacing,
        range: cfg.scene.range_spacing,
    };
    let eps = cfg.sweep.eps.unwrap_or(1.0 / (2.0 * n as f64));
    println!("algorithm,points,skipped,runtime_s,rmse_m,rmse_frequency,matched_rmse_m,matched,missed,spurious,pixel_success");
    for alg in algos {
        let choice = cfg.estimator.choice(alg, n);
        let start = Instant::now();
        let rec = reconstruct_volume(&stack, &choice, k_max, cfg.estimator.amplitude_floor)?;
        let runtime = start.elapsed().as_secs_f64();
        write_point_cloud_ply(&rec.cloud, spacing, &dir.join(format!("cloud_{alg}.ply")))?;
        let score = match &truth {
            Some(t) => {
                let s = score_scene(&rec.cloud, t, stack.geometry(), eps)?;
                format!(
                    "{},{},{},{},{},{},{}",
                    s.rmse, s.rmse_frequency, s.matched_rmse, s.matched, s.missed, s.spurious, s.pixel_success
                )
            }
            None => ",,,,,,".to_string(),
        };
        println!("{alg},{},{},{runtime},{score}", rec.cloud.len(), rec.diagnostics.skipped);
    }
    Ok(())
}

fn cmd_sweep(cli: &Cli, cfg: &RunConfig, kind: &Option<String>) -> Result<()> {
    let mut sweep = cfg.sweep.clone();
    if let Some(k) = kind {
        let k: SweepKind = k.parse().map_err(|e| usage("--kind", reason(e)))?;
        if k != sweep.kind {
            sweep.kind = k;
            sweep.grid = default_grid(k);
        }
    }
    if let Some(t) = cli.trials {
        if t == 0 {
            return Err(usage("--trials", "must be at least 1"));
        }
        sweep.trials = t;
    }
    sweep.algorithms = algorithms(cli, &sweep.algorithms)?;
    let table = run_sweep(&sweep, cfg.seed)?;
    let dir = output_dir(cfg)?;
    let csv = dir.join(format!("sweep_{}.csv", sweep.kind));
    write_sweep_csv(&table, &csv)?;
    if sweep.kind != SweepKind::Scene {
        emit_plot_script(&table, &csv, sweep.geometry.n_elements, &dir.join(format!("sweep_{}.gp", sweep.kind)))?;
    }
    println!("param,algorithm,rmse_mean,success_rate,runtime_mean_s,runtime_median_s,trials");
    for r in sorted_rows(&table) {
        println!(
            "{},{},{},{},{},{},{}",
            r.param, r.algorithm, r.rmse_mean, r.success_rate, r.runtime_mean, r.runtime_median, r.trials
        );
    }
    Ok(())
}

fn cmd_crlb(cfg: &RunConfig, elements: &Option<Vec<usize>>, snr: &Option<Vec<f64>>) -> Result<()> {
    let elements = elements.clone().unwrap_or_else(|| vec![cfg.geometry.n_elements]);
    let snr = snr.clone().unwrap_or_else(|| default_grid(SweepKind::Snr));
    println!("n,snr_db,variance,rmse");
    for &n in &elements {
        for &s in &snr {
            let v = crlb_single_tone(n, s).map_err(|e| usage("--elements", reason(e)))?;
            println!("{n},{s},{v},{}", v.sqrt());
        }
    }
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("TOMO_ANM_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| usage("TOMO_ANM_THREADS", format!("must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| usage("TOMO_ANM_THREADS", e.to_string()))
}

fn run(cli: &Cli) -> Result<()> {
    configure_threads()?;
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.output {
        cfg.output_dir = dir.clone();
    }
    match &cli.command {
        Command::Simulate => cmd_simulate(&cfg),
        Command::Estimate { stack, azimuth, range } => cmd_estimate(cli, &cfg, stack, *azimuth, *range),
        Command::Reconstruct { stack, truth } => cmd_reconstruct(cli, &cfg, stack, truth),
        Command::Sweep { kind } => cmd_sweep(cli, &cfg, kind),
        Command::Crlb { elements, snr } => cmd_crlb(&cfg, elements, snr),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}

use std::path::Path;
use std::process::{Command, Output};

fn tomo(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tomo-anm"))
        .current_dir(dir)
        .env("TOMO_ANM_THREADS", "2")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const SMALL_SCENE: &str = "seed = 5\n[geometry]\nn_elements = 8\n[scene]\nazimuth_size = 3\nrange_size = 40\n\
                           [scene.building]\nazimuth_start = 1\nazimuth_end = 2\n";

#[test]
fn crlb_prints_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = tomo(dir.path(), &["crlb", "--snr", "30", "--elements", "8,16"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,snr_db,variance,rmse");
    assert_eq!(lines.len(), 3);
    let v: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!((v - 3.0155e-7).abs() < 1e-10);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&tomo(dir.path(), &["bogus"])), 1);
    assert_eq!(code(&tomo(dir.path(), &["sweep", "--kind", "nope"])), 1);
    assert_eq!(code(&tomo(dir.path(), &["estimate", "--algos", "music"])), 1);
    assert_eq!(code(&tomo(dir.path(), &["--config", "missing.toml", "crlb"])), 1);
    assert_eq!(code(&tomo(dir.path(), &["reconstruct", "--stack", "missing.tsar"])), 1);
    write(dir.path(), "bad.toml", "[geometry]\nn_elements = 0\n");
    let out = tomo(dir.path(), &["--config", "bad.toml", "crlb"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stderr).unwrap().contains("geometry.n_elements"));
    write(dir.path(), "typo.toml", "[geomtry]\nn_elements = 8\n");
    assert_eq!(code(&tomo(dir.path(), &["--config", "typo.toml", "crlb"])), 1);
    write(dir.path(), "junk.tsar", "XXXX0000000000000000");
    assert_eq!(code(&tomo(dir.path(), &["reconstruct", "--stack", "junk.tsar"])), 1);
    assert_eq!(code(&tomo(dir.path(), &["--help"])), 0);
}

#[test]
fn numerical_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "sdp.toml",
        "[geometry]\nn_elements = 8\n[pixel]\nfrequencies = [0.2, 0.6]\nsnr_db = 20\n[estimator.sdp]\nmax_iters = 1\n",
    );
    let out = tomo(dir.path(), &["--config", "sdp.toml", "estimate", "--algos", "sdp-anm"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn estimate_recovers_a_configured_pixel() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.toml", "[geometry]\nn_elements = 16\n[pixel]\nfrequencies = [0.3]\n");
    let out = tomo(dir.path(), &["--config", "p.toml", "estimate"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# ivdst-anm");
    assert_eq!(lines.len(), 3);
    let f: f64 = lines[2].split(',').next().unwrap().parse().unwrap();
    assert!((f - 0.3).abs() < 1e-6, "{f}");
}

#[test]
fn simulate_then_reconstruct_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "scene.toml", SMALL_SCENE);
    assert_eq!(code(&tomo(d, &["--config", "scene.toml", "simulate", "--output", "a"])), 0);
    assert_eq!(code(&tomo(d, &["--config", "scene.toml", "simulate", "--output", "b"])), 0);
    assert_eq!(std::fs::read(d.join("a/stack.tsar")).unwrap(), std::fs::read(d.join("b/stack.tsar")).unwrap());
    assert_eq!(std::fs::read(d.join("a/truth.csv")).unwrap(), std::fs::read(d.join("b/truth.csv")).unwrap());

    for out_dir in ["a", "b"] {
        let out = tomo(
            d,
            &[
                "--config", "scene.toml", "reconstruct", "--stack", "a/stack.tsar", "--truth", "a/truth.csv",
                "--algos", "ivdst,omp", "--output", out_dir,
            ],
        );
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().starts_with("ivdst-anm,"));
    }
    for name in ["cloud_ivdst-anm.ply", "cloud_omp.ply"] {
        let a = std::fs::read(d.join("a").join(name)).unwrap();
        assert!(a.starts_with(b"ply\n"));
        assert_eq!(a, std::fs::read(d.join("b").join(name)).unwrap());
    }
}

#[test]
fn sweep_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let columns = |dir: &str| -> Vec<String> {
        let text = std::fs::read_to_string(d.join(dir).join("sweep_snr.csv")).unwrap();
        // runtimes vary between runs; every other column must not
        text.lines()
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                [f[0], f[1], f[2], f[3], f[6]].join(",")
            })
            .collect()
    };
    for out_dir in ["a", "b"] {
        let out = tomo(d, &["sweep", "--kind", "snr", "--trials", "3", "--algos", "ivdst,omp", "--seed", "11", "--output", out_dir]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = columns("a");
    assert_eq!(a[0], "param,algorithm,rmse_mean,success_rate,trials");
    assert_eq!(a.len(), 1 + 11 * 2);
    assert_eq!(a, columns("b"));
    let script = std::fs::read_to_string(d.join("a/sweep_snr.gp")).unwrap();
    assert!(script.contains("sweep_snr.csv") && script.contains("CRLB"));
}

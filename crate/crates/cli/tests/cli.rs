use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn relcurrent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relcurrent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut all = args.to_vec();
    all.extend(["--out", out]);
    relcurrent(&all)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn bad_usage_exits_64() {
    assert_eq!(code(&relcurrent(&["nogo", "--no-such-flag"])), 64);
    assert_eq!(code(&relcurrent(&["nogo", "--nodes", "4"])), 64);
    assert_eq!(code(&relcurrent(&["nogo", "--spin", "1/3"])), 64);
    assert_eq!(code(&relcurrent(&["nogo", "--boost", "1,0,0"])), 64);
    assert_eq!(
        code(&relcurrent(&["nogo", "--spin", "1", "--weights", "1,0"])),
        64
    );
    assert_eq!(code(&relcurrent(&["--help"])), 0);
}

#[test]
fn scalar_deficit_is_negative_and_matches_closed_form() {
    let tmp = TempDir::new().unwrap();
    let o = run_in(tmp.path(), &["nogo", "--spin", "0", "--compare-analytic"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&tmp.path().join("results.csv"));
    assert_eq!(rows.len(), 1);
    let deficit: f64 = rows[0][4].parse().unwrap();
    let analytic: f64 = rows[0][5].parse().unwrap();
    assert!(deficit < 0.0);
    assert!(((deficit - analytic) / analytic).abs() < 1e-6);
    let report = fs::read_to_string(tmp.path().join("report.txt")).unwrap();
    assert!(report.contains("config.spins = 0"));
    assert!(report.contains("tolerance.quadrature-gate = 1e-8"));
}

#[test]
fn sweep_writes_one_row_per_spin_and_width() {
    let tmp = TempDir::new().unwrap();
    let o = run_in(
        tmp.path(),
        &["nogo", "--sweep", "0,1/2,1", "--sigma", "0.2,0.3,0.4"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&tmp.path().join("results.csv"));
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r[4].parse::<f64>().unwrap() < 0.0));
    assert_eq!(rows[8][0], "1");
    assert_eq!(rows[8][5], "", "no closed form above spin 1/2");
}

#[test]
fn reruns_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = [
        "nogo",
        "--spin",
        "1/2",
        "--sigma",
        "0.3",
        "--p0",
        "0.2,0,0.1",
        "--threads",
        "1",
        "--rotate",
        "0,0.4,0",
    ];
    assert_eq!(code(&run_in(a.path(), &args)), 0);
    assert_eq!(code(&run_in(b.path(), &args)), 0);
    for f in ["report.txt", "results.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
    assert!(a.path().join("timings.txt").exists());
}

#[test]
fn rotated_frame_reproduces_the_deficit() {
    let tmp = TempDir::new().unwrap();
    let o = run_in(
        tmp.path(),
        &["nogo", "--sigma", "0.3", "--rotate", "0.3,-0.2,0.9"],
    );
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&tmp.path().join("results.csv"));
    assert_eq!(
        (rows[0][0].as_str(), rows[1][0].as_str()),
        ("rest", "rotated")
    );
    let rest: f64 = rows[0][5].parse().unwrap();
    let rotated: f64 = rows[1][5].parse().unwrap();
    assert!(((rest - rotated) / rest).abs() < 1e-9);
}

#[test]
fn dirac_control_passes_and_rejects_other_spins() {
    let tmp = TempDir::new().unwrap();
    let o = run_in(tmp.path(), &["dirac-control", "--sigma", "0.3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let rows = csv_rows(&tmp.path().join("results.csv"));
    for r in rows.iter().filter(|r| r[2] == "second-set") {
        let measured: f64 = r[5].parse().unwrap();
        let expected: f64 = r[6].parse().unwrap();
        assert!((measured - expected).abs() < 1e-5);
    }
    assert_eq!(
        code(&run_in(tmp.path(), &["dirac-control", "--spin", "1"])),
        64
    );
}

#[test]
fn density_line_is_symmetric_and_reports_parseval_norm() {
    let tmp = TempDir::new().unwrap();
    let o = run_in(
        tmp.path(),
        &["density", "--spin", "0", "--points", "21", "--extent", "3"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let path = tmp.path().join("density.csv");
    let rows = csv_rows(&path);
    assert_eq!(rows.len(), 21);
    let rho: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    for i in 0..21 {
        assert!((rho[i] - rho[20 - i]).abs() < 1e-12 * rho[10]);
    }
    assert!(rho[10] > rho[9] && rho[9] > rho[0]);
    let text = fs::read_to_string(&path).unwrap();
    let footer = text
        .lines()
        .find_map(|l| l.strip_prefix("# parseval_norm = "))
        .expect("footer present");
    assert!((footer.parse::<f64>().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn density_refuses_oversized_grids() {
    let tmp = TempDir::new().unwrap();
    let o = run_in(
        tmp.path(),
        &["density", "--geometry", "volume", "--points", "300"],
    );
    assert_eq!(code(&o), 64);
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds"));
    assert!(!tmp.path().join("density.csv").exists());
}

#[test]
fn coarse_check_names_the_failing_suite() {
    let tmp = TempDir::new().unwrap();
    let o = run_in(
        tmp.path(),
        &[
            "check",
            "--nodes",
            "8",
            "--suite",
            "quadrature-gate,lorentz-metric",
        ],
    );
    assert_eq!(code(&o), 1);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("failing suites: quadrature-gate"));
    assert!(stdout.contains("PASS lorentz-metric"));
    assert_eq!(
        code(&run_in(tmp.path(), &["check", "--suite", "nonsense"])),
        64
    );
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# scalar sweep\nspin = 0\nsigma = 0.2, 0.3\n").unwrap();
    let o = run_in(
        tmp.path(),
        &["nogo", "--config", cfg.to_str().unwrap(), "--sigma", "0.25"],
    );
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&tmp.path().join("results.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0..2], ["0".to_string(), "0.25".to_string()]);

    fs::write(&cfg, "colour = blue\n").unwrap();
    let o = run_in(tmp.path(), &["nogo", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 64);
}

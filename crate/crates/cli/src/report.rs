//! Run artifacts: `report.txt` (manifest), `results.csv` and friends, `timings.txt`.
//!
//! Everything except `timings.txt` is a pure function of the configuration, so a rerun
//! with the same manifest reproduces those files byte for byte.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};

use crate::config::RunConfig;

#[derive(Debug, Default)]
pub struct Manifest {
    records: Vec<(String, String)>,
    timings: Vec<(String, Duration)>,
}

impl Manifest {
    pub fn new(cfg: &RunConfig) -> Self {
        let mut m = Self::default();
        m.put(
            "tool",
            format!("relcurrent-cli {}", env!("CARGO_PKG_VERSION")),
        );
        m.put("library", format!("relcurrent {}", relcurrent::VERSION));
        for (k, v) in cfg.echo() {
            m.put(format!("config.{k}"), v);
        }
        for (k, v) in tolerances() {
            m.put(format!("tolerance.{k}"), format!("{v:e}"));
        }
        m
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.records.push((key.into(), value.to_string()));
    }

    pub fn time(&mut self, key: impl Into<String>, elapsed: Duration) {
        self.timings.push((key.into(), elapsed));
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut text = String::new();
        for (k, v) in &self.records {
            text.push_str(&format!("{k} = {v}\n"));
        }
        write_file(&dir.join("report.txt"), &text)?;
        let mut timings = String::new();
        for (k, d) in &self.timings {
            timings.push_str(&format!("{k} = {:.3}\n", d.as_secs_f64()));
        }
        write_file(&dir.join("timings.txt"), &timings)
    }
}

fn tolerances() -> Vec<(&'static str, f64)> {
    use relcurrent::tolerance::*;
    vec![
        ("analytic-agreement", ANALYTIC_AGREEMENT),
        ("boundary-mass", BOUNDARY_MASS),
        ("dirac-control", DIRAC_CONTROL),
        ("quadrature-gate", QUADRATURE_GATE),
        ("separation-factor", SEPARATION_FACTOR),
    ]
}

pub fn prepare_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.to_path_buf())
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(text.as_bytes())
        .with_context(|| format!("writing {}", path.display()))
}

/// Writes a header and rows, then optional `# key = value` footer lines.
pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: &[Vec<String>],
    footer: &[String],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let mut bytes = w.into_inner().context("flushing csv")?;
    for line in footer {
        bytes.extend_from_slice(format!("# {line}\n").as_bytes());
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Fixed-width scientific notation so tables diff cleanly.
pub fn num(v: f64) -> String {
    format!("{v:.12e}")
}

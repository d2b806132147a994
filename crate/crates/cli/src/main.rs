//! `relcurrent`: covariance audits of one-particle probability currents.
//!
//! Exit codes: 0 pass, 1 failed assertion, 2 inconclusive numerics, 64 bad usage.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Status;
use crate::config::{RunConfig, Settings, UsageError};

const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "relcurrent",
    version,
    about = "Covariance audits of one-particle currents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the invariant suites (group laws, spinor identities, unitarity, ...).
    Check {
        #[command(flatten)]
        common: Common,
        /// Run only these suites (comma-separated).
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        spinor_samples: Option<String>,
        #[arg(long)]
        group_samples: Option<String>,
    },
    /// Trace-condition audit of the candidate current.
    Nogo {
        #[command(flatten)]
        common: Common,
        /// Spins to sweep, e.g. 0,1/2,1 (overrides --spin).
        #[arg(long)]
        sweep: Option<String>,
        /// Add agreement columns against the closed-form and full kernels.
        #[arg(long)]
        compare_analytic: bool,
    },
    /// Positive control: both commutator sets for the Dirac current.
    DiracControl {
        #[command(flatten)]
        common: Common,
    },
    /// Position density on a line, plane or volume grid.
    Density {
        #[command(flatten)]
        common: Common,
        /// line, plane or volume.
        #[arg(long)]
        geometry: Option<String>,
        #[arg(long, value_name = "X,Y,Z")]
        origin: Option<String>,
        #[arg(long, value_name = "X,Y,Z")]
        dir_a: Option<String>,
        #[arg(long, value_name = "X,Y,Z")]
        dir_b: Option<String>,
        #[arg(long, value_name = "X,Y,Z")]
        dir_c: Option<String>,
        /// Half-width of the grid along each direction.
        #[arg(long)]
        extent: Option<String>,
        /// Points per direction.
        #[arg(long)]
        points: Option<String>,
        #[arg(long)]
        time: Option<String>,
    },
}

/// Options shared by every command. Values given here override the config file.
#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` file; keys are the long flag names.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Spin, as 0, 1/2, 1, 1.5, ...
    #[arg(long)]
    spin: Option<String>,
    /// Isotropic momentum widths (comma-separated list).
    #[arg(long)]
    sigma: Option<String>,
    /// Per-axis width, overriding --sigma.
    #[arg(long, value_name = "X,Y,Z")]
    width: Option<String>,
    /// Central momentum.
    #[arg(long, value_name = "X,Y,Z")]
    p0: Option<String>,
    /// Position offset of the packet.
    #[arg(long, value_name = "X,Y,Z")]
    x0: Option<String>,
    /// Spin weights from m = s down to −s, e.g. 1,0 or 1,1i (normalized after parsing).
    #[arg(long)]
    weights: Option<String>,
    /// Gauss-Hermite nodes per axis on the coarsest level.
    #[arg(long)]
    nodes: Option<String>,
    /// Number of refinement levels, each doubling the nodes.
    #[arg(long)]
    levels: Option<String>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Also run on the packet boosted by this velocity.
    #[arg(long, value_name = "BX,BY,BZ")]
    boost: Option<String>,
    /// Also run on the packet rotated by this rotation vector (axis times angle).
    #[arg(long, value_name = "X,Y,Z")]
    rotate: Option<String>,
}

impl Common {
    fn settings(self) -> Result<Settings, UsageError> {
        let mut s = Settings::new(self.config.as_deref())?;
        for (key, value) in [
            ("spin", self.spin),
            ("sigma", self.sigma),
            ("width", self.width),
            ("p0", self.p0),
            ("x0", self.x0),
            ("weights", self.weights),
            ("nodes", self.nodes),
            ("levels", self.levels),
            ("threads", self.threads),
            ("seed", self.seed),
            ("out", self.out),
            ("boost", self.boost),
            ("rotate", self.rotate),
        ] {
            s.set(key, value)?;
        }
        Ok(s)
    }
}

fn resolve(command: Command) -> Result<RunConfig, UsageError> {
    let (name, settings) = match command {
        Command::Check {
            common,
            suite,
            spinor_samples,
            group_samples,
        } => {
            let mut s = common.settings()?;
            s.set("suite", suite)?;
            s.set("spinor-samples", spinor_samples)?;
            s.set("group-samples", group_samples)?;
            ("check", s)
        }
        Command::Nogo {
            common,
            sweep,
            compare_analytic,
        } => {
            let mut s = common.settings()?;
            s.set("sweep", sweep)?;
            s.set("compare-analytic", compare_analytic.then(|| "true".into()))?;
            ("nogo", s)
        }
        Command::DiracControl { common } => ("dirac-control", common.settings()?),
        Command::Density {
            common,
            geometry,
            origin,
            dir_a,
            dir_b,
            dir_c,
            extent,
            points,
            time,
        } => {
            let mut s = common.settings()?;
            for (key, value) in [
                ("geometry", geometry),
                ("origin", origin),
                ("dir-a", dir_a),
                ("dir-b", dir_b),
                ("dir-c", dir_c),
                ("extent", extent),
                ("points", points),
                ("time", time),
            ] {
                s.set(key, value)?;
            }
            ("density", s)
        }
    };
    RunConfig::resolve(name, &settings)
}

fn run(cfg: &RunConfig) -> anyhow::Result<Status> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()?;
    pool.install(|| match cfg.command.as_str() {
        "check" => commands::check(cfg),
        "nogo" => commands::nogo(cfg),
        "dirac-control" => commands::dirac_control(cfg),
        "density" => commands::density(cfg),
        other => unreachable!("unknown command {other}"),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match resolve(cli.command) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(&cfg) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

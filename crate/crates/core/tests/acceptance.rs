//! Acceptance criteria, one line per criterion. Exits nonzero if any fails.
//!
//! Run with `cargo test -p relcurrent --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::Vector3;
use relcurrent::audit::checks::{run_named, CheckConfig, CheckResult};
use relcurrent::audit::{
    run_dirac_control, run_nogo, scaling_law, AuditReport, Experiment, PacketShape, QuadraturePlan,
};
use relcurrent::Spin;

const AGREEMENT: f64 = 1e-6;
const SEPARATION: f64 = 100.0;
const DIRAC: f64 = 1e-5;
const SPINOR: f64 = 1e-10;
const CHARGE: f64 = 1e-6;
const GROUP: f64 = 1e-10;
const THOMAS: f64 = 1e-3;
const UNITARITY: f64 = 1e-6;
const FINITE_BOOST: f64 = 1e-6;
const HERMITICITY: f64 = 1e-7;
const SLOPE: f64 = 2.0;
const SLOPE_TOLERANCE: f64 = 0.1;

struct Outcome {
    passed: bool,
    detail: String,
}

fn energy(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}

/// Composite Simpson on `[0, upper]`.
fn simpson(f: impl Fn(f64) -> f64, upper: f64, intervals: usize) -> f64 {
    let h = upper / intervals as f64;
    let mut sum = f(0.0) + f(upper);
    for k in 1..intervals {
        sum += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

/// Deficit and right-hand side for a centred isotropic Gaussian of width σ.
///
/// The profile is `g(r) = (2πσ²)^{-3/4} e^{−r²/4σ²}`. Because it is spherically symmetric,
/// the cross terms `β_a·β_b` and `P_a·P_b` integrate to zero, and what remains is a
/// product of radial moments `I[f] = 4π∫r²g(r)f(r)dr`:
/// deficit `= −(2π)⁻³ I[1] (½I[β²] + w I[P²])` with `w = 1` for spin ½ and 0 for spin 0,
/// and rhs `= 3(2π)⁻³ I[1]²`.
fn radial_oracle(sigma: f64, spin_weight: f64) -> (f64, f64) {
    let norm = (2.0 * PI * sigma * sigma).powf(-0.75);
    let g = |r: f64| norm * (-r * r / (4.0 * sigma * sigma)).exp();
    let moment =
        |f: &dyn Fn(f64) -> f64| 4.0 * PI * simpson(|r| r * r * g(r) * f(r), 40.0 * sigma, 20_000);
    let i0 = moment(&|_| 1.0);
    let ib = moment(&|r| (r / energy(r)).powi(2));
    let ip = moment(&|r| (r / (energy(r) + 1.0)).powi(2));
    let volume = (2.0 * PI).powi(3);
    (
        -i0 * (0.5 * ib + spin_weight * ip) / volume,
        3.0 * i0 * i0 / volume,
    )
}

fn default_plan() -> QuadraturePlan {
    QuadraturePlan::new(24, 2).expect("valid plan")
}

fn standard_nogo(spin: Spin) -> AuditReport {
    let packet = PacketShape::standard()
        .packet(spin, None)
        .expect("standard packet");
    let exp = Experiment::packet(&packet, &default_plan()).expect("experiment");
    run_nogo(&exp).expect("audit")
}

fn closed_form_nogo(spin: Spin, spin_weight: f64) -> (Outcome, f64) {
    let report = standard_nogo(spin);
    let (oracle, oracle_rhs) = radial_oracle(0.5, spin_weight);
    let agreement = (report.deficit - oracle).abs() / oracle.abs();
    let rhs_agreement = (report.rhs - oracle_rhs).abs() / oracle_rhs;
    let passed = report.gate.passed
        && report.deficit < 0.0
        && report.separation() >= SEPARATION
        && agreement <= AGREEMENT
        && rhs_agreement <= AGREEMENT;
    (
        Outcome {
            passed,
            detail: format!(
                "deficit={:.10e} oracle={oracle:.10e} rel={agreement:.2e} rhs_rel={rhs_agreement:.2e} \
                 errbar={:.2e} separation={:.2e} gate={}",
                report.deficit,
                report.error_bar,
                report.separation(),
                report.gate.passed
            ),
        },
        report.deficit,
    )
}

fn dirac_control() -> Outcome {
    let plan = default_plan();
    let packet = PacketShape::standard()
        .packet(Spin::HALF, None)
        .expect("standard packet");
    let mut passed = true;
    let mut parts = Vec::new();
    let experiments = [
        ("rest", Experiment::packet(&packet, &plan)),
        (
            "boosted",
            Experiment::boosted(&packet, &Vector3::new(0.0, 0.0, 0.5), &plan),
        ),
    ];
    for (name, exp) in experiments {
        let report = run_dirac_control(&exp.expect("experiment")).expect("control");
        let ok = report.gate.passed
            && report.first_set_deviation <= DIRAC
            && report.second_set_deviation <= DIRAC;
        passed &= ok;
        parts.push(format!(
            "{name}: first={:.2e} second={:.2e} errbar={:.2e}",
            report.first_set_deviation, report.second_set_deviation, report.error_bar
        ));
    }
    Outcome {
        passed,
        detail: parts.join("; "),
    }
}

fn suites(cfg: &CheckConfig, names: &[(&str, f64)]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, pinned) in names {
        let r: CheckResult = run_named(cfg, name).expect("known suite");
        let ok = r.passed && r.defect <= *pinned;
        passed &= ok;
        parts.push(format!(
            "{name}={:.2e}/{pinned:.0e}x{}{}",
            r.defect,
            r.samples,
            if ok { "" } else { " FAILED" }
        ));
    }
    Outcome {
        passed,
        detail: parts.join(" "),
    }
}

fn general_spin() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for spin in [Spin::ONE, Spin::THREE_HALVES] {
        let r = standard_nogo(spin);
        let ok = r.gate.passed && r.deficit < 0.0 && r.separation() >= SEPARATION;
        passed &= ok;
        parts.push(format!(
            "s={spin}: deficit={:.6e} separation={:.2e} full-kernel rel={:.2e}",
            r.deficit,
            r.separation(),
            r.full_kernel_agreement
        ));
    }
    Outcome {
        passed,
        detail: parts.join("; "),
    }
}

fn relative_slope(sigmas: &[f64]) -> (f64, f64) {
    let report = scaling_law(Spin::ZERO, sigmas, &default_plan()).expect("scaling");
    let oracle: Vec<f64> = sigmas
        .iter()
        .map(|&s| {
            let (d, r) = radial_oracle(s, 0.0);
            d / r
        })
        .collect();
    let n = sigmas.len() - 1;
    let oracle_slope = (oracle[n] / oracle[0]).ln() / (sigmas[n] / sigmas[0]).ln();
    (report.relative_slope, oracle_slope)
}

/// The pass condition uses the pinned widths. A slope over narrower widths is printed
/// alongside to show where the pure σ² regime sets in.
fn scaling() -> Outcome {
    let sigmas = [0.05, 0.1, 0.2];
    let report = scaling_law(Spin::ZERO, &sigmas, &default_plan()).expect("scaling");
    let (_, oracle) = relative_slope(&sigmas);
    let (narrow, narrow_oracle) = relative_slope(&[0.0125, 0.025, 0.05]);
    Outcome {
        passed: (report.relative_slope - SLOPE).abs() <= SLOPE_TOLERANCE,
        detail: format!(
            "slope(deficit/rhs)={:.4} oracle={oracle:.4} slope(|deficit|)={:.4}; \
             over 0.0125..0.05: {narrow:.4} oracle={narrow_oracle:.4}",
            report.relative_slope, report.absolute_slope
        ),
    }
}

fn timed<T>(run: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let value = run();
    (value, start.elapsed().as_secs_f64())
}

fn main() -> ExitCode {
    let cfg = CheckConfig::default();
    let mut failures = 0;
    let mut print = |id: &str, title: &str, (outcome, secs): (Outcome, f64)| {
        if !outcome.passed {
            failures += 1;
        }
        println!(
            "[{}] {id} {title}: {} ({secs:.1}s)",
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.detail,
        );
    };

    let ((spinless, spinless_deficit), secs) = timed(|| closed_form_nogo(Spin::ZERO, 0.0));
    print("AC-1", "spinless no-go", (spinless, secs));
    print(
        "AC-2",
        "spin-1/2 no-go",
        timed(|| {
            let (mut o, d) = closed_form_nogo(Spin::HALF, 1.0);
            o.passed &= d < spinless_deficit;
            o.detail
                .push_str(&format!(" spinless={spinless_deficit:.6e}"));
            o
        }),
    );
    print("AC-3", "Dirac positive control", timed(dirac_control));
    print(
        "AC-4",
        "spinor identities",
        timed(|| {
            suites(
                &cfg,
                &[
                    ("dirac-equation", SPINOR),
                    ("spinor-normalization", SPINOR),
                    ("spinor-completeness", SPINOR),
                    ("gordon-decomposition", SPINOR),
                    ("current-conservation", SPINOR),
                ],
            )
        }),
    );
    print(
        "AC-5",
        "charge normalization",
        timed(|| suites(&cfg, &[("charge-normalization", CHARGE)])),
    );
    print(
        "AC-6",
        "group law",
        timed(|| {
            suites(
                &cfg,
                &[
                    ("wigner-composition", GROUP),
                    ("wigner-su2", GROUP),
                    ("wigner-collinear", GROUP),
                    ("thomas-angle", THOMAS),
                ],
            )
        }),
    );
    print(
        "AC-7",
        "unitarity",
        timed(|| {
            suites(
                &cfg,
                &[
                    ("unitarity-translation", UNITARITY),
                    ("unitarity-rotation", UNITARITY),
                    ("unitarity-boost", UNITARITY),
                    ("time-reversal-antiunitary", UNITARITY),
                    ("inversion-squares", UNITARITY),
                ],
            )
        }),
    );
    print(
        "AC-8",
        "generator consistency",
        timed(|| {
            suites(
                &cfg,
                &[
                    ("generator-finite-boost", FINITE_BOOST),
                    ("generator-hermiticity", HERMITICITY),
                ],
            )
        }),
    );
    print("AC-9", "general-spin sweep", timed(general_spin));
    print("AC-10", "scaling law", timed(scaling));

    if failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed");
        ExitCode::FAILURE
    }
}

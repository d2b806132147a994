//! The four subcommands.

use std::time::Instant;

use anyhow::{Context, Result};
use nalgebra::Vector3;
use rayon::prelude::*;
use relcurrent::audit::checks::{self, CheckConfig, SUITES};
use relcurrent::audit::{
    run_dirac_control, run_nogo, Experiment, PacketShape, QuadraturePlan, Verdict,
};
use relcurrent::lorentz::{FourVector, LorentzTransform, SpinorMap};
use relcurrent::quadrature::QuadratureRule;
use relcurrent::wavepacket::{boost_by_velocity, position_amplitude, GaussianPacket};
use relcurrent::Spin;

use crate::config::{Geometry, RunConfig, UsageError, MAX_GRID_POINTS};
use crate::report::{num, prepare_dir, write_csv, Manifest};

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }

    /// A definite failure outranks an inconclusive run.
    fn combine(self, other: Status) -> Status {
        match (self, other) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Pass,
        }
    }
}

impl From<Verdict> for Status {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Pass => Status::Pass,
            Verdict::Fail => Status::Fail,
            Verdict::Inconclusive => Status::Inconclusive,
        }
    }
}

fn plan(cfg: &RunConfig) -> Result<QuadraturePlan> {
    QuadraturePlan::new(cfg.nodes, cfg.levels).map_err(|e| UsageError(e.to_string()).into())
}

fn shape(cfg: &RunConfig, sigma: f64) -> PacketShape {
    PacketShape {
        center: cfg.p0,
        width: cfg.width.unwrap_or_else(|| Vector3::repeat(sigma)),
        offset: cfg.x0,
    }
}

fn sigma_label(cfg: &RunConfig, sigma: f64) -> String {
    match cfg.width {
        Some(w) => format!("{}:{}:{}", w.x, w.y, w.z),
        None => sigma.to_string(),
    }
}

/// The widths to run: the sigma list, or the single anisotropic width.
fn sigmas(cfg: &RunConfig) -> Vec<f64> {
    if cfg.width.is_some() {
        vec![cfg.sigmas[0]]
    } else {
        cfg.sigmas.clone()
    }
}

fn packet(cfg: &RunConfig, spin: Spin, sigma: f64) -> Result<GaussianPacket> {
    shape(cfg, sigma)
        .packet(spin, cfg.weights.as_deref())
        .map_err(|e| UsageError(e.to_string()).into())
}

fn rotation(v: &Vector3<f64>) -> SpinorMap {
    match v.try_normalize(0.0) {
        Some(axis) => SpinorMap::rotation(&axis, v.norm()),
        None => SpinorMap::identity(),
    }
}

/// The packet itself, then its rotated and boosted images when requested.
fn experiments(
    cfg: &RunConfig,
    packet: &GaussianPacket,
    plan: &QuadraturePlan,
) -> Result<Vec<(&'static str, Experiment)>> {
    let mut out = vec![("rest", Experiment::packet(packet, plan)?)];
    if let Some(r) = &cfg.rotate {
        out.push(("rotated", Experiment::rotated(packet, &rotation(r), plan)?));
    }
    if let Some(b) = &cfg.boost {
        out.push(("boosted", Experiment::boosted(packet, b, plan)?));
    }
    Ok(out)
}

pub fn check(cfg: &RunConfig) -> Result<Status> {
    let dir = prepare_dir(&cfg.out)?;
    let mut manifest = Manifest::new(cfg);
    let check_cfg = CheckConfig {
        seed: cfg.seed,
        nodes: cfg.nodes,
        spinor_samples: cfg.spinor_samples,
        group_samples: cfg.group_samples,
    };
    let names: Vec<&str> = if cfg.suites.is_empty() {
        SUITES.iter().map(|(n, _)| *n).collect()
    } else {
        cfg.suites.iter().map(String::as_str).collect()
    };
    for n in &names {
        if !SUITES.iter().any(|(s, _)| s == n) {
            return Err(UsageError(format!("unknown suite '{n}'")).into());
        }
    }
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for name in names {
        let start = Instant::now();
        let r = checks::run_named(&check_cfg, name).expect("suite exists");
        manifest.time(format!("suite.{name}"), start.elapsed());
        println!(
            "{} {:<28} defect={:.3e} tolerance={:.0e} samples={}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.defect,
            r.tolerance,
            r.samples
        );
        manifest.put(
            format!("suite.{name}"),
            if r.passed { "pass" } else { "fail" },
        );
        if !r.passed {
            failed.push(name);
        }
        rows.push(vec![
            r.name.to_string(),
            num(r.defect),
            format!("{:e}", r.tolerance),
            r.samples.to_string(),
            r.passed.to_string(),
        ]);
    }
    write_csv(
        &dir.join("results.csv"),
        &["suite", "defect", "tolerance", "samples", "passed"],
        &rows,
        &[],
    )?;
    let status = if failed.is_empty() {
        Status::Pass
    } else {
        println!("failing suites: {}", failed.join(", "));
        manifest.put("failing", failed.join(","));
        Status::Fail
    };
    manifest.put("status", format!("{status:?}").to_lowercase());
    manifest.write(&dir)?;
    Ok(status)
}

pub fn nogo(cfg: &RunConfig) -> Result<Status> {
    let dir = prepare_dir(&cfg.out)?;
    let plan = plan(cfg)?;
    let mut manifest = Manifest::new(cfg);
    let mut header = vec![
        "spin",
        "sigma",
        "lhs",
        "rhs",
        "deficit",
        "analytic_deficit",
        "errbar",
    ];
    if cfg.compare_analytic {
        header.extend([
            "rel_agreement",
            "full_kernel_deficit",
            "full_kernel_agreement",
        ]);
    }
    if cfg.rotate.is_some() || cfg.boost.is_some() {
        header.insert(0, "frame");
    }
    let mut rows = Vec::new();
    let mut status = Status::Pass;
    let mut index = 0;
    for &spin in &cfg.spins {
        for sigma in sigmas(cfg) {
            let packet = packet(cfg, spin, sigma)?;
            for (frame, exp) in experiments(cfg, &packet, &plan)? {
                let start = Instant::now();
                let r = run_nogo(&exp)?;
                manifest.time(format!("run.{index}"), start.elapsed());
                status = status.combine(r.verdict.into());
                let key = |k: &str| format!("run.{index}.{k}");
                manifest.put(key("spin"), spin);
                manifest.put(key("frame"), frame);
                manifest.put(key("packet"), &r.packet);
                manifest.put(key("quadrature"), &r.quadrature);
                manifest.put(key("gate"), &r.gate.message);
                for l in &r.levels {
                    manifest.put(
                        key(&format!("level.{}", l.nodes_per_axis)),
                        format!(
                            "lhs={} rhs={} deficit={}",
                            num(l.lhs),
                            num(l.rhs),
                            num(l.deficit)
                        ),
                    );
                }
                manifest.put(key("deficit"), num(r.deficit));
                manifest.put(key("errbar"), num(r.error_bar));
                manifest.put(key("separation"), num(r.separation()));
                manifest.put(key("relative_deficit"), num(r.relative_deficit()));
                if let Some(m) = &r.analytic_method {
                    manifest.put(key("analytic_method"), m);
                }
                manifest.put(key("full_kernel_deficit"), num(r.full_kernel_deficit));
                // Beyond the trace: the full 3x3 matrix, for inspection only.
                for (i, row) in r.candidate_matrix.iter().enumerate() {
                    manifest.put(
                        key(&format!("diagnostic.commutator_matrix.row{i}")),
                        row.iter().map(|v| num(*v)).collect::<Vec<_>>().join(","),
                    );
                }
                for note in &r.notes {
                    manifest.put(key("note"), note);
                }
                for reason in &r.reasons {
                    manifest.put(key("reason"), reason);
                }
                manifest.put(key("verdict"), r.verdict.as_str());
                println!(
                    "{} spin={spin} sigma={} frame={frame} deficit={:.6e} errbar={:.2e} separation={:.2e}{}",
                    r.verdict.as_str().to_uppercase(),
                    sigma_label(cfg, sigma),
                    r.deficit,
                    r.error_bar,
                    r.separation(),
                    r.relative_agreement
                        .map(|a| format!(" analytic_rel={a:.2e}"))
                        .unwrap_or_default()
                );
                for reason in r.reasons.iter().chain(&r.notes) {
                    println!("    {reason}");
                }
                let mut row = vec![
                    spin.to_string(),
                    sigma_label(cfg, sigma),
                    num(r.lhs),
                    num(r.rhs),
                    num(r.deficit),
                    r.analytic_deficit.map(num).unwrap_or_default(),
                    num(r.error_bar),
                ];
                if cfg.compare_analytic {
                    row.push(r.relative_agreement.map(num).unwrap_or_default());
                    row.push(num(r.full_kernel_deficit));
                    row.push(num(r.full_kernel_agreement));
                }
                if header[0] == "frame" {
                    row.insert(0, frame.to_string());
                }
                rows.push(row);
                index += 1;
            }
        }
    }
    write_csv(&dir.join("results.csv"), &header, &rows, &[])?;
    manifest.put("status", format!("{status:?}").to_lowercase());
    manifest.write(&dir)?;
    Ok(status)
}

pub fn dirac_control(cfg: &RunConfig) -> Result<Status> {
    if cfg.spins != [Spin::HALF] {
        return Err(UsageError("the Dirac control needs spin 1/2".into()).into());
    }
    let dir = prepare_dir(&cfg.out)?;
    let plan = plan(cfg)?;
    let mut manifest = Manifest::new(cfg);
    let mut rows = Vec::new();
    let mut status = Status::Pass;
    let mut index = 0;
    for sigma in sigmas(cfg) {
        let packet = packet(cfg, Spin::HALF, sigma)?;
        for (frame, exp) in experiments(cfg, &packet, &plan)? {
            let start = Instant::now();
            let r = run_dirac_control(&exp)?;
            manifest.time(format!("run.{index}"), start.elapsed());
            status = status.combine(r.verdict.into());
            let f = r.finest();
            let key = |k: &str| format!("run.{index}.{k}");
            manifest.put(key("frame"), frame);
            manifest.put(key("packet"), &r.packet);
            manifest.put(key("quadrature"), &r.quadrature);
            manifest.put(key("gate"), &r.gate.message);
            manifest.put(key("density"), num(f.density));
            manifest.put(key("first_set_deviation"), num(r.first_set_deviation));
            manifest.put(key("second_set_deviation"), num(r.second_set_deviation));
            manifest.put(key("errbar"), num(r.error_bar));
            manifest.put(key("verdict"), r.verdict.as_str());
            println!(
                "{} sigma={} frame={frame} density={:.6e} first={:.2e} second={:.2e}",
                r.verdict.as_str().to_uppercase(),
                sigma_label(cfg, sigma),
                f.density,
                r.first_set_deviation,
                r.second_set_deviation
            );
            let label = sigma_label(cfg, sigma);
            for i in 0..3 {
                println!(
                    "    [{}]",
                    f.matrix[i]
                        .iter()
                        .map(|v| format!("{v:+.9e}"))
                        .collect::<Vec<_>>()
                        .join(" ")
                );
                rows.push(vec![
                    frame.to_string(),
                    label.clone(),
                    "first-set".into(),
                    i.to_string(),
                    String::new(),
                    num(f.first_set[i]),
                    num(f.current[i]),
                ]);
                for j in 0..3 {
                    rows.push(vec![
                        frame.to_string(),
                        label.clone(),
                        "second-set".into(),
                        i.to_string(),
                        j.to_string(),
                        num(f.matrix[i][j]),
                        num(if i == j { f.density } else { 0.0 }),
                    ]);
                }
            }
            index += 1;
        }
    }
    write_csv(
        &dir.join("results.csv"),
        &[
            "frame", "sigma", "relation", "i", "j", "measured", "expected",
        ],
        &rows,
        &[],
    )?;
    manifest.put("status", format!("{status:?}").to_lowercase());
    manifest.write(&dir)?;
    Ok(status)
}

/// `Σ_m |ψ_m|²` norm on a Gauss-Hermite rule in position space, centred where the packet
/// has drifted to and widened by its spreading.
fn parseval_norm(
    packet: &GaussianPacket,
    density: impl Fn(&Vector3<f64>) -> f64 + Sync,
    time: f64,
) -> Result<f64> {
    let w = packet.width();
    let drift = packet.center() / FourVector::on_shell(packet.center()).t() * time;
    let scale = w.map(|s| (0.5 / (s * s) + 2.0 * s * s * time * time).sqrt());
    let rule = QuadratureRule::gauss_hermite(packet.offset() + drift, scale, 24)?;
    Ok(rule.integrate(|x| density(x)))
}

pub fn density(cfg: &RunConfig) -> Result<Status> {
    let grid = &cfg.grid;
    let total = grid.total_points();
    if total > MAX_GRID_POINTS {
        return Err(UsageError(format!(
            "grid of {total} points exceeds the limit of {MAX_GRID_POINTS}"
        ))
        .into());
    }
    if cfg.spins.len() != 1 {
        return Err(UsageError("density takes a single spin".into()).into());
    }
    let dir = prepare_dir(&cfg.out)?;
    let mut manifest = Manifest::new(cfg);
    let spin = cfg.spins[0];
    let packet = packet(cfg, spin, cfg.sigmas[0])?;
    let rule = packet.quadrature(cfg.nodes)?;
    let positions = grid.positions();
    let t = grid.time;
    let ms: Vec<String> = (0..spin.dim()).map(|k| spin_label(spin, k)).collect();

    let start = Instant::now();
    let psi = position_amplitude(&packet, &rule);
    let values: Vec<Vec<f64>> = positions
        .par_iter()
        .map(|x| psi.eval(t, x).iter().map(|z| z.norm_sqr()).collect())
        .collect();
    let ms = &ms;
    let table = |values: &[Vec<f64>]| -> Vec<Vec<String>> {
        positions
            .iter()
            .zip(values)
            .flat_map(|(x, v)| {
                v.iter()
                    .enumerate()
                    .map(move |(k, d)| vec![num(x.x), num(x.y), num(x.z), ms[k].clone(), num(*d)])
            })
            .collect()
    };
    let header = ["x", "y", "z", "m", "density"];
    let norm = parseval_norm(&packet, |x| psi.density(t, x), t)?;
    let mut footer = vec![format!("parseval_norm = {}", num(norm))];
    manifest.put("parseval_norm", num(norm));
    if grid.geometry == Geometry::Volume {
        let on_grid = values.iter().flatten().sum::<f64>() * grid.cell();
        footer.push(format!("integrated_density = {}", num(on_grid)));
        manifest.put("integrated_density", num(on_grid));
    }
    write_csv(&dir.join("density.csv"), &header, &table(&values), &footer)?;
    manifest.time("density", start.elapsed());

    if let Some(beta) = &cfg.boost {
        let start = Instant::now();
        let lambda = LorentzTransform::boost_from_velocity(beta)?;
        let boosted = boost_by_velocity(&packet.clone().into_amplitude(), beta)?;
        let moved_rule = rule.transported(&lambda);
        let image = position_amplitude(boosted.as_ref(), &moved_rule);
        let boosted_values: Vec<Vec<f64>> = positions
            .par_iter()
            .map(|x| image.eval(t, x).iter().map(|z| z.norm_sqr()).collect())
            .collect();
        // The original density carried to each point as if it were a scalar field.
        let inverse = lambda.inverse();
        let mapped_values: Vec<Vec<f64>> = positions
            .par_iter()
            .map(|x| {
                let back = inverse.apply(&FourVector::new(t, x.x, x.y, x.z));
                psi.eval(back.t(), &back.spatial())
                    .iter()
                    .map(|z| z.norm_sqr())
                    .collect()
            })
            .collect();
        let distance = boosted_values
            .iter()
            .flatten()
            .zip(mapped_values.iter().flatten())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        let distance = (distance * grid.cell()).sqrt();
        let witness = format!("l2_distance_boosted_vs_mapped = {}", num(distance));
        write_csv(
            &dir.join("boosted.csv"),
            &header,
            &table(&boosted_values),
            std::slice::from_ref(&witness),
        )?;
        write_csv(
            &dir.join("mapped.csv"),
            &header,
            &table(&mapped_values),
            std::slice::from_ref(&witness),
        )?;
        manifest.put("l2_distance_boosted_vs_mapped", num(distance));
        manifest.time("boosted", start.elapsed());
        println!("boosted vs point-mapped density: L2 distance {distance:.6e}");
    }
    println!(
        "wrote {} rows per file to {} (parseval norm {norm:.9})",
        total * spin.dim(),
        dir.display()
    );
    manifest.put("rows", total * spin.dim());
    manifest.write(&dir).context("writing manifest")?;
    Ok(Status::Pass)
}

/// `m` as text: `1/2`, `-3/2`, `0`, ...
fn spin_label(spin: Spin, k: usize) -> String {
    let twice_m = spin.twice() as i64 - 2 * k as i64;
    if twice_m % 2 == 0 {
        (twice_m / 2).to_string()
    } else {
        format!("{twice_m}/2")
    }
}

//! Named invariant suites with measured defects.
//!
//! Every suite draws from its own ChaCha8 stream derived from the configured seed and
//! the suite name, so results do not depend on which other suites run or on the
//! thread count.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::lorentz::{metric, wigner_rotation, FourVector, LorentzTransform, Rapidity, SpinorMap};
use crate::operators::{
    boost_generator_apply, candidate_j0_kernel, candidate_j_spatial_kernel, deficit_excess_kernel,
    deficit_kernel, dirac_current_kernel, spatial_integral, CommutatorEngine, KernelOperator,
};
use crate::quadrature::QuadratureRule;
use crate::spin::{
    dirac_rep, dirac_u, dirac_v, gamma, gordon_residual, slash, spin_matrices, wigner_d, Spin,
};
use crate::tolerance;
use crate::wavepacket::{
    boost_by_rapidity, boost_by_velocity, convergence_gate, inner_product, parity,
    position_amplitude, rotate, time_reversal, translate, GaussianPacket, MomentumAmplitude,
};
use crate::C64;

use super::{commutator_by_finite_boost, QuadraturePlan};

/// Sampling parameters shared by all suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckConfig {
    pub seed: u64,
    /// Gauss-Hermite nodes per axis for the coarse gate level and packet integrals.
    pub nodes: usize,
    pub spinor_samples: usize,
    pub group_samples: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            nodes: 24,
            spinor_samples: 1000,
            group_samples: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub defect: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub passed: bool,
    pub detail: String,
}

fn outcome(
    name: &'static str,
    defect: f64,
    tolerance: f64,
    samples: usize,
    detail: impl Into<String>,
) -> CheckResult {
    CheckResult {
        name,
        defect,
        tolerance,
        samples,
        passed: defect.is_finite() && defect <= tolerance,
        detail: detail.into(),
    }
}

fn failed(name: &'static str, tolerance: f64, err: crate::Error) -> CheckResult {
    CheckResult {
        name,
        defect: f64::INFINITY,
        tolerance,
        samples: 0,
        passed: false,
        detail: err.to_string(),
    }
}

/// Stream for one suite: FNV-1a of the name mixed into the seed.
fn stream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

pub fn random_in_ball<R: Rng>(rng: &mut R, radius: f64) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if v.norm_squared() <= 1.0 {
            return v * radius;
        }
    }
}

pub fn random_unit<R: Rng>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = random_in_ball(rng, 1.0);
        let n = v.norm();
        if n > 1e-3 {
            return v / n;
        }
    }
}

/// Rotation by a uniform angle about a random axis, times a boost of rapidity ≤ 1.5.
pub fn random_spinor_map<R: Rng>(rng: &mut R) -> SpinorMap {
    let r = SpinorMap::rotation(&random_unit(rng), rng.random_range(0.0..2.0 * PI));
    let b = SpinorMap::from_rapidity(&Rapidity(random_unit(rng) * rng.random_range(0.0..1.5)));
    r * b
}

pub fn random_rotation<R: Rng>(rng: &mut R) -> SpinorMap {
    SpinorMap::rotation(&random_unit(rng), rng.random_range(0.0..2.0 * PI))
}

fn random_weights<R: Rng>(rng: &mut R, spin: Spin) -> Vec<C64> {
    (0..spin.dim())
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Gaussian with centre in a ball of radius 0.3, widths in [0.4, 0.6] and a small tilt.
pub fn random_packet<R: Rng>(rng: &mut R, spin: Spin) -> GaussianPacket {
    let width = Vector3::new(
        rng.random_range(0.4..0.6),
        rng.random_range(0.4..0.6),
        rng.random_range(0.4..0.6),
    );
    GaussianPacket::new(
        spin,
        random_in_ball(rng, 0.3),
        width,
        &random_weights(rng, spin),
        random_in_ball(rng, 0.8),
    )
    .expect("random packet parameters are valid")
}

/// Rule covering both packets: centred between them, scaled to the wider one.
/// Gaussian envelope of `Ψ_a* Ψ_b`, per axis: precision `1/4σ_a² + 1/4σ_b²`, centred at
/// the precision-weighted mean. Returns the centre and the Gauss-Hermite scale.
fn envelope(a: &GaussianPacket, b: &GaussianPacket) -> (Vector3<f64>, Vector3<f64>) {
    let (wa, wb) = (a.width(), b.width());
    let mut center = Vector3::zeros();
    let mut scale = Vector3::zeros();
    for k in 0..3 {
        let (la, lb) = (0.25 / (wa[k] * wa[k]), 0.25 / (wb[k] * wb[k]));
        center[k] = (la * a.center()[k] + lb * b.center()[k]) / (la + lb);
        scale[k] = (la + lb).sqrt().recip();
    }
    (center, scale)
}

fn pair_rule(a: &GaussianPacket, b: &GaussianPacket, nodes: usize) -> QuadratureRule {
    let (center, scale) = envelope(a, b);
    QuadratureRule::gauss_hermite(center, scale, nodes).expect("valid rule")
}

fn max_entry(m: &Matrix4<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn lorentz_max(a: &Matrix4<f64>) -> f64 {
    a.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Group laws
// ---------------------------------------------------------------------------

pub fn lorentz_metric(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "lorentz-metric");
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.group_samples {
        let l = random_spinor_map(&mut rng).covering_unchecked();
        let beta = random_in_ball(&mut rng, 0.95);
        let b = LorentzTransform::boost_from_velocity(&beta).expect("subluminal");
        worst = worst.max(l.metric_defect()).max(b.metric_defect());
        worst = worst.max(lorentz_max(&((l * l.inverse()).0 - Matrix4::identity())));
    }
    outcome(
        "lorentz-metric",
        worst,
        tolerance::GROUP_LAW,
        cfg.group_samples,
        "ΛᵀgΛ = g and ΛΛ⁻¹ = 1",
    )
}

pub fn covering_homomorphism(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "covering-homomorphism");
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.group_samples {
        let (a, b) = (random_spinor_map(&mut rng), random_spinor_map(&mut rng));
        let lhs = (a * b).covering_unchecked();
        let rhs = a.covering_unchecked() * b.covering_unchecked();
        let flip = SpinorMap(-a.0).covering_unchecked();
        worst = worst
            .max(lorentz_max(&(lhs.0 - rhs.0)))
            .max(lorentz_max(&(flip.0 - a.covering_unchecked().0)));
    }
    outcome(
        "covering-homomorphism",
        worst,
        tolerance::GROUP_LAW,
        cfg.group_samples,
        "Λ(AB) = Λ(A)Λ(B), Λ(−A) = Λ(A)",
    )
}

pub fn lift_roundtrip(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "lift-roundtrip");
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.group_samples {
        let l = random_spinor_map(&mut rng).covering_unchecked();
        let back = l.lift().covering_unchecked();
        worst = worst.max(lorentz_max(&(back.0 - l.0)));
    }
    outcome(
        "lift-roundtrip",
        worst,
        tolerance::GROUP_LAW,
        cfg.group_samples,
        "Λ(lift(Λ)) = Λ",
    )
}

pub fn wigner_composition(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "wigner-composition");
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.group_samples {
        let (a1, a2) = (random_spinor_map(&mut rng), random_spinor_map(&mut rng));
        let p = FourVector::on_shell(random_in_ball(&mut rng, 2.0));
        let lhs = wigner_rotation(&(a2 * a1), &p);
        let rhs = wigner_rotation(&a2, &a1.apply(&p)) * wigner_rotation(&a1, &p);
        worst = worst.max(lhs.distance(&rhs));
    }
    outcome(
        "wigner-composition",
        worst,
        tolerance::GROUP_LAW,
        cfg.group_samples,
        "W(Λ₂Λ₁, p) = W(Λ₂, Λ₁p)W(Λ₁, p)",
    )
}

pub fn wigner_su2(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "wigner-su2");
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.group_samples {
        let a = random_spinor_map(&mut rng);
        let p = FourVector::on_shell(random_in_ball(&mut rng, 2.0));
        let w = wigner_rotation(&a, &p);
        worst = worst
            .max(w.unitarity_defect())
            .max((w.determinant() - C64::new(1.0, 0.0)).norm());
        // A rotation fixes the rest momentum.
        worst = worst.max((w.apply(&FourVector::rest()).0 - FourVector::rest().0).norm());
    }
    outcome(
        "wigner-su2",
        worst,
        tolerance::GROUP_LAW,
        cfg.group_samples,
        "W ∈ SU(2), W fixes the rest frame",
    )
}

pub fn wigner_collinear(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "wigner-collinear");
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.group_samples {
        let n = random_unit(&mut rng);
        let p = FourVector::on_shell(n * rng.random_range(0.0..2.0));
        let b = SpinorMap::from_rapidity(&Rapidity(n * rng.random_range(-1.5..1.5)));
        worst = worst.max(wigner_rotation(&b, &p).distance(&SpinorMap::identity()));
        // Rotations are their own Wigner rotation.
        let r = random_rotation(&mut rng);
        worst = worst.max(wigner_rotation(&r, &p).distance(&r));
    }
    outcome(
        "wigner-collinear",
        worst,
        tolerance::GROUP_LAW,
        cfg.group_samples,
        "collinear boosts give W = 1; rotations give W = R",
    )
}

/// Thomas angle `|θ| = ½|ζ⃗₁ × ζ⃗₂|` at small rapidity, from the ratio at two scales
/// extrapolated in the quadratic correction.
pub fn thomas_angle(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "thomas-angle");
    let samples = 50;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let z1 = random_unit(&mut rng) * rng.random_range(0.5..1.0);
        let z2 = random_unit(&mut rng) * rng.random_range(0.5..1.0);
        let expected = 0.5 * z1.cross(&z2).norm();
        if expected < 0.05 {
            continue;
        }
        let ratio = |t: f64| {
            let a = SpinorMap::from_rapidity(&Rapidity(z2 * t))
                * SpinorMap::from_rapidity(&Rapidity(z1 * t));
            let (_, r) = a.covering_unchecked().polar_decomposition();
            let angle = nalgebra::Rotation3::from_matrix_unchecked(r).angle();
            angle / (expected * t * t)
        };
        let extrapolated = (4.0 * ratio(0.025) - ratio(0.05)) / 3.0;
        worst = worst.max((extrapolated - 1.0).abs());
    }
    outcome(
        "thomas-angle",
        worst,
        1e-3,
        samples,
        "small-rapidity angle against ½ζ₁ζ₂ sin φ",
    )
}

// ---------------------------------------------------------------------------
// Spin representations
// ---------------------------------------------------------------------------

pub fn spin_algebra(_cfg: &CheckConfig) -> CheckResult {
    let mut worst: f64 = 0.0;
    for twice in 0..=6 {
        let rep = spin_matrices(Spin::from_twice(twice));
        let s = rep.spin.value();
        let j = &rep.j;
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let comm = &j[a] * &j[b] - &j[b] * &j[a] - &j[c] * C64::new(0.0, 1.0);
            worst = worst.max(comm.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        let casimir = &j[0] * &j[0] + &j[1] * &j[1] + &j[2] * &j[2];
        let target =
            nalgebra::DMatrix::<C64>::identity(rep.dim(), rep.dim()) * C64::from(s * (s + 1.0));
        worst = worst.max(
            (casimir - target)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max),
        );
    }
    outcome(
        "spin-algebra",
        worst,
        tolerance::LINEAR_ALGEBRA,
        7,
        "[J_a, J_b] = iε J_c and J² = s(s+1) for 2s ≤ 6",
    )
}

pub fn wigner_d_representation(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "wigner-d-representation");
    let samples = 100;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let (r1, r2) = (random_rotation(&mut rng), random_rotation(&mut rng));
        for twice in 0..=4 {
            let s = Spin::from_twice(twice);
            let d1 = wigner_d(s, &r1).expect("SU(2)");
            let d2 = wigner_d(s, &r2).expect("SU(2)");
            let d12 = wigner_d(s, &(r1 * r2)).expect("SU(2)");
            let hom = &d12 - &d1 * &d2;
            let unit = &d1 * d1.adjoint() - nalgebra::DMatrix::identity(s.dim(), s.dim());
            worst = worst
                .max(hom.iter().map(|z| z.norm()).fold(0.0, f64::max))
                .max(unit.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    outcome(
        "wigner-d-representation",
        worst,
        tolerance::GROUP_LAW,
        samples,
        "D(R₁R₂) = D(R₁)D(R₂), D unitary, 2s ≤ 4",
    )
}

// ---------------------------------------------------------------------------
// Dirac spinors
// ---------------------------------------------------------------------------

pub fn clifford_algebra(_cfg: &CheckConfig) -> CheckResult {
    let g = metric();
    let mut worst: f64 = 0.0;
    for mu in 0..4 {
        for nu in 0..4 {
            let anti = gamma(mu) * gamma(nu) + gamma(nu) * gamma(mu);
            let target = Matrix4::<C64>::identity() * C64::from(2.0 * g[(mu, nu)]);
            worst = worst.max(max_entry(&(anti - target)));
        }
    }
    outcome(
        "clifford-algebra",
        worst,
        tolerance::LINEAR_ALGEBRA,
        16,
        "{γ^μ, γ^ν} = 2g^{μν}",
    )
}

fn spinor_pairs(cfg: &CheckConfig, name: &str) -> Vec<(FourVector, FourVector)> {
    let mut rng = stream(cfg.seed, name);
    (0..cfg.spinor_samples)
        .map(|_| {
            (
                FourVector::on_shell(random_in_ball(&mut rng, 2.0)),
                FourVector::on_shell(random_in_ball(&mut rng, 2.0)),
            )
        })
        .collect()
}

pub fn dirac_equation(cfg: &CheckConfig) -> CheckResult {
    let mut worst: f64 = 0.0;
    for (p, _) in spinor_pairs(cfg, "dirac-equation") {
        let ps = slash(&p);
        for m in 0..2 {
            let u = dirac_u(&p, m).0;
            let v = dirac_v(&p, m).0;
            worst = worst
                .max((ps * u - u).iter().map(|z| z.norm()).fold(0.0, f64::max))
                .max((ps * v + v).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    outcome(
        "dirac-equation",
        worst,
        tolerance::SPINOR_IDENTITY,
        cfg.spinor_samples,
        "(p̸ − m)u = 0, (p̸ + m)v = 0",
    )
}

pub fn spinor_normalization(cfg: &CheckConfig) -> CheckResult {
    let mut worst: f64 = 0.0;
    for (p, _) in spinor_pairs(cfg, "spinor-normalization") {
        for a in 0..2 {
            for b in 0..2 {
                let (ua, ub) = (dirac_u(&p, a), dirac_u(&p, b));
                let delta = if a == b { 1.0 } else { 0.0 };
                let bar = ua.sandwich(&Matrix4::identity(), &ub);
                let dagger = (ua.0.adjoint() * ub.0)[(0, 0)];
                worst = worst
                    .max((bar - C64::from(delta)).norm())
                    .max((dagger - C64::from(delta * p.t())).norm());
            }
        }
    }
    outcome(
        "spinor-normalization",
        worst,
        tolerance::SPINOR_IDENTITY,
        cfg.spinor_samples,
        "ūu = δ, u†u = (ω/m)δ",
    )
}

pub fn spinor_completeness(cfg: &CheckConfig) -> CheckResult {
    let mut worst: f64 = 0.0;
    for (p, _) in spinor_pairs(cfg, "spinor-completeness") {
        let sum = (0..2).fold(Matrix4::<C64>::zeros(), |acc, m| {
            let u = dirac_u(&p, m);
            acc + u.0 * u.bar()
        });
        let target = (slash(&p) + Matrix4::identity()) * C64::from(0.5);
        worst = worst.max(max_entry(&(sum - target)));
    }
    outcome(
        "spinor-completeness",
        worst,
        tolerance::SPINOR_IDENTITY,
        cfg.spinor_samples,
        "Σ uū = (p̸ + m)/2m",
    )
}

pub fn gordon_decomposition(cfg: &CheckConfig) -> CheckResult {
    let mut worst: f64 = 0.0;
    for (pa, pb) in spinor_pairs(cfg, "gordon-decomposition") {
        for ma in 0..2 {
            for mb in 0..2 {
                for mu in 0..4 {
                    worst = worst.max(gordon_residual(&pa, ma, &pb, mb, mu).norm());
                }
            }
        }
    }
    outcome(
        "gordon-decomposition",
        worst,
        tolerance::SPINOR_IDENTITY,
        cfg.spinor_samples,
        "ūγu = ū[(p_a+p_b)/2m + iσq/2m]u",
    )
}

pub fn current_conservation(cfg: &CheckConfig) -> CheckResult {
    let mut worst: f64 = 0.0;
    for (pa, pb) in spinor_pairs(cfg, "current-conservation") {
        let q = FourVector(pa.0 - pb.0).lower();
        for ma in 0..2 {
            for mb in 0..2 {
                let (ua, ub) = (dirac_u(&pa, ma), dirac_u(&pb, mb));
                let total: C64 = (0..4).map(|mu| ua.sandwich(&gamma(mu), &ub) * q[mu]).sum();
                worst = worst.max(total.norm());
            }
        }
    }
    outcome(
        "current-conservation",
        worst,
        tolerance::SPINOR_IDENTITY,
        cfg.spinor_samples,
        "(p_a − p_b)_μ ū_aγ^μu_b = 0",
    )
}

/// `v̄_a γ^μ v_b = conj(ū_a γ^μ u_b) = ū_b γ^μ u_a` for charge-conjugate spinors.
pub fn antiparticle_bilinear(cfg: &CheckConfig) -> CheckResult {
    let mut worst: f64 = 0.0;
    for (pa, pb) in spinor_pairs(cfg, "antiparticle-bilinear") {
        for ma in 0..2 {
            for mb in 0..2 {
                for mu in 0..4 {
                    let g = gamma(mu);
                    let vv = dirac_v(&pa, ma).sandwich(&g, &dirac_v(&pb, mb));
                    let uu = dirac_u(&pa, ma).sandwich(&g, &dirac_u(&pb, mb));
                    worst = worst.max((vv - uu.conj()).norm());
                }
            }
        }
    }
    outcome(
        "antiparticle-bilinear",
        worst,
        tolerance::SPINOR_IDENTITY,
        cfg.spinor_samples,
        "v̄_aγv_b = (ū_aγu_b)*",
    )
}

/// `S(A)u(p, m) = Σ_m' u(Λp, m') D_{m'm}(W(Λ, p))`.
pub fn spinor_covariance(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "spinor-covariance");
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.group_samples {
        let a = random_spinor_map(&mut rng);
        let p = FourVector::on_shell(random_in_ball(&mut rng, 2.0));
        let lp = a.apply(&p);
        let w = wigner_rotation(&a, &p).0;
        let s = dirac_rep(&a);
        for m in 0..2 {
            let lhs = s * dirac_u(&p, m).0;
            let rhs = dirac_u(&lp, 0).0 * w[(0, m)] + dirac_u(&lp, 1).0 * w[(1, m)];
            worst = worst.max((lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    outcome(
        "spinor-covariance",
        worst,
        tolerance::SPINOR_IDENTITY,
        cfg.group_samples,
        "S(A)u(p) = u(Λp)D(W)",
    )
}

// ---------------------------------------------------------------------------
// Kernels and generator
// ---------------------------------------------------------------------------

fn all_kernels<R: Rng>(rng: &mut R) -> Vec<KernelOperator> {
    let mut ops = Vec::new();
    for twice in 0..4 {
        let s = Spin::from_twice(twice);
        ops.push(candidate_j0_kernel(s));
        ops.extend((0..3).map(|i| candidate_j_spatial_kernel(s, i)));
    }
    for s in [Spin::ZERO, Spin::HALF] {
        ops.push(deficit_kernel(s).expect("closed form"));
        ops.push(deficit_excess_kernel(s).expect("closed form"));
    }
    let x = FourVector::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    );
    ops.extend((0..4).map(|mu| dirac_current_kernel(&x, mu)));
    ops
}

pub fn kernel_hermiticity(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "kernel-hermiticity");
    let ops = all_kernels(&mut rng);
    let samples = 100;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let (a, b) = (random_in_ball(&mut rng, 2.0), random_in_ball(&mut rng, 2.0));
        for op in &ops {
            worst = worst.max(op.hermiticity_defect(&a, &b));
        }
    }
    outcome(
        "kernel-hermiticity",
        worst,
        tolerance::LINEAR_ALGEBRA,
        samples * ops.len(),
        "K(a;b) = K*(b;a)",
    )
}

pub fn kernel_factorization(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "kernel-factorization");
    let ops = all_kernels(&mut rng);
    let samples = 100;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let (a, b) = (random_in_ball(&mut rng, 2.0), random_in_ball(&mut rng, 2.0));
        for op in &ops {
            worst = worst.max(op.factorization_defect(&a, &b).unwrap_or(f64::INFINITY));
        }
    }
    outcome(
        "kernel-factorization",
        worst,
        tolerance::LINEAR_ALGEBRA,
        samples * ops.len(),
        "K(a;b) = L(a)R(b)",
    )
}

/// Dense and factored contractions of every kernel agree on a small rule.
pub fn contraction_paths(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "contraction-paths");
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for twice in 0..3 {
        let s = Spin::from_twice(twice);
        let packet = random_packet(&mut rng, s);
        let rule = packet.quadrature(6).expect("valid rule");
        let dense = CommutatorEngine::new(&packet, &rule, false)
            .expect("analytic gradient")
            .with_contraction(crate::operators::Contraction::Dense);
        let factored = CommutatorEngine::new(&packet, &rule, false)
            .expect("analytic gradient")
            .with_contraction(crate::operators::Contraction::Factored);
        let mut ops: Vec<_> = vec![candidate_j0_kernel(s)];
        ops.extend((0..3).map(|i| candidate_j_spatial_kernel(s, i)));
        if s == Spin::HALF {
            ops.extend(
                (0..4).map(|mu| dirac_current_kernel(&FourVector::new(0.3, 0.2, -0.1, 0.5), mu)),
            );
        }
        for op in &ops {
            let (a, b) = (
                dense.pairings(op).expect("spin matches"),
                factored.pairings(op).expect("spin matches"),
            );
            worst = worst.max((a.expectation - b.expectation).norm());
            for i in 0..3 {
                worst = worst.max((a.generated[i] - b.generated[i]).norm());
            }
            count += 1;
        }
    }
    outcome(
        "contraction-paths",
        worst,
        tolerance::LINEAR_ALGEBRA,
        count,
        "dense O(N²) and factored contractions agree",
    )
}

/// `[boost(ψ, ζê_i) − boost(ψ, −ζê_i)]/2ζ → −iK_iψ`, pointwise, at 20 momenta.
pub fn generator_finite_boost(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "generator-finite-boost");
    let samples = 20;
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let spin = Spin::from_twice(k as u32 % 4);
        let packet = random_packet(&mut rng, spin);
        let axis = k % 3;
        let p =
            packet.center() + random_in_ball(&mut rng, 1.0).component_mul(&packet.width()) * 2.0;
        let psi = packet.into_amplitude();
        let generated = boost_generator_apply(&psi, axis, false).expect("analytic gradient");
        let diff = |h: f64| {
            (boost_by_rapidity(&psi, &Rapidity::along(axis, h)).eval(&p)
                - boost_by_rapidity(&psi, &Rapidity::along(axis, -h)).eval(&p))
                / C64::from(2.0 * h)
        };
        let h = 1e-3;
        let derivative = (diff(h / 2.0) * C64::from(4.0) - diff(h)) / C64::from(3.0);
        let expected = generated.eval(&p) * C64::new(0.0, -1.0);
        worst = worst.max((derivative - &expected).norm() / expected.norm());
    }
    outcome(
        "generator-finite-boost",
        worst,
        tolerance::GENERATOR_FINITE_BOOST,
        samples,
        "d/dζ boost(ψ, ζ) = −iKψ, relative",
    )
}

pub fn generator_hermiticity(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "generator-hermiticity");
    let samples = 6;
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let spin = Spin::from_twice(k as u32 % 3);
        let (a, b) = (random_packet(&mut rng, spin), random_packet(&mut rng, spin));
        let rule = pair_rule(&a, &b, 40);
        let (a, b) = (a.into_amplitude(), b.into_amplitude());
        let axis = k % 3;
        let ka = boost_generator_apply(&a, axis, false).expect("analytic gradient");
        let kb = boost_generator_apply(&b, axis, false).expect("analytic gradient");
        let lhs = inner_product(ka.as_ref(), b.as_ref(), &rule).expect("same spin");
        let rhs = inner_product(a.as_ref(), kb.as_ref(), &rule).expect("same spin");
        worst = worst.max((lhs - rhs).norm());
    }
    outcome(
        "generator-hermiticity",
        worst,
        tolerance::GENERATOR_HERMITICITY,
        samples,
        "⟨Kφ, ψ⟩ = ⟨φ, Kψ⟩",
    )
}

/// Candidate current satisfies the first commutator set `i[K_i, J⁰] = J_i`.
pub fn first_commutator_set(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "first-commutator-set");
    let mut worst: f64 = 0.0;
    let spins = [Spin::ZERO, Spin::HALF, Spin::ONE];
    for s in spins {
        let packet = random_packet(&mut rng, s);
        let rule = packet.quadrature(2 * cfg.nodes).expect("valid rule");
        let engine = CommutatorEngine::new(&packet, &rule, false).expect("analytic gradient");
        let j0 = engine
            .pairings(&candidate_j0_kernel(s))
            .expect("spin matches");
        for i in 0..3 {
            let ji = engine
                .expectation(&candidate_j_spatial_kernel(s, i))
                .expect("spin matches")
                .re;
            worst = worst.max((j0.commutator(i) - ji).abs() / j0.expectation.re);
        }
    }
    outcome(
        "first-commutator-set",
        worst,
        tolerance::ANALYTIC_AGREEMENT,
        spins.len(),
        "⟨i[K_i, J⁰]⟩ = ⟨J_i⟩, relative to ⟨J⁰⟩",
    )
}

/// Engine commutators against the finite-boost derivative of the expectation.
pub fn commutator_cross_validation(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "commutator-cross-validation");
    let packet = random_packet(&mut rng, Spin::HALF);
    let rule = packet.quadrature(cfg.nodes).expect("valid rule");
    let psi = packet.clone().into_amplitude();
    let engine = CommutatorEngine::new(&packet, &rule, false).expect("analytic gradient");
    let ops = [
        candidate_j0_kernel(Spin::HALF),
        candidate_j_spatial_kernel(Spin::HALF, 0),
        dirac_current_kernel(&FourVector::zero(), 0),
        dirac_current_kernel(&FourVector::zero(), 2),
    ];
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for op in &ops {
        let scale = engine
            .expectation(&candidate_j0_kernel(Spin::HALF))
            .expect("spin matches")
            .re;
        for axis in 0..3 {
            let direct = engine.commutator(axis, op).expect("Hermitian");
            match commutator_by_finite_boost(axis, op, &psi, &rule, 1e-2) {
                Ok(fd) => worst = worst.max((direct - fd).abs() / scale),
                Err(e) => return failed("commutator-cross-validation", 1e-5, e),
            }
            count += 1;
        }
    }
    outcome(
        "commutator-cross-validation",
        worst,
        1e-5,
        count,
        "−2Im⟨Kψ|Oψ⟩ = d/dζ⟨O⟩, relative to ⟨J⁰⟩",
    )
}

pub fn charge_normalization(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "charge-normalization");
    let mut packets = vec![GaussianPacket::standard(Spin::HALF)];
    packets.push(random_packet(&mut rng, Spin::HALF));
    let mut worst: f64 = 0.0;
    for packet in &packets {
        let rule = packet.quadrature(cfg.nodes).expect("valid rule");
        let t = rng.random_range(0.0..3.0);
        let op = dirac_current_kernel(&FourVector::new(t, 0.0, 0.0, 0.0), 0);
        match spatial_integral(&op, packet, &rule) {
            Ok(q) => worst = worst.max((q - 1.0).abs()),
            Err(e) => return failed("charge-normalization", tolerance::CHARGE_NORMALIZATION, e),
        }
    }
    outcome(
        "charge-normalization",
        worst,
        tolerance::CHARGE_NORMALIZATION,
        packets.len(),
        "∫d³x⟨J⁰_D⟩ = 1",
    )
}

// ---------------------------------------------------------------------------
// Transformations of states
// ---------------------------------------------------------------------------

fn packet_pairs(
    cfg: &CheckConfig,
    name: &str,
    count: usize,
) -> Vec<(GaussianPacket, GaussianPacket)> {
    let mut rng = stream(cfg.seed, name);
    (0..count)
        .map(|k| {
            let s = Spin::from_twice(k as u32 % 4);
            (random_packet(&mut rng, s), random_packet(&mut rng, s))
        })
        .collect()
}

fn ip(a: &dyn MomentumAmplitude, b: &dyn MomentumAmplitude, rule: &QuadratureRule) -> C64 {
    inner_product(a, b, rule).expect("same spin")
}

pub fn unitarity_translation(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "unitarity-translation-shift");
    let pairs = packet_pairs(cfg, "unitarity-translation", 4);
    let mut worst: f64 = 0.0;
    for (a, b) in &pairs {
        let rule = pair_rule(a, b, cfg.nodes);
        let reference = ip(a, b, &rule);
        let shift = FourVector::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        let (ta, tb) = (
            translate(&a.clone().into_amplitude(), &shift),
            translate(&b.clone().into_amplitude(), &shift),
        );
        worst = worst.max((ip(ta.as_ref(), tb.as_ref(), &rule) - reference).norm());
    }
    outcome(
        "unitarity-translation",
        worst,
        tolerance::TRANSFORM_UNITARITY,
        pairs.len(),
        "⟨Uφ, Uψ⟩ = ⟨φ, ψ⟩ for translations",
    )
}

pub fn unitarity_rotation(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "unitarity-rotation-angle");
    let pairs = packet_pairs(cfg, "unitarity-rotation", 4);
    let mut worst: f64 = 0.0;
    for (a, b) in &pairs {
        let rule = pair_rule(a, b, cfg.nodes);
        let reference = ip(a, b, &rule);
        let r = random_rotation(&mut rng);
        let lambda = r.covering_unchecked();
        // An independent isotropic rule around the rotated centre.
        let (center, scale) = envelope(a, b);
        let center = lambda.apply(&FourVector::on_shell(center)).spatial();
        let scale = scale.max();
        let moved = QuadratureRule::gauss_hermite(center, Vector3::repeat(scale), cfg.nodes + 8)
            .expect("valid rule");
        let ra = rotate(&a.clone().into_amplitude(), &r).expect("SU(2)");
        let rb = rotate(&b.clone().into_amplitude(), &r).expect("SU(2)");
        worst = worst.max((ip(ra.as_ref(), rb.as_ref(), &moved) - reference).norm());
    }
    outcome(
        "unitarity-rotation",
        worst,
        tolerance::TRANSFORM_UNITARITY,
        pairs.len(),
        "⟨Uφ, Uψ⟩ = ⟨φ, ψ⟩ for rotations",
    )
}

pub fn unitarity_boost(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "unitarity-boost-velocity");
    let pairs = packet_pairs(cfg, "unitarity-boost", 4);
    let mut worst: f64 = 0.0;
    for (a, b) in &pairs {
        let rule = pair_rule(a, b, cfg.nodes);
        let reference = ip(a, b, &rule);
        let beta = random_unit(&mut rng) * rng.random_range(0.1..0.6);
        let lambda = LorentzTransform::boost_from_velocity(&beta).expect("subluminal");
        let gamma = 1.0 / (1.0 - beta.norm_squared()).sqrt();
        // Untransported rule: centred on the boosted mean momentum, widened by γ.
        let (center, scale) = envelope(a, b);
        let center = lambda.apply(&FourVector::on_shell(center)).spatial();
        let scale = gamma * scale.max();
        let moved = QuadratureRule::gauss_hermite(center, Vector3::repeat(scale), 2 * cfg.nodes)
            .expect("valid rule");
        let ba = boost_by_velocity(&a.clone().into_amplitude(), &beta).expect("subluminal");
        let bb = boost_by_velocity(&b.clone().into_amplitude(), &beta).expect("subluminal");
        worst = worst.max((ip(ba.as_ref(), bb.as_ref(), &moved) - reference).norm());
    }
    outcome(
        "unitarity-boost",
        worst,
        tolerance::TRANSFORM_UNITARITY,
        pairs.len(),
        "⟨Uφ, Uψ⟩ = ⟨φ, ψ⟩ for boosts, on an independent rule",
    )
}

pub fn time_reversal_antiunitary(cfg: &CheckConfig) -> CheckResult {
    let pairs = packet_pairs(cfg, "time-reversal-antiunitary", 4);
    let mut worst: f64 = 0.0;
    for (a, b) in &pairs {
        let rule = pair_rule(a, b, cfg.nodes);
        let flipped = rule.transported(&LorentzTransform::from_spatial_rotation(
            &-nalgebra::Matrix3::identity(),
        ));
        let reference = ip(a, b, &rule);
        let (ta, tb) = (
            time_reversal(&a.clone().into_amplitude()),
            time_reversal(&b.clone().into_amplitude()),
        );
        worst = worst.max((ip(ta.as_ref(), tb.as_ref(), &flipped) - reference.conj()).norm());
    }
    outcome(
        "time-reversal-antiunitary",
        worst,
        tolerance::TRANSFORM_UNITARITY,
        pairs.len(),
        "⟨Tφ, Tψ⟩ = ⟨φ, ψ⟩*",
    )
}

/// `T² = (−1)^{2s}` and `P² = 1`, pointwise.
pub fn inversion_squares(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "inversion-squares");
    let mut worst: f64 = 0.0;
    let samples = 40;
    for k in 0..samples {
        let spin = Spin::from_twice(k as u32 % 4);
        let psi = random_packet(&mut rng, spin).into_amplitude();
        let sign = if spin.is_half_integer() { -1.0 } else { 1.0 };
        let p = random_in_ball(&mut rng, 1.0);
        let v = psi.eval(&p);
        let tt = time_reversal(&time_reversal(&psi)).eval(&p);
        let pp = parity(&parity(&psi)).eval(&p);
        worst = worst
            .max((tt - &v * C64::from(sign)).norm())
            .max((pp - &v).norm());
    }
    outcome(
        "inversion-squares",
        worst,
        tolerance::LINEAR_ALGEBRA,
        samples,
        "T² = (−1)^{2s}, P² = 1",
    )
}

/// A 2π rotation multiplies the state by (−1)^{2s}.
pub fn full_turn(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "full-turn");
    let mut worst: f64 = 0.0;
    let samples = 20;
    for k in 0..samples {
        let spin = Spin::from_twice(k as u32 % 4);
        let psi = random_packet(&mut rng, spin).into_amplitude();
        let turn = SpinorMap::rotation(&random_unit(&mut rng), 2.0 * PI);
        let sign = if spin.is_half_integer() { -1.0 } else { 1.0 };
        let p = random_in_ball(&mut rng, 1.0);
        let out = rotate(&psi, &turn).expect("SU(2)").eval(&p);
        worst = worst.max((out - psi.eval(&p) * C64::from(sign)).norm());
    }
    outcome("full-turn", worst, 1e-12, samples, "R(2π) = (−1)^{2s}")
}

/// `∫d³x Σ_m |ψ_m(0, x⃗)|² = 1`, with an x-space Gauss-Hermite rule.
pub fn parseval(cfg: &CheckConfig) -> CheckResult {
    let mut rng = stream(cfg.seed, "parseval");
    let packets = [
        GaussianPacket::standard(Spin::HALF),
        random_packet(&mut rng, Spin::ONE),
    ];
    let mut worst: f64 = 0.0;
    for packet in &packets {
        let prule = packet.quadrature(cfg.nodes).expect("valid rule");
        let position = position_amplitude(packet, &prule);
        let scale = packet.width().map(|s| 1.0 / (2.0_f64.sqrt() * s));
        let xrule = QuadratureRule::gauss_hermite(packet.offset(), scale, 16).expect("valid rule");
        let total = xrule.integrate(|x| position.density(0.0, x));
        worst = worst.max((total - 1.0).abs());
    }
    outcome(
        "parseval",
        worst,
        tolerance::PARSEVAL,
        packets.len(),
        "position density integrates to 1",
    )
}

/// The quadrature convergence gate on the standard packet at the configured size.
pub fn quadrature_gate(cfg: &CheckConfig) -> CheckResult {
    let packet = GaussianPacket::standard(Spin::HALF);
    let rules = match QuadraturePlan::new(cfg.nodes, 2).and_then(|plan| {
        plan.sizes()
            .into_iter()
            .map(|n| packet.quadrature(n))
            .collect::<Result<Vec<_>>>()
    }) {
        Ok(r) => r,
        Err(e) => return failed("quadrature-gate", tolerance::QUADRATURE_GATE, e),
    };
    let coarse = crate::wavepacket::norm_squared(&packet, &rules[0]);
    let fine = crate::wavepacket::norm_squared(&packet, &rules[1]);
    let detail = match convergence_gate(&packet, &rules[0], &rules[1], tolerance::QUADRATURE_GATE) {
        Ok(g) => format!("boundary mass {:.3e}", g.boundary_mass),
        Err(e) => e.to_string(),
    };
    outcome(
        "quadrature-gate",
        (fine - coarse).abs(),
        tolerance::QUADRATURE_GATE,
        2,
        detail,
    )
}

type Suite = fn(&CheckConfig) -> CheckResult;

/// All suites in report order.
pub const SUITES: &[(&str, Suite)] = &[
    ("lorentz-metric", lorentz_metric),
    ("covering-homomorphism", covering_homomorphism),
    ("lift-roundtrip", lift_roundtrip),
    ("wigner-composition", wigner_composition),
    ("wigner-su2", wigner_su2),
    ("wigner-collinear", wigner_collinear),
    ("thomas-angle", thomas_angle),
    ("spin-algebra", spin_algebra),
    ("wigner-d-representation", wigner_d_representation),
    ("clifford-algebra", clifford_algebra),
    ("dirac-equation", dirac_equation),
    ("spinor-normalization", spinor_normalization),
    ("spinor-completeness", spinor_completeness),
    ("gordon-decomposition", gordon_decomposition),
    ("current-conservation", current_conservation),
    ("antiparticle-bilinear", antiparticle_bilinear),
    ("spinor-covariance", spinor_covariance),
    ("kernel-hermiticity", kernel_hermiticity),
    ("kernel-factorization", kernel_factorization),
    ("contraction-paths", contraction_paths),
    ("generator-finite-boost", generator_finite_boost),
    ("generator-hermiticity", generator_hermiticity),
    ("first-commutator-set", first_commutator_set),
    ("commutator-cross-validation", commutator_cross_validation),
    ("charge-normalization", charge_normalization),
    ("unitarity-translation", unitarity_translation),
    ("unitarity-rotation", unitarity_rotation),
    ("unitarity-boost", unitarity_boost),
    ("time-reversal-antiunitary", time_reversal_antiunitary),
    ("inversion-squares", inversion_squares),
    ("full-turn", full_turn),
    ("parseval", parseval),
    ("quadrature-gate", quadrature_gate),
];

pub fn run_all(cfg: &CheckConfig) -> Vec<CheckResult> {
    SUITES.iter().map(|(_, suite)| suite(cfg)).collect()
}

pub fn run_named(cfg: &CheckConfig, name: &str) -> Option<CheckResult> {
    SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, suite)| suite(cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_match_results() {
        let cfg = CheckConfig {
            spinor_samples: 10,
            group_samples: 10,
            ..CheckConfig::default()
        };
        for (name, suite) in SUITES.iter().take(17) {
            let r = suite(&cfg);
            assert_eq!(r.name, *name);
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = stream(5, "x").random();
        let b: f64 = stream(5, "x").random();
        let c: f64 = stream(5, "y").random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn coarse_gate_fails() {
        let r = quadrature_gate(&CheckConfig {
            nodes: 8,
            ..CheckConfig::default()
        });
        assert!(!r.passed);
    }

    #[test]
    fn random_packets_leave_no_boundary_mass() {
        let mut rng = stream(3, "packets");
        for twice in 0..4 {
            let p = random_packet(&mut rng, Spin::from_twice(twice));
            let rule = p.quadrature(24).unwrap();
            assert!(
                crate::wavepacket::boundary_mass_fraction(&p, &rule) < tolerance::BOUNDARY_MASS
            );
        }
    }
}

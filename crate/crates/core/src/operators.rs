//! Boost generator, kernel-valued currents and commutator expectations.
//!
//! A [`KernelOperator`] is an integral operator with expectation
//! `⟨ψ|O|ψ⟩ = ∫d³p_a ∫d³p_b Σ Ψ*_{m_a}(p_a) K(p_a,m_a; p_b,m_b) Ψ_{m_b}(p_b)`, with all
//! measure factors and the `(2π)⁻³` folded into `K`. Every kernel used here separates
//! as `K(a, b) = L(a)·R(b)` with a small inner rank, which turns the O(N²) node
//! contraction into two O(N) sums. The pointwise kernel is kept independently of the
//! factors so the two paths can be checked against each other.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{Error, Result};
use crate::lorentz::{energy, FourVector};
use crate::numerics::{pairwise_sum, pairwise_sum_columns, par_map};
use crate::quadrature::QuadratureRule;
use crate::spin::{boost_spin_term, dirac_u, gamma, spin_matrices, Spin, SpinRep};
use crate::tolerance;
use crate::wavepacket::{
    boundary_mass_fraction, gradient_or_fallback, sample, Amplitude, MomentumAmplitude, Samples,
};
use crate::C64;

/// Amplitude and generator image at one node.
type Row = (DVector<C64>, [DVector<C64>; 3]);

type PointKernel = dyn Fn(&Vector3<f64>, &Vector3<f64>) -> DMatrix<C64> + Send + Sync;
type FactorFn = dyn Fn(&Vector3<f64>) -> DMatrix<C64> + Send + Sync;

fn inv_volume() -> f64 {
    (2.0 * PI).powi(-3)
}

/// `K(a, b) = L(a)·R(b)` with `L` of shape d×rank and `R` of shape rank×d.
#[derive(Clone)]
pub struct Factorization {
    pub rank: usize,
    left: Arc<FactorFn>,
    right: Arc<FactorFn>,
}

impl Factorization {
    pub fn left(&self, p: &Vector3<f64>) -> DMatrix<C64> {
        (self.left)(p)
    }

    pub fn right(&self, p: &Vector3<f64>) -> DMatrix<C64> {
        (self.right)(p)
    }
}

/// Kernel-valued operator on spin-s amplitudes.
#[derive(Clone)]
pub struct KernelOperator {
    spin: Spin,
    label: String,
    hermitian: bool,
    pointwise: Arc<PointKernel>,
    factors: Option<Factorization>,
}

impl std::fmt::Debug for KernelOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelOperator")
            .field("spin", &self.spin)
            .field("label", &self.label)
            .field("hermitian", &self.hermitian)
            .field("rank", &self.factors.as_ref().map(|f| f.rank))
            .finish()
    }
}

impl KernelOperator {
    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn factors(&self) -> Option<&Factorization> {
        self.factors.as_ref()
    }

    /// Kernel block `K(p_a, ·; p_b, ·)` of shape d×d.
    pub fn matrix(&self, pa: &Vector3<f64>, pb: &Vector3<f64>) -> DMatrix<C64> {
        (self.pointwise)(pa, pb)
    }

    /// Single entry `K(p_a, m_a; p_b, m_b)` by row index.
    pub fn kernel(&self, pa: &Vector3<f64>, ma: usize, pb: &Vector3<f64>, mb: usize) -> C64 {
        self.matrix(pa, pb)[(ma, mb)]
    }

    /// `max |K(a;b) − K*(b;a)|` over the spin block.
    pub fn hermiticity_defect(&self, pa: &Vector3<f64>, pb: &Vector3<f64>) -> f64 {
        let ab = self.matrix(pa, pb);
        let ba = self.matrix(pb, pa).adjoint();
        (ab - ba).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |K(a;b) − L(a)R(b)|`, when factors exist.
    pub fn factorization_defect(&self, pa: &Vector3<f64>, pb: &Vector3<f64>) -> Option<f64> {
        let f = self.factors.as_ref()?;
        let diff = self.matrix(pa, pb) - f.left(pa) * f.right(pb);
        Some(diff.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Drops the factorization, forcing dense contraction.
    pub fn without_factors(&self) -> Self {
        Self {
            factors: None,
            ..self.clone()
        }
    }
}

fn identity(d: usize) -> DMatrix<C64> {
    DMatrix::identity(d, d)
}

/// Stacks `f_k(a)·1` horizontally and `g_k(b)·1` vertically for a scalar separable
/// bracket `Σ_k f_k(a) g_k(b)` multiplying `δ_{m_a m_b}`.
fn scalar_separable<F, G>(d: usize, rank: usize, f: F, g: G) -> Factorization
where
    F: Fn(&Vector3<f64>) -> Vec<f64> + Send + Sync + 'static,
    G: Fn(&Vector3<f64>) -> Vec<f64> + Send + Sync + 'static,
{
    Factorization {
        rank: rank * d,
        left: Arc::new(move |p| {
            let v = f(p);
            let mut m = DMatrix::zeros(d, rank * d);
            for (k, fk) in v.iter().enumerate() {
                for i in 0..d {
                    m[(i, k * d + i)] = C64::from(*fk);
                }
            }
            m
        }),
        right: Arc::new(move |p| {
            let v = g(p);
            let mut m = DMatrix::zeros(rank * d, d);
            for (k, gk) in v.iter().enumerate() {
                for i in 0..d {
                    m[(k * d + i, i)] = C64::from(*gk);
                }
            }
            m
        }),
    }
}

/// Candidate density at the origin: `K = δ_{m_a m_b}/(2π)³`.
pub fn candidate_j0_kernel(spin: Spin) -> KernelOperator {
    let d = spin.dim();
    KernelOperator {
        spin,
        label: format!("candidate J0 (spin {spin})"),
        hermitian: true,
        pointwise: Arc::new(move |_, _| identity(d) * C64::from(inv_volume())),
        factors: Some(scalar_separable(
            d,
            1,
            |_| vec![1.0],
            |_| vec![inv_volume()],
        )),
    }
}

/// Candidate current at the origin along `axis`:
/// `K = [½(β_a + β_b)_i δ + i((J⃗×p⃗_a)/(ω_a+m) − (J⃗×p⃗_b)/(ω_b+m))_i]/(2π)³`.
pub fn candidate_j_spatial_kernel(spin: Spin, axis: usize) -> KernelOperator {
    assert!(axis < 3, "spatial axis {axis} out of range");
    let d = spin.dim();
    let rep = Arc::new(spin_matrices(spin));
    let spin_part = {
        let rep = rep.clone();
        move |p: &Vector3<f64>| boost_spin_term(&rep, p)[axis].clone()
    };
    let velocity = move |p: &Vector3<f64>| p[axis] / energy(p);
    let pointwise = {
        let spin_part = spin_part.clone();
        move |pa: &Vector3<f64>, pb: &Vector3<f64>| {
            let convection = identity(d) * C64::from(0.5 * (velocity(pa) + velocity(pb)));
            let spin = (spin_part(pa) - spin_part(pb)) * C64::new(0.0, 1.0);
            (convection + spin) * C64::from(inv_volume())
        }
    };
    let left = {
        let spin_part = spin_part.clone();
        move |pa: &Vector3<f64>| {
            let mut m = DMatrix::zeros(d, 2 * d);
            let a =
                identity(d) * C64::from(0.5 * velocity(pa)) + spin_part(pa) * C64::new(0.0, 1.0);
            m.view_mut((0, 0), (d, d)).copy_from(&a);
            m.view_mut((0, d), (d, d)).copy_from(&identity(d));
            m
        }
    };
    let right = move |pb: &Vector3<f64>| {
        let mut m = DMatrix::zeros(2 * d, d);
        let b = identity(d) * C64::from(0.5 * velocity(pb)) - spin_part(pb) * C64::new(0.0, 1.0);
        m.view_mut((0, 0), (d, d)).copy_from(&identity(d));
        m.view_mut((d, 0), (d, d)).copy_from(&b);
        m * C64::from(inv_volume())
    };
    KernelOperator {
        spin,
        label: format!("candidate J{} (spin {spin})", ["x", "y", "z"][axis]),
        hermitian: true,
        pointwise: Arc::new(pointwise),
        factors: Some(Factorization {
            rank: 2 * d,
            left: Arc::new(left),
            right: Arc::new(right),
        }),
    }
}

fn dirac_phase(p: &Vector3<f64>, x: &FourVector) -> C64 {
    C64::from_polar(1.0, FourVector::on_shell(*p).dot(x))
}

/// Dirac current component μ at spacetime point `x`, restricted to positive-energy
/// one-particle states:
/// `K = (2π)⁻³ (ω_aω_b)^{−1/2} e^{i(p_a−p_b)·x} ū(p_a,m_a) γ^μ u(p_b,m_b)`.
pub fn dirac_current_kernel(x: &FourVector, mu: usize) -> KernelOperator {
    assert!(mu < 4, "Lorentz index {mu} out of range");
    let x = *x;
    let g = gamma(mu);
    let pointwise = move |pa: &Vector3<f64>, pb: &Vector3<f64>| {
        let (fa, fb) = (FourVector::on_shell(*pa), FourVector::on_shell(*pb));
        let scale = inv_volume() / (fa.t() * fb.t()).sqrt();
        let phase = dirac_phase(pa, &x) * dirac_phase(pb, &x).conj() * scale;
        DMatrix::from_fn(2, 2, |ma, mb| {
            dirac_u(&fa, ma).sandwich(&g, &dirac_u(&fb, mb)) * phase
        })
    };
    let left = move |pa: &Vector3<f64>| {
        let fa = FourVector::on_shell(*pa);
        let phase = dirac_phase(pa, &x) / fa.t().sqrt();
        let mut m = DMatrix::zeros(2, 4);
        for ma in 0..2 {
            let row = dirac_u(&fa, ma).bar() * g;
            for k in 0..4 {
                m[(ma, k)] = row[k] * phase;
            }
        }
        m
    };
    let right = move |pb: &Vector3<f64>| {
        let fb = FourVector::on_shell(*pb);
        let phase = dirac_phase(pb, &x).conj() * (inv_volume() / fb.t().sqrt());
        let mut m = DMatrix::zeros(4, 2);
        for mb in 0..2 {
            let u = dirac_u(&fb, mb);
            for k in 0..4 {
                m[(k, mb)] = u.0[k] * phase;
            }
        }
        m
    };
    KernelOperator {
        spin: Spin::HALF,
        label: format!(
            "Dirac J{mu} at x=({:.6},{:.6},{:.6},{:.6})",
            x.0[0], x.0[1], x.0[2], x.0[3]
        ),
        hermitian: true,
        pointwise: Arc::new(pointwise),
        factors: Some(Factorization {
            rank: 4,
            left: Arc::new(left),
            right: Arc::new(right),
        }),
    }
}

/// `p⃗/(ω + m)`.
fn reduced_momentum(p: &Vector3<f64>) -> Vector3<f64> {
    p / (energy(p) + 1.0)
}

fn velocity(p: &Vector3<f64>) -> Vector3<f64> {
    p / energy(p)
}

/// Closed-form bracket of the trace condition, times `δ_{m_a m_b}/(2π)³`.
///
/// With `diagonal = 3` this is the bracket itself; with `diagonal = 0` only its
/// departure from 3, whose expectation is the deficit directly.
fn bracket_kernel(spin: Spin, diagonal: f64) -> Result<KernelOperator> {
    let with_spin = match spin.twice() {
        0 => false,
        1 => true,
        _ => return Err(Error::NoClosedForm(spin)),
    };
    let d = spin.dim();
    let spin_weight = if with_spin { 1.0 } else { 0.0 };
    let scalar = move |pa: &Vector3<f64>, pb: &Vector3<f64>| {
        let db = velocity(pa) - velocity(pb);
        let dp = reduced_momentum(pa) - reduced_momentum(pb);
        diagonal - 0.25 * db.norm_squared() - 0.5 * spin_weight * dp.norm_squared()
    };
    // diagonal − ¼(β_a² + β_b² − 2β_a·β_b) − ½(P_a² + P_b² − 2P_a·P_b)
    let f = move |pa: &Vector3<f64>| {
        let (b, q) = (velocity(pa), reduced_momentum(pa) * spin_weight);
        vec![
            diagonal - 0.25 * b.norm_squared() - 0.5 * q.norm_squared(),
            1.0,
            0.5 * b.x,
            0.5 * b.y,
            0.5 * b.z,
            q.x,
            q.y,
            q.z,
        ]
    };
    let g = move |pb: &Vector3<f64>| {
        let (b, q) = (velocity(pb), reduced_momentum(pb) * spin_weight);
        [
            1.0,
            -0.25 * b.norm_squared() - 0.5 * q.norm_squared(),
            b.x,
            b.y,
            b.z,
            q.x,
            q.y,
            q.z,
        ]
        .iter()
        .map(|v| v * inv_volume())
        .collect()
    };
    Ok(KernelOperator {
        spin,
        label: format!(
            "trace-condition bracket{} (spin {spin})",
            if diagonal == 0.0 { " minus 3" } else { "" }
        ),
        hermitian: true,
        pointwise: Arc::new(move |pa, pb| identity(d) * C64::from(scalar(pa, pb) * inv_volume())),
        factors: Some(scalar_separable(d, 8, f, g)),
    })
}

/// `[3 − ¼|β_a−β_b|² − ½|p_a/(ω_a+m) − p_b/(ω_b+m)|²] δ/(2π)³` for spin ½, without the
/// last term for spin 0. Higher spins have no closed form.
pub fn deficit_kernel(spin: Spin) -> Result<KernelOperator> {
    bracket_kernel(spin, 3.0)
}

/// [`deficit_kernel`] minus `3·J⁰`: its expectation equals the deficit itself.
pub fn deficit_excess_kernel(spin: Spin) -> Result<KernelOperator> {
    bracket_kernel(spin, 0.0)
}

/// Full kernel of `Σ_i i[K_i, J_i]` for any spin, including its non-diagonal part:
/// `3 − ¼|β_a−β_b|² − (S_a·S_a + S_b·S_b − 2 S_a·S_b) + i(β_b·S_a − β_a·S_b)`, over
/// `(2π)³`, where `S = (J⃗×p⃗)/(ω+m)` and dots contract the spatial index only.
///
/// For spin ½ the matrix part splits into the diagonal bracket of [`deficit_kernel`] plus
/// a spin-orbit term `(i/2) σ⃗·(p⃗_a×p⃗_b) f(ω_a, ω_b)`; the latter has zero expectation
/// whenever the packet carries no orbital angular momentum (for instance any packet
/// whose mean momentum and position offset are collinear).
pub fn trace_kernel(spin: Spin) -> KernelOperator {
    trace_kernel_with_diagonal(spin, 3.0)
}

/// [`trace_kernel`] minus `3·J⁰`.
pub fn trace_excess_kernel(spin: Spin) -> KernelOperator {
    trace_kernel_with_diagonal(spin, 0.0)
}

fn trace_kernel_with_diagonal(spin: Spin, diagonal: f64) -> KernelOperator {
    let d = spin.dim();
    let rep = Arc::new(spin_matrices(spin));
    let spin_term = {
        let rep = rep.clone();
        move |p: &Vector3<f64>| boost_spin_term(&rep, p)
    };
    let square = |s: &[DMatrix<C64>; 3]| &s[0] * &s[0] + &s[1] * &s[1] + &s[2] * &s[2];
    let i = C64::new(0.0, 1.0);
    let pointwise = {
        let spin_term = spin_term.clone();
        move |pa: &Vector3<f64>, pb: &Vector3<f64>| {
            let (sa, sb) = (spin_term(pa), spin_term(pb));
            let (ba, bb) = (velocity(pa), velocity(pb));
            let mut k = identity(d) * C64::from(diagonal - 0.25 * (ba - bb).norm_squared());
            k -= square(&sa) + square(&sb);
            for j in 0..3 {
                k += &sa[j] * &sb[j] * C64::from(2.0);
                k += (&sa[j] * C64::from(bb[j]) - &sb[j] * C64::from(ba[j])) * i;
            }
            k * C64::from(inv_volume())
        }
    };
    // Blocks: [A0 | 1 | (½β_j + iS_j) | (2S_j − iβ_j)] against [1; B1; β_j; S_j].
    let rank = 8 * d;
    let left = {
        let spin_term = spin_term.clone();
        move |pa: &Vector3<f64>| {
            let (s, b) = (spin_term(pa), velocity(pa));
            let mut m = DMatrix::zeros(d, rank);
            let a0 = identity(d) * C64::from(diagonal - 0.25 * b.norm_squared()) - square(&s);
            m.view_mut((0, 0), (d, d)).copy_from(&a0);
            m.view_mut((0, d), (d, d)).copy_from(&identity(d));
            for j in 0..3 {
                let conv = identity(d) * C64::from(0.5 * b[j]) + &s[j] * i;
                let orbit = &s[j] * C64::from(2.0) - identity(d) * (i * b[j]);
                m.view_mut((0, (2 + j) * d), (d, d)).copy_from(&conv);
                m.view_mut((0, (5 + j) * d), (d, d)).copy_from(&orbit);
            }
            m
        }
    };
    let right = move |pb: &Vector3<f64>| {
        let (s, b) = (spin_term(pb), velocity(pb));
        let mut m = DMatrix::zeros(rank, d);
        let b1 = identity(d) * C64::from(-0.25 * b.norm_squared()) - square(&s);
        m.view_mut((0, 0), (d, d)).copy_from(&identity(d));
        m.view_mut((d, 0), (d, d)).copy_from(&b1);
        for j in 0..3 {
            m.view_mut(((2 + j) * d, 0), (d, d))
                .copy_from(&(identity(d) * C64::from(b[j])));
            m.view_mut(((5 + j) * d, 0), (d, d)).copy_from(&s[j]);
        }
        m * C64::from(inv_volume())
    };
    KernelOperator {
        spin,
        label: format!(
            "full trace kernel{} (spin {spin})",
            if diagonal == 0.0 { " minus 3" } else { "" }
        ),
        hermitian: true,
        pointwise: Arc::new(pointwise),
        factors: Some(Factorization {
            rank,
            left: Arc::new(left),
            right: Arc::new(right),
        }),
    }
}

/// The zero operator.
pub fn zero_kernel(spin: Spin) -> KernelOperator {
    let d = spin.dim();
    KernelOperator {
        spin,
        label: format!("zero (spin {spin})"),
        hermitian: true,
        pointwise: Arc::new(move |_, _| DMatrix::zeros(d, d)),
        factors: Some(scalar_separable(d, 1, |_| vec![0.0], |_| vec![0.0])),
    }
}

/// `∫d³p Ψ†(p) (2π)³K(p, p) Ψ(p)`: the spatial integral `∫d³x ⟨J(t, x⃗)⟩` of a kernel whose
/// position dependence is the plane-wave phase, after `∫d³x e^{i(p_a−p_b)·x} = (2π)³δ³`.
pub fn spatial_integral(
    op: &KernelOperator,
    psi: &dyn MomentumAmplitude,
    rule: &QuadratureRule,
) -> Result<f64> {
    check_spin(op, psi.spin())?;
    let volume = (2.0 * PI).powi(3);
    let terms = par_map(&(0..rule.len()).collect::<Vec<_>>(), |&k| {
        let p = rule.nodes()[k];
        let v = psi.eval(&p);
        let z = (v.adjoint() * op.matrix(&p, &p) * &v)[(0, 0)];
        z * (rule.weights()[k] * volume)
    });
    Ok(pairwise_sum(&terms).re)
}

fn check_spin(op: &KernelOperator, spin: Spin) -> Result<()> {
    if op.spin() != spin {
        return Err(Error::SpinMismatch {
            expected: op.spin(),
            found: spin,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Kernel application
// ---------------------------------------------------------------------------

/// How to contract a kernel against node samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Contraction {
    /// Factored when factors exist, dense otherwise.
    Auto,
    /// O(N²) pointwise contraction.
    Dense,
    /// O(N·rank) through the factorization; an error if none exists.
    Factored,
}

struct Applied {
    spin: Spin,
    label: String,
    op: KernelOperator,
    // Factored: R·ψ summed over nodes.
    projected: Option<DVector<C64>>,
    // Dense: nodes and weighted samples.
    nodes: Vec<Vector3<f64>>,
    weighted: Vec<DVector<C64>>,
}

impl MomentumAmplitude for Applied {
    fn spin(&self) -> Spin {
        self.spin
    }

    fn eval(&self, p: &Vector3<f64>) -> DVector<C64> {
        match &self.projected {
            Some(b) => {
                self.op
                    .factors()
                    .expect("factored application keeps factors")
                    .left(p)
                    * b
            }
            None => {
                let d = self.spin.dim();
                let rows: Vec<C64> = self
                    .nodes
                    .iter()
                    .zip(&self.weighted)
                    .flat_map(|(q, v)| {
                        (self.op.matrix(p, q) * v)
                            .iter()
                            .copied()
                            .collect::<Vec<_>>()
                    })
                    .collect();
                DVector::from_vec(pairwise_sum_columns(&rows, d))
            }
        }
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// `(Oψ)_{m_a}(p_a) = ∫d³p_b Σ K(p_a,m_a; p_b,m_b) Ψ_{m_b}(p_b)`, as a callable amplitude.
///
/// The kernel must be smooth: a δ³ kernel has no node expansion. Fails the
/// convergence gate if ψ leaves more than a negligible mass on the rule's boundary.
pub fn apply_kernel(
    op: &KernelOperator,
    psi: &dyn MomentumAmplitude,
    rule: &QuadratureRule,
    mode: Contraction,
) -> Result<Amplitude> {
    check_spin(op, psi.spin())?;
    let edge = boundary_mass_fraction(psi, rule);
    if edge > tolerance::BOUNDARY_MASS {
        return Err(Error::QuadratureGate(format!(
            "boundary mass {edge:.3e} on {} exceeds {:.0e}",
            rule.label(),
            tolerance::BOUNDARY_MASS
        )));
    }
    let samples = sample(psi, rule);
    let label = format!("{} applied to {}", op.label(), psi.describe());
    let factored = match mode {
        Contraction::Dense => false,
        Contraction::Auto => op.factors().is_some(),
        Contraction::Factored => {
            if op.factors().is_none() {
                return Err(Error::InvalidInput(format!(
                    "{} has no factorization",
                    op.label()
                )));
            }
            true
        }
    };
    if factored {
        let projected = project_right(op.factors().expect("checked above"), &samples, rule);
        return Ok(Arc::new(Applied {
            spin: op.spin(),
            label,
            op: op.clone(),
            projected: Some(projected),
            nodes: Vec::new(),
            weighted: Vec::new(),
        }));
    }
    let weighted = (0..rule.len())
        .map(|k| DVector::from_column_slice(samples.at(k)) * C64::from(rule.weights()[k]))
        .collect();
    Ok(Arc::new(Applied {
        spin: op.spin(),
        label,
        op: op.clone(),
        projected: None,
        nodes: rule.nodes().to_vec(),
        weighted,
    }))
}

/// `Σ_b w_b R(p_b) Ψ(p_b)`.
fn project_right(f: &Factorization, samples: &Samples, rule: &QuadratureRule) -> DVector<C64> {
    let rows = par_map(&(0..rule.len()).collect::<Vec<_>>(), |&k| {
        let v = DVector::from_column_slice(samples.at(k));
        (f.right(&rule.nodes()[k]) * v * C64::from(rule.weights()[k]))
            .data
            .as_vec()
            .clone()
    });
    let flat: Vec<C64> = rows.into_iter().flatten().collect();
    DVector::from_vec(pairwise_sum_columns(&flat, f.rank))
}

// ---------------------------------------------------------------------------
// Boost generator
// ---------------------------------------------------------------------------

/// `(K_iΨ)(p) = −(i/2){ω, ∂_i}Ψ + S_i(p)Ψ = −i(ω∂_iΨ + (p_i/2ω)Ψ) + S_iΨ`,
/// with `S⃗ = (J⃗ × p⃗)/(ω + m)`, for all three axes at once.
fn generator_at(
    rep: &SpinRep,
    p: &Vector3<f64>,
    value: &DVector<C64>,
    gradient: &[DVector<C64>; 3],
) -> [DVector<C64>; 3] {
    let w = energy(p);
    let spin_terms = boost_spin_term(rep, p);
    std::array::from_fn(|i| {
        let orbital =
            (&gradient[i] * C64::from(w) + value * C64::from(0.5 * p[i] / w)) * C64::new(0.0, -1.0);
        orbital + &spin_terms[i] * value
    })
}

struct Generated {
    inner: Amplitude,
    rep: SpinRep,
    axis: usize,
    allow_fallback: bool,
}

impl MomentumAmplitude for Generated {
    fn spin(&self) -> Spin {
        self.inner.spin()
    }

    fn eval(&self, p: &Vector3<f64>) -> DVector<C64> {
        let grad = gradient_or_fallback(self.inner.as_ref(), p, self.allow_fallback)
            .expect("gradient availability checked at construction");
        let out = generator_at(&self.rep, p, &self.inner.eval(p), &grad);
        out.into_iter()
            .nth(self.axis)
            .expect("axis checked at construction")
    }

    fn describe(&self) -> String {
        format!("K{}({})", ["x", "y", "z"][self.axis], self.inner.describe())
    }
}

/// `K_i ψ` as a callable amplitude. Needs an analytic gradient unless the
/// finite-difference fallback is allowed.
pub fn boost_generator_apply(
    psi: &Amplitude,
    axis: usize,
    allow_fallback: bool,
) -> Result<Amplitude> {
    if axis >= 3 {
        return Err(Error::InvalidInput(format!(
            "spatial axis {axis} out of range"
        )));
    }
    if !psi.has_gradient() && !allow_fallback {
        return Err(Error::MissingGradient);
    }
    Ok(Arc::new(Generated {
        inner: psi.clone(),
        rep: spin_matrices(psi.spin()),
        axis,
        allow_fallback,
    }))
}

// ---------------------------------------------------------------------------
// Commutators
// ---------------------------------------------------------------------------

/// Node samples of ψ and of `K_xψ, K_yψ, K_zψ` on one rule, reused across every
/// kernel. The no-go audit and the Dirac control both go through this type.
pub struct CommutatorEngine<'a> {
    rule: &'a QuadratureRule,
    spin: Spin,
    psi: Samples,
    generated: [Samples; 3],
    mode: Contraction,
}

/// `⟨ψ|O|ψ⟩` together with `⟨K_iψ|Oψ⟩` for i = x, y, z.
#[derive(Clone, Copy, Debug)]
pub struct Pairings {
    pub expectation: C64,
    pub generated: [C64; 3],
}

impl Pairings {
    /// `⟨i[K_i, O]⟩ = −2 Im⟨K_iψ|Oψ⟩`, valid for Hermitian O.
    pub fn commutator(&self, axis: usize) -> f64 {
        -2.0 * self.generated[axis].im
    }
}

impl<'a> CommutatorEngine<'a> {
    pub fn new(
        psi: &dyn MomentumAmplitude,
        rule: &'a QuadratureRule,
        allow_fallback: bool,
    ) -> Result<Self> {
        if !psi.has_gradient() && !allow_fallback {
            return Err(Error::MissingGradient);
        }
        let spin = psi.spin();
        let rep = spin_matrices(spin);
        let rows = par_map(rule.nodes(), |p| {
            let value = psi.eval(p);
            let grad = gradient_or_fallback(psi, p, allow_fallback).expect("checked above");
            let k = generator_at(&rep, p, &value, &grad);
            (value, k)
        });
        let flatten = |f: &dyn Fn(&Row) -> &DVector<C64>| Samples {
            spin,
            values: rows.iter().flat_map(|r| f(r).iter().copied()).collect(),
        };
        Ok(Self {
            rule,
            spin,
            psi: flatten(&|r| &r.0),
            generated: [
                flatten(&|r| &r.1[0]),
                flatten(&|r| &r.1[1]),
                flatten(&|r| &r.1[2]),
            ],
            mode: Contraction::Auto,
        })
    }

    pub fn with_contraction(mut self, mode: Contraction) -> Self {
        self.mode = mode;
        self
    }

    pub fn rule(&self) -> &QuadratureRule {
        self.rule
    }

    pub fn psi(&self) -> &Samples {
        &self.psi
    }

    pub fn generated(&self, axis: usize) -> &Samples {
        &self.generated[axis]
    }

    pub fn pairings(&self, op: &KernelOperator) -> Result<Pairings> {
        check_spin(op, self.spin)?;
        let factored = match self.mode {
            Contraction::Dense => false,
            Contraction::Auto => op.factors().is_some(),
            Contraction::Factored => {
                if op.factors().is_none() {
                    return Err(Error::InvalidInput(format!(
                        "{} has no factorization",
                        op.label()
                    )));
                }
                true
            }
        };
        let lefts = [
            &self.psi,
            &self.generated[0],
            &self.generated[1],
            &self.generated[2],
        ];
        let d = self.spin.dim();
        let rule = self.rule;
        let idx: Vec<usize> = (0..rule.len()).collect();
        let sums: Vec<C64> = if factored {
            let f = op.factors().expect("checked above");
            let b = project_right(f, &self.psi, rule);
            // Σ_a w_a φ(a)† L(a) b, for the four left states at once.
            let rows = par_map(&idx, |&k| {
                let lb = f.left(&rule.nodes()[k]) * &b;
                let w = rule.weights()[k];
                lefts.map(|s| dot_conj(s.at(k), lb.as_slice()) * w)
            });
            let flat: Vec<C64> = rows.into_iter().flatten().collect();
            pairwise_sum_columns(&flat, 4)
        } else {
            let nodes = rule.nodes();
            let weights = rule.weights();
            let rows = par_map(&idx, |&a| {
                let mut acc = Vec::with_capacity(rule.len() * d);
                for b in 0..rule.len() {
                    let v = DVector::from_column_slice(self.psi.at(b)) * C64::from(weights[b]);
                    acc.extend((op.matrix(&nodes[a], &nodes[b]) * v).iter().copied());
                }
                let o_psi = pairwise_sum_columns(&acc, d);
                lefts.map(|s| dot_conj(s.at(a), &o_psi) * weights[a])
            });
            let flat: Vec<C64> = rows.into_iter().flatten().collect();
            pairwise_sum_columns(&flat, 4)
        };
        Ok(Pairings {
            expectation: sums[0],
            generated: [sums[1], sums[2], sums[3]],
        })
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, op: &KernelOperator) -> Result<C64> {
        Ok(self.pairings(op)?.expectation)
    }

    /// `⟨ψ|i[K_axis, O]|ψ⟩`; O must be declared Hermitian.
    pub fn commutator(&self, axis: usize, op: &KernelOperator) -> Result<f64> {
        if !op.is_hermitian() {
            return Err(Error::InvalidInput(format!(
                "{} is not Hermitian",
                op.label()
            )));
        }
        Ok(self.pairings(op)?.commutator(axis))
    }

    /// `⟨K_iφ, ψ⟩ − ⟨φ, K_iψ⟩` with φ = ψ is trivially real-symmetric; this
    /// instead returns `Im⟨ψ|K_iψ⟩`, which vanishes for a Hermitian generator.
    pub fn generator_expectation(&self, axis: usize) -> Result<C64> {
        self.psi.inner(&self.generated[axis], self.rule)
    }
}

fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `⟨ψ|i[K_axis, O]|ψ⟩` via `−2 Im⟨K_iψ|Oψ⟩` on one rule.
pub fn commutator_expectation(
    axis: usize,
    op: &KernelOperator,
    psi: &dyn MomentumAmplitude,
    rule: &QuadratureRule,
) -> Result<f64> {
    if axis >= 3 {
        return Err(Error::InvalidInput(format!(
            "spatial axis {axis} out of range"
        )));
    }
    CommutatorEngine::new(psi, rule, true)?.commutator(axis, op)
}

/// `⟨ψ|O|ψ⟩` on one rule.
pub fn kernel_expectation(
    op: &KernelOperator,
    psi: &dyn MomentumAmplitude,
    rule: &QuadratureRule,
) -> Result<C64> {
    check_spin(op, psi.spin())?;
    let samples = sample(psi, rule);
    let f = match op.factors() {
        Some(f) => f,
        None => {
            return CommutatorEngine::new(psi, rule, true)?
                .with_contraction(Contraction::Dense)
                .expectation(op)
        }
    };
    let b = project_right(f, &samples, rule);
    let terms = par_map(&(0..rule.len()).collect::<Vec<_>>(), |&k| {
        let lb = f.left(&rule.nodes()[k]) * &b;
        dot_conj(samples.at(k), lb.as_slice()) * rule.weights()[k]
    });
    Ok(pairwise_sum(&terms))
}

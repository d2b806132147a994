//! Momentum-spin amplitudes Ψ_m(p⃗) and their transformations.
//!
//! States are expanded as `|ψ⟩ = ∫d³p/√ω Σ_m |p,m⟩ Ψ_m(p)` against covariantly
//! normalised basis states, so the scalar product is the plain
//! `∫d³p Σ_m φ*_m ψ_m`. Amplitudes are closed-form callables: a boost needs Ψ at
//! `Λ⁻¹p`, and an interpolated grid would leak into every downstream commutator.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::lorentz::{energy, FourVector, LorentzTransform, Rapidity, SpinorMap};
use crate::numerics::{pairwise_sum, pairwise_sum_columns, par_map};
use crate::quadrature::QuadratureRule;
use crate::spin::{spin_matrices, Spin, SpinRep};
use crate::tolerance;
use crate::C64;

/// Spin multiplet of complex functions of the 3-momentum.
pub trait MomentumAmplitude: Send + Sync {
    fn spin(&self) -> Spin;

    /// All `2s+1` components at `p`, in m-descending order.
    fn eval(&self, p: &Vector3<f64>) -> DVector<C64>;

    /// Analytic `∂Ψ/∂p_k` for k = x, y, z, when the family provides one.
    fn gradient(&self, _p: &Vector3<f64>) -> Option<[DVector<C64>; 3]> {
        None
    }

    fn has_gradient(&self) -> bool {
        false
    }

    fn describe(&self) -> String;
}

/// Shared handle to an amplitude.
pub type Amplitude = Arc<dyn MomentumAmplitude>;

impl fmt::Debug for dyn MomentumAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

fn central_difference(
    psi: &dyn MomentumAmplitude,
    p: &Vector3<f64>,
    k: usize,
    h: f64,
) -> DVector<C64> {
    let mut plus = *p;
    let mut minus = *p;
    plus[k] += h;
    minus[k] -= h;
    (psi.eval(&plus) - psi.eval(&minus)) / C64::from(2.0 * h)
}

/// Central differences with `h = max(1e−5, 1e−5|p|)`, Richardson-extrapolated once.
pub fn finite_difference_gradient(
    psi: &dyn MomentumAmplitude,
    p: &Vector3<f64>,
) -> [DVector<C64>; 3] {
    let h = (1e-5_f64).max(1e-5 * p.norm());
    std::array::from_fn(|k| {
        let coarse = central_difference(psi, p, k, h);
        let fine = central_difference(psi, p, k, h / 2.0);
        (fine * C64::from(4.0) - coarse) / C64::from(3.0)
    })
}

/// Analytic gradient when available, otherwise the finite-difference fallback if allowed.
pub fn gradient_or_fallback(
    psi: &dyn MomentumAmplitude,
    p: &Vector3<f64>,
    allow_fallback: bool,
) -> Option<[DVector<C64>; 3]> {
    psi.gradient(p)
        .or_else(|| allow_fallback.then(|| finite_difference_gradient(psi, p)))
}

// ---------------------------------------------------------------------------
// Gaussian packets
// ---------------------------------------------------------------------------

/// `Ψ_m(p) = c_m Π_k (2πσ_k²)^{−1/4} exp(−(p_k − p0_k)²/4σ_k²) e^{−ip⃗·x⃗₀}`.
///
/// The momentum density has mean `p⃗₀` and standard deviation `σ_k` per axis; the
/// phase tilt places the position-space centre at `x⃗₀` at `t = 0`.
#[derive(Clone, Debug)]
pub struct GaussianPacket {
    spin: Spin,
    center: Vector3<f64>,
    width: Vector3<f64>,
    weights: DVector<C64>,
    offset: Vector3<f64>,
    norm: f64,
}

impl GaussianPacket {
    /// Spin weights are normalised; an all-zero weight vector is rejected.
    pub fn new(
        spin: Spin,
        center: Vector3<f64>,
        width: Vector3<f64>,
        weights: &[C64],
        offset: Vector3<f64>,
    ) -> Result<Self> {
        if weights.len() != spin.dim() {
            return Err(Error::InvalidInput(format!(
                "spin {spin} needs {} weights, got {}",
                spin.dim(),
                weights.len()
            )));
        }
        if width.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "widths must be positive, got {width:?}"
            )));
        }
        let w = DVector::from_column_slice(weights);
        let n = w.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidInput("spin weights vanish".into()));
        }
        let norm = (0..3)
            .map(|k| (2.0 * PI * width[k] * width[k]).powf(-0.25))
            .product();
        Ok(Self {
            spin,
            center,
            width,
            weights: w / C64::from(n),
            offset,
            norm,
        })
    }

    /// Isotropic width σ, centred at rest, highest-weight spin state.
    pub fn isotropic(spin: Spin, sigma: f64) -> Result<Self> {
        let mut w = vec![C64::new(0.0, 0.0); spin.dim()];
        w[0] = C64::new(1.0, 0.0);
        Self::new(
            spin,
            Vector3::zeros(),
            Vector3::repeat(sigma),
            &w,
            Vector3::zeros(),
        )
    }

    /// σ = 0.5, p⃗₀ = 0, highest weight.
    pub fn standard(spin: Spin) -> Self {
        Self::isotropic(spin, 0.5).expect("standard packet parameters are valid")
    }

    pub fn center(&self) -> Vector3<f64> {
        self.center
    }

    pub fn width(&self) -> Vector3<f64> {
        self.width
    }

    pub fn weights(&self) -> &DVector<C64> {
        &self.weights
    }

    pub fn offset(&self) -> Vector3<f64> {
        self.offset
    }

    /// Centred, isotropic and untilted: Ψ_m(p) = c_m g(|p|).
    pub fn is_spherical(&self) -> bool {
        self.center == Vector3::zeros()
            && self.offset == Vector3::zeros()
            && self.width.x == self.width.y
            && self.width.y == self.width.z
    }

    /// Scalar profile, without spin weights.
    pub fn profile(&self, p: &Vector3<f64>) -> C64 {
        let d = p - self.center;
        let mut arg = 0.0;
        for k in 0..3 {
            arg -= d[k] * d[k] / (4.0 * self.width[k] * self.width[k]);
        }
        C64::from_polar(self.norm * arg.exp(), -p.dot(&self.offset))
    }

    /// Gauss-Hermite rule matched to the packet (`p = p⃗₀ + 2σ∘x`).
    pub fn quadrature(&self, nodes_per_axis: usize) -> Result<QuadratureRule> {
        QuadratureRule::gauss_hermite(self.center, self.width * 2.0, nodes_per_axis)
    }

    pub fn into_amplitude(self) -> Amplitude {
        Arc::new(self)
    }
}

impl MomentumAmplitude for GaussianPacket {
    fn spin(&self) -> Spin {
        self.spin
    }

    fn eval(&self, p: &Vector3<f64>) -> DVector<C64> {
        &self.weights * self.profile(p)
    }

    fn gradient(&self, p: &Vector3<f64>) -> Option<[DVector<C64>; 3]> {
        let g = self.profile(p);
        let d = p - self.center;
        Some(std::array::from_fn(|k| {
            let factor = C64::new(
                -d[k] / (2.0 * self.width[k] * self.width[k]),
                -self.offset[k],
            );
            &self.weights * (g * factor)
        }))
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        let c = &self.center;
        let w = &self.width;
        let x = &self.offset;
        let weights: Vec<String> = self
            .weights
            .iter()
            .map(|z| format!("{:.6}{:+.6}i", z.re, z.im))
            .collect();
        format!(
            "gaussian spin={} p0=({:.6},{:.6},{:.6}) sigma=({:.6},{:.6},{:.6}) x0=({:.6},{:.6},{:.6}) weights=[{}]",
            self.spin,
            c.x, c.y, c.z,
            w.x, w.y, w.z,
            x.x, x.y, x.z,
            weights.join(";")
        )
    }
}

// ---------------------------------------------------------------------------
// Poincaré and inversion transforms
// ---------------------------------------------------------------------------

struct Translated {
    inner: Amplitude,
    shift: FourVector,
}

impl Translated {
    fn phase(&self, p: &Vector3<f64>) -> C64 {
        C64::from_polar(1.0, FourVector::on_shell(*p).dot(&self.shift))
    }
}

impl MomentumAmplitude for Translated {
    fn spin(&self) -> Spin {
        self.inner.spin()
    }

    fn eval(&self, p: &Vector3<f64>) -> DVector<C64> {
        self.inner.eval(p) * self.phase(p)
    }

    fn gradient(&self, p: &Vector3<f64>) -> Option<[DVector<C64>; 3]> {
        let g = self.inner.gradient(p)?;
        let psi = self.inner.eval(p);
        let e = self.phase(p);
        let w = energy(p);
        let a = self.shift.spatial();
        Some(std::array::from_fn(|k| {
            let dphase = C64::new(0.0, p[k] / w * self.shift.t() - a[k]);
            (&g[k] + &psi * dphase) * e
        }))
    }

    fn has_gradient(&self) -> bool {
        self.inner.has_gradient()
    }

    fn describe(&self) -> String {
        format!(
            "translate[{:?}]({})",
            self.shift.0.as_slice(),
            self.inner.describe()
        )
    }
}

/// `Ψ'_m(p) = Ψ_m(p) e^{+ip·a}`.
pub fn translate(psi: &Amplitude, a: &FourVector) -> Amplitude {
    Arc::new(Translated {
        inner: psi.clone(),
        shift: *a,
    })
}

struct Rotated {
    inner: Amplitude,
    d: DMatrix<C64>,
    inverse: Matrix3<f64>,
    label: String,
}

impl MomentumAmplitude for Rotated {
    fn spin(&self) -> Spin {
        self.inner.spin()
    }

    fn eval(&self, p: &Vector3<f64>) -> DVector<C64> {
        &self.d * self.inner.eval(&(self.inverse * p))
    }

    fn gradient(&self, p: &Vector3<f64>) -> Option<[DVector<C64>; 3]> {
        let g = self.inner.gradient(&(self.inverse * p))?;
        Some(std::array::from_fn(|k| {
            let mut acc = DVector::zeros(g[0].len());
            for j in 0..3 {
                acc += &g[j] * C64::from(self.inverse[(j, k)]);
            }
            &self.d * acc
        }))
    }

    fn has_gradient(&self) -> bool {
        self.inner.has_gradient()
    }

    fn describe(&self) -> String {
        format!("rotate[{}]({})", self.label, self.inner.describe())
    }
}

/// `Ψ'_m(p) = Σ_m' D^{(s)}_{mm'}(R) Ψ_m'(R⁻¹p)`.
pub fn rotate(psi: &Amplitude, r: &SpinorMap) -> Result<Amplitude> {
    let d = crate::spin::wigner_d(psi.spin(), r)?;
    let rot = r
        .covering_unchecked()
        .0
        .fixed_view::<3, 3>(1, 1)
        .into_owned();
    let (theta, axis) = r.axis_angle();
    Ok(Arc::new(Rotated {
        inner: psi.clone(),
        d,
        inverse: rot.transpose(),
        label: format!(
            "theta={theta:.6} axis=({:.6},{:.6},{:.6})",
            axis.x, axis.y, axis.z
        ),
    }))
}

struct Boosted {
    inner: Amplitude,
    rep: SpinRep,
    lift: SpinorMap,
    inverse: LorentzTransform,
    velocity: Vector3<f64>,
}

impl MomentumAmplitude for Boosted {
    fn spin(&self) -> Spin {
        self.inner.spin()
    }

    fn eval(&self, p: &Vector3<f64>) -> DVector<C64> {
        let on = FourVector::on_shell(*p);
        let q = self.inverse.apply(&on).spatial();
        let qv = FourVector::on_shell(q);
        // √(γ₀(1 − β⃗₀·β⃗)) = √(ω_q/ω_p)
        let prefactor = (energy(&q) / on.t()).sqrt();
        let w =
            SpinorMap::standard_boost(&on).inverse() * self.lift * SpinorMap::standard_boost(&qv);
        self.rep.rotation_matrix(&w) * self.inner.eval(&q) * C64::from(prefactor)
    }

    fn describe(&self) -> String {
        let b = &self.velocity;
        format!(
            "boost[beta=({:.6},{:.6},{:.6})]({})",
            b.x,
            b.y,
            b.z,
            self.inner.describe()
        )
    }
}

/// Boost by velocity β⃗₀:
/// `Ψ'_m(p) = √(γ₀(1−β⃗₀·β⃗)) Σ_m' D_{mm'}(W(p ← Λ⁻¹p)) Ψ_m'(Λ⁻¹p)`.
///
/// The returned amplitude has no analytic gradient.
pub fn boost_by_velocity(psi: &Amplitude, beta: &Vector3<f64>) -> Result<Amplitude> {
    let lambda = LorentzTransform::boost_from_velocity(beta)?;
    Ok(Arc::new(Boosted {
        inner: psi.clone(),
        rep: spin_matrices(psi.spin()),
        lift: SpinorMap::boost(beta)?,
        inverse: lambda.inverse(),
        velocity: *beta,
    }))
}

/// Boost by a pure-boost matrix; other transformations are rejected.
pub fn boost(psi: &Amplitude, lambda: &LorentzTransform) -> Result<Amplitude> {
    if !lambda.is_pure_boost(1e-9) || !lambda.is_proper_orthochronous() {
        return Err(Error::InvalidInput(
            "boost expects a pure boost matrix".into(),
        ));
    }
    boost_by_velocity(psi, &lambda.velocity())
}

/// Boost by rapidity vector ζ⃗.
pub fn boost_by_rapidity(psi: &Amplitude, zeta: &Rapidity) -> Amplitude {
    boost_by_velocity(psi, &zeta.velocity()).expect("tanh keeps |β| below 1")
}

struct Parity {
    inner: Amplitude,
}

impl MomentumAmplitude for Parity {
    fn spin(&self) -> Spin {
        self.inner.spin()
    }

    fn eval(&self, p: &Vector3<f64>) -> DVector<C64> {
        self.inner.eval(&-p)
    }

    fn gradient(&self, p: &Vector3<f64>) -> Option<[DVector<C64>; 3]> {
        let g = self.inner.gradient(&-p)?;
        Some(g.map(|v| -v))
    }

    fn has_gradient(&self) -> bool {
        self.inner.has_gradient()
    }

    fn describe(&self) -> String {
        format!("parity({})", self.inner.describe())
    }
}

/// Space inversion with intrinsic parity η = 1: `Ψ'_m(ω, p⃗) = Ψ_m(ω, −p⃗)`.
pub fn parity(psi: &Amplitude) -> Amplitude {
    Arc::new(Parity { inner: psi.clone() })
}

struct TimeReversed {
    inner: Amplitude,
}

impl TimeReversed {
    fn reorder(&self, v: &DVector<C64>) -> DVector<C64> {
        let spin = self.inner.spin();
        DVector::from_fn(spin.dim(), |k, _| {
            // (−)^{s+m} with s + m = 2s − k
            let sign = if (spin.twice() as usize - k).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            v[spin.flipped(k)].conj() * sign
        })
    }
}

impl MomentumAmplitude for TimeReversed {
    fn spin(&self) -> Spin {
        self.inner.spin()
    }

    fn eval(&self, p: &Vector3<f64>) -> DVector<C64> {
        self.reorder(&self.inner.eval(&-p))
    }

    fn gradient(&self, p: &Vector3<f64>) -> Option<[DVector<C64>; 3]> {
        let g = self.inner.gradient(&-p)?;
        Some(g.map(|v| -self.reorder(&v)))
    }

    fn has_gradient(&self) -> bool {
        self.inner.has_gradient()
    }

    fn describe(&self) -> String {
        format!("time_reversal({})", self.inner.describe())
    }
}

/// Time reversal: `Ψ'_m(ω, p⃗) = (−)^{s+m} Ψ*_{−m}(ω, −p⃗)`.
pub fn time_reversal(psi: &Amplitude) -> Amplitude {
    Arc::new(TimeReversed { inner: psi.clone() })
}

struct Combination {
    spin: Spin,
    terms: Vec<(C64, Amplitude)>,
}

impl MomentumAmplitude for Combination {
    fn spin(&self) -> Spin {
        self.spin
    }

    fn eval(&self, p: &Vector3<f64>) -> DVector<C64> {
        self.terms
            .iter()
            .fold(DVector::zeros(self.spin.dim()), |acc, (c, a)| {
                acc + a.eval(p) * *c
            })
    }

    fn gradient(&self, p: &Vector3<f64>) -> Option<[DVector<C64>; 3]> {
        let mut out: [DVector<C64>; 3] = std::array::from_fn(|_| DVector::zeros(self.spin.dim()));
        for (c, a) in &self.terms {
            let g = a.gradient(p)?;
            for k in 0..3 {
                out[k] += &g[k] * *c;
            }
        }
        Some(out)
    }

    fn has_gradient(&self) -> bool {
        self.terms.iter().all(|(_, a)| a.has_gradient())
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(c, a)| format!("({:.6}{:+.6}i)*{}", c.re, c.im, a.describe()))
            .collect();
        parts.join(" + ")
    }
}

/// Linear combination `Σ c_i ψ_i` (not normalised).
pub fn combine(terms: &[(C64, Amplitude)]) -> Result<Amplitude> {
    let spin = terms
        .first()
        .ok_or_else(|| Error::InvalidInput("empty combination".into()))?
        .1
        .spin();
    if let Some((_, bad)) = terms.iter().find(|(_, a)| a.spin() != spin) {
        return Err(Error::SpinMismatch {
            expected: spin,
            found: bad.spin(),
        });
    }
    Ok(Arc::new(Combination {
        spin,
        terms: terms.to_vec(),
    }))
}

// ---------------------------------------------------------------------------
// Sampling, scalar products and expectations
// ---------------------------------------------------------------------------

/// Amplitude values at the nodes of a rule, row-major `[node][m]`.
#[derive(Clone, Debug)]
pub struct Samples {
    pub spin: Spin,
    pub values: Vec<C64>,
}

impl Samples {
    pub fn at(&self, node: usize) -> &[C64] {
        let d = self.spin.dim();
        &self.values[node * d..(node + 1) * d]
    }

    /// `Σ_k w_k Σ_m conj(self) other`.
    pub fn inner(&self, other: &Samples, rule: &QuadratureRule) -> Result<C64> {
        if self.spin != other.spin {
            return Err(Error::SpinMismatch {
                expected: self.spin,
                found: other.spin,
            });
        }
        let w = rule.weights();
        let idx: Vec<usize> = (0..rule.len()).collect();
        let terms = par_map(&idx, |&k| {
            let s: C64 = self
                .at(k)
                .iter()
                .zip(other.at(k))
                .map(|(a, b)| a.conj() * b)
                .sum();
            s * w[k]
        });
        Ok(pairwise_sum(&terms))
    }
}

/// Evaluates ψ at every node in parallel.
pub fn sample(psi: &dyn MomentumAmplitude, rule: &QuadratureRule) -> Samples {
    let rows = par_map(rule.nodes(), |p| psi.eval(p));
    let values = rows.iter().flat_map(|v| v.iter().copied()).collect();
    Samples {
        spin: psi.spin(),
        values,
    }
}

/// `⟨φ|ψ⟩ = ∫d³p Σ_m φ*_m(p) ψ_m(p)`.
pub fn inner_product(
    phi: &dyn MomentumAmplitude,
    psi: &dyn MomentumAmplitude,
    rule: &QuadratureRule,
) -> Result<C64> {
    if phi.spin() != psi.spin() {
        return Err(Error::SpinMismatch {
            expected: phi.spin(),
            found: psi.spin(),
        });
    }
    sample(phi, rule).inner(&sample(psi, rule), rule)
}

pub fn norm_squared(psi: &dyn MomentumAmplitude, rule: &QuadratureRule) -> f64 {
    let density = par_map(rule.nodes(), |p| psi.eval(p).norm_squared());
    let terms: Vec<f64> = density
        .iter()
        .zip(rule.weights())
        .map(|(d, w)| d * w)
        .collect();
    pairwise_sum(&terms)
}

/// `⟨p^μ⟩ = ∫d³p Σ_m |Ψ_m|² p^μ`.
pub fn expectation_four_momentum(psi: &dyn MomentumAmplitude, rule: &QuadratureRule) -> FourVector {
    let rows = par_map(&(0..rule.len()).collect::<Vec<_>>(), |&k| {
        let p = rule.nodes()[k];
        let d = psi.eval(&p).norm_squared() * rule.weights()[k];
        [d * energy(&p), d * p.x, d * p.y, d * p.z]
    });
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let s = pairwise_sum_columns(&flat, 4);
    FourVector::new(s[0], s[1], s[2], s[3])
}

/// `⟨s_z⟩ = ∫d³p Σ_m |Ψ_m|² m`.
pub fn expectation_sz(psi: &dyn MomentumAmplitude, rule: &QuadratureRule) -> f64 {
    let spin = psi.spin();
    let terms = par_map(&(0..rule.len()).collect::<Vec<_>>(), |&k| {
        let v = psi.eval(&rule.nodes()[k]);
        rule.weights()[k]
            * v.iter()
                .enumerate()
                .map(|(i, z)| z.norm_sqr() * spin.m(i))
                .sum::<f64>()
    });
    pairwise_sum(&terms)
}

/// Fraction of `Σ_k w_k |Ψ(p_k)|²` carried by the outermost layer of the rule.
pub fn boundary_mass_fraction(psi: &dyn MomentumAmplitude, rule: &QuadratureRule) -> f64 {
    let rows = par_map(&(0..rule.len()).collect::<Vec<_>>(), |&k| {
        let m = rule.weights()[k].abs() * psi.eval(&rule.nodes()[k]).norm_squared();
        if rule.boundary()[k] {
            [m, m]
        } else {
            [m, 0.0]
        }
    });
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let s = pairwise_sum_columns(&flat, 2);
    if s[0] > 0.0 {
        s[1] / s[0]
    } else {
        0.0
    }
}

/// Outcome of comparing norms and mean energies between two rule sizes.
#[derive(Clone, Debug)]
pub struct GateReport {
    pub coarse_norm: f64,
    pub fine_norm: f64,
    pub coarse_energy: f64,
    pub fine_energy: f64,
    pub boundary_mass: f64,
    pub passed: bool,
}

impl GateReport {
    pub fn defect(&self) -> f64 {
        (self.fine_norm - self.coarse_norm).abs()
    }
}

/// Quadrature self-consistency: the norm on the coarse and fine rules must agree within
/// `tol`, and the fine rule must see negligible boundary mass. Mean energies are
/// recorded alongside for diagnostics.
pub fn convergence_gate(
    psi: &dyn MomentumAmplitude,
    coarse: &QuadratureRule,
    fine: &QuadratureRule,
    tol: f64,
) -> Result<GateReport> {
    let report = GateReport {
        coarse_norm: norm_squared(psi, coarse),
        fine_norm: norm_squared(psi, fine),
        coarse_energy: expectation_four_momentum(psi, coarse).t(),
        fine_energy: expectation_four_momentum(psi, fine).t(),
        boundary_mass: boundary_mass_fraction(psi, fine),
        passed: false,
    };
    let passed = report.defect() <= tol && report.boundary_mass <= tolerance::BOUNDARY_MASS;
    if !passed {
        return Err(Error::QuadratureGate(format!(
            "norm defect {:.3e} (tolerance {tol:.0e}), <ω> {:.12}/{:.12}, boundary mass {:.3e} ({}, {} nodes/axis)",
            report.defect(),
            report.coarse_energy,
            report.fine_energy,
            report.boundary_mass,
            coarse.label(),
            fine.nodes_per_axis()
        )));
    }
    Ok(GateReport { passed, ..report })
}

// ---------------------------------------------------------------------------
// Newton-Wigner position amplitudes
// ---------------------------------------------------------------------------

/// `ψ_m(t, x⃗) = (2π)^{−3/2} ∫d³p Ψ_m(p) e^{−i(ωt − p⃗·x⃗)}`, evaluated on a rule.
#[derive(Clone, Debug)]
pub struct PositionAmplitude {
    spin: Spin,
    momenta: Vec<Vector3<f64>>,
    energies: Vec<f64>,
    weighted: Samples,
}

pub fn position_amplitude(psi: &dyn MomentumAmplitude, rule: &QuadratureRule) -> PositionAmplitude {
    let mut weighted = sample(psi, rule);
    let d = psi.spin().dim();
    let norm = (2.0 * PI).powf(-1.5);
    for (k, w) in rule.weights().iter().enumerate() {
        for z in &mut weighted.values[k * d..(k + 1) * d] {
            *z *= w * norm;
        }
    }
    PositionAmplitude {
        spin: psi.spin(),
        momenta: rule.nodes().to_vec(),
        energies: rule.nodes().iter().map(energy).collect(),
        weighted,
    }
}

impl PositionAmplitude {
    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn eval(&self, t: f64, x: &Vector3<f64>) -> DVector<C64> {
        let d = self.spin.dim();
        let mut rows = Vec::with_capacity(self.momenta.len() * d);
        for (k, p) in self.momenta.iter().enumerate() {
            let phase = C64::from_polar(1.0, p.dot(x) - self.energies[k] * t);
            rows.extend(self.weighted.at(k).iter().map(|z| z * phase));
        }
        DVector::from_vec(pairwise_sum_columns(&rows, d))
    }

    /// Σ_m |ψ_m(t, x⃗)|².
    pub fn density(&self, t: f64, x: &Vector3<f64>) -> f64 {
        self.eval(t, x).norm_squared()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn packet_validation() {
        let one = [C64::new(1.0, 0.0)];
        assert!(GaussianPacket::new(
            Spin::HALF,
            Vector3::zeros(),
            Vector3::repeat(0.5),
            &one,
            Vector3::zeros()
        )
        .is_err());
        assert!(GaussianPacket::new(
            Spin::ZERO,
            Vector3::zeros(),
            Vector3::new(0.5, 0.0, 0.5),
            &one,
            Vector3::zeros()
        )
        .is_err());
        let zero = [C64::new(0.0, 0.0); 2];
        assert!(GaussianPacket::new(
            Spin::HALF,
            Vector3::zeros(),
            Vector3::repeat(0.5),
            &zero,
            Vector3::zeros()
        )
        .is_err());
    }

    #[test]
    fn standard_packet_is_normalised() {
        let psi = GaussianPacket::standard(Spin::HALF);
        let rule = psi.quadrature(24).unwrap();
        assert!((norm_squared(&psi, &rule) - 1.0).abs() < 1e-9);
        assert!((expectation_sz(&psi, &rule) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let psi = GaussianPacket::new(
            Spin::HALF,
            Vector3::new(0.2, -0.1, 0.4),
            Vector3::new(0.5, 0.7, 0.4),
            &[C64::new(0.6, 0.1), C64::new(0.2, -0.7)],
            Vector3::new(0.3, 1.0, -0.5),
        )
        .unwrap();
        let p = Vector3::new(0.1, 0.3, 0.2);
        let a = psi.gradient(&p).unwrap();
        let f = finite_difference_gradient(&psi, &p);
        for k in 0..3 {
            assert!(max_diff(&a[k], &f[k]) < 1e-9);
        }
    }

    #[test]
    fn transformed_gradients_match_finite_differences() {
        let psi: Amplitude = GaussianPacket::new(
            Spin::ONE,
            Vector3::new(0.2, -0.1, 0.4),
            Vector3::new(0.5, 0.7, 0.4),
            &[C64::new(0.6, 0.1), C64::new(0.2, -0.7), C64::new(0.1, 0.1)],
            Vector3::new(0.3, 1.0, -0.5),
        )
        .unwrap()
        .into_amplitude();
        let r = SpinorMap::rotation(&Vector3::new(1.0, -1.0, 2.0), 0.9);
        let candidates = [
            translate(&psi, &FourVector::new(0.7, 0.1, -0.3, 0.2)),
            rotate(&psi, &r).unwrap(),
            parity(&psi),
            time_reversal(&psi),
        ];
        let p = Vector3::new(-0.2, 0.35, 0.1);
        for c in &candidates {
            let a = c.gradient(&p).unwrap();
            let f = finite_difference_gradient(c.as_ref(), &p);
            for k in 0..3 {
                assert!(max_diff(&a[k], &f[k]) < 1e-8, "{}", c.describe());
            }
        }
    }

    #[test]
    fn translation_is_a_phase() {
        let psi = GaussianPacket::standard(Spin::HALF).into_amplitude();
        let p = Vector3::new(0.3, -0.2, 0.5);
        let same = translate(&psi, &FourVector::zero());
        assert_eq!(same.eval(&p), psi.eval(&p));
        let there = translate(&psi, &FourVector::new(2.5, 0.0, 0.0, 0.0));
        let back = translate(&there, &FourVector::new(-2.5, 0.0, 0.0, 0.0));
        assert!(max_diff(&back.eval(&p), &psi.eval(&p)) < 1e-15);
        assert!((there.eval(&p).norm() - psi.eval(&p).norm()).abs() < 1e-15);
    }

    #[test]
    fn rotation_moves_the_packet() {
        let w = [C64::new(0.8, 0.0), C64::new(0.0, 0.6)];
        let psi = GaussianPacket::new(
            Spin::HALF,
            Vector3::x(),
            Vector3::repeat(0.5),
            &w,
            Vector3::zeros(),
        )
        .unwrap()
        .into_amplitude();
        let r = SpinorMap::rotation(&Vector3::z(), PI / 2.0);
        let rotated = rotate(&psi, &r).unwrap();
        let d = crate::spin::wigner_d(Spin::HALF, &r).unwrap();
        let mixed = &d * DVector::from_column_slice(&w);
        let expected = GaussianPacket::new(
            Spin::HALF,
            Vector3::y(),
            Vector3::repeat(0.5),
            mixed.as_slice(),
            Vector3::zeros(),
        )
        .unwrap();
        for p in [Vector3::new(0.1, 0.9, 0.0), Vector3::new(-0.3, 1.2, 0.4)] {
            assert!(max_diff(&rotated.eval(&p), &expected.eval(&p)) < 1e-14);
        }
    }

    #[test]
    fn full_turn_sign() {
        let turn = SpinorMap::rotation(&Vector3::new(0.3, 0.1, 1.0), 2.0 * PI);
        let p = Vector3::new(0.2, 0.1, -0.3);
        for twice in 0..4 {
            let psi = GaussianPacket::standard(Spin::from_twice(twice)).into_amplitude();
            let sign = if twice % 2 == 0 { 1.0 } else { -1.0 };
            let out = rotate(&psi, &turn).unwrap().eval(&p);
            assert!(max_diff(&out, &(psi.eval(&p) * C64::from(sign))) < 1e-12);
        }
    }

    #[test]
    fn zero_boost_is_identity() {
        let psi = GaussianPacket::standard(Spin::HALF).into_amplitude();
        let b = boost_by_velocity(&psi, &Vector3::zeros()).unwrap();
        let p = Vector3::new(0.4, -0.1, 0.2);
        assert!(max_diff(&b.eval(&p), &psi.eval(&p)) < 1e-15);
        let r = LorentzTransform::rotation(&Vector3::x(), 0.3);
        assert!(boost(&psi, &r).is_err());
    }

    #[test]
    fn spinless_boost_is_prefactor_and_substitution() {
        let psi = GaussianPacket::standard(Spin::ZERO).into_amplitude();
        let beta = Vector3::new(0.2, 0.1, -0.4);
        let b = boost_by_velocity(&psi, &beta).unwrap();
        let lambda_inv = LorentzTransform::boost_from_velocity(&beta)
            .unwrap()
            .inverse();
        let gamma0 = 1.0 / (1.0 - beta.norm_squared()).sqrt();
        for p in [Vector3::new(0.3, 0.2, 0.1), Vector3::new(-1.0, 0.5, 0.7)] {
            let q = lambda_inv.apply(&FourVector::on_shell(p)).spatial();
            let pre = (gamma0 * (1.0 - beta.dot(&(p / energy(&p))))).sqrt();
            let expected = psi.eval(&q) * C64::from(pre);
            assert!(max_diff(&b.eval(&p), &expected) < 1e-14);
        }
    }

    #[test]
    fn inversions() {
        let psi = GaussianPacket::new(
            Spin::HALF,
            Vector3::new(0.3, 0.0, -0.2),
            Vector3::repeat(0.5),
            &[C64::new(0.3, 0.2), C64::new(0.5, -0.4)],
            Vector3::zeros(),
        )
        .unwrap()
        .into_amplitude();
        let p = Vector3::new(0.2, 0.4, -0.1);
        let pp = parity(&parity(&psi));
        assert!(max_diff(&pp.eval(&p), &psi.eval(&p)) < 1e-15);
        let tt = time_reversal(&time_reversal(&psi));
        assert!(max_diff(&tt.eval(&p), &(psi.eval(&p) * C64::from(-1.0))) < 1e-15);

        let rule = GaussianPacket::standard(Spin::HALF).quadrature(24).unwrap();
        let before = expectation_four_momentum(psi.as_ref(), &rule);
        let after = expectation_four_momentum(parity(&psi).as_ref(), &rule);
        assert!((before.spatial() + after.spatial()).norm() < 1e-10);
        assert!(
            (expectation_sz(psi.as_ref(), &rule) - expectation_sz(parity(&psi).as_ref(), &rule))
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn spin_mismatch_is_reported() {
        let a = GaussianPacket::standard(Spin::HALF);
        let b = GaussianPacket::standard(Spin::ZERO);
        let rule = a.quadrature(8).unwrap();
        assert!(matches!(
            inner_product(&a, &b, &rule),
            Err(Error::SpinMismatch { .. })
        ));
    }

    #[test]
    fn gate_fails_on_coarse_rules() {
        let psi = GaussianPacket::standard(Spin::HALF);
        let coarse = psi.quadrature(4).unwrap();
        let fine = psi.quadrature(8).unwrap();
        assert!(matches!(
            convergence_gate(&psi, &coarse, &fine, tolerance::QUADRATURE_GATE),
            Err(Error::QuadratureGate(_))
        ));
        let coarse = psi.quadrature(24).unwrap();
        let fine = psi.quadrature(48).unwrap();
        assert!(
            convergence_gate(&psi, &coarse, &fine, tolerance::QUADRATURE_GATE)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn real_symmetric_packet_has_real_position_amplitude_at_origin_time() {
        let psi = GaussianPacket::standard(Spin::ZERO);
        let rule = psi.quadrature(16).unwrap();
        let pos = position_amplitude(&psi, &rule);
        for x in [Vector3::new(0.3, -0.5, 1.1), Vector3::new(2.0, 0.0, 0.0)] {
            assert!(pos.eval(0.0, &x)[0].im.abs() < 1e-10);
        }
        // A Gaussian in p with σ = ½ is e^{−|x|²/4} in x: ψ(0) = (2π)^{−3/2}(2π·¼)^{−3/4}π^{3/2}.
        let expected = (2.0 * PI).powf(-1.5) * (PI / 2.0).powf(-0.75) * PI.powf(1.5);
        assert!((pos.eval(0.0, &Vector3::zeros())[0].re - expected).abs() < 1e-12);
    }
}

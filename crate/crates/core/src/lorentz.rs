//! Four-vectors, proper orthochronous Lorentz transformations and their SL(2,C) lift.
//!
//! A four-vector `p` is mapped to the Hermitian matrix `X = p⁰·1 + p⃗·σ⃗`. An element
//! `A ∈ SL(2,C)` acts as `X ↦ A X A†`, which defines [`SpinorMap::covering_to_lorentz`].
//! With this convention
//!
//!   * `exp(−iθ n̂·σ⃗/2)` is the active rotation by `+θ` about `n̂`,
//!   * `exp(+ζ n̂·σ⃗/2)` is the pure boost with velocity `tanh(ζ) n̂`.
//!
//! Wigner rotations are computed inside SL(2,C) so that the SU(2) element, not only
//! its SO(3) image, is available for half-integer spin.

use std::ops::Mul;

use nalgebra::{Matrix2, Matrix3, Matrix4, Rotation3, UnitQuaternion, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::tolerance;
use crate::C64;

/// Minkowski metric diag(+1, −1, −1, −1).
pub fn metric() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, -1.0, -1.0))
}

/// On-shell energy `√(|p⃗|² + m²)` for unit mass.
#[inline]
pub fn energy(p: &Vector3<f64>) -> f64 {
    (1.0 + p.norm_squared()).sqrt()
}

/// Contravariant four-vector `(t, x, y, z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourVector(pub Vector4<f64>);

impl FourVector {
    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Self(Vector4::new(t, x, y, z))
    }

    /// Positive-energy on-shell momentum; the energy is always derived, never stored.
    pub fn on_shell(p: Vector3<f64>) -> Self {
        Self::new(energy(&p), p.x, p.y, p.z)
    }

    /// Rest momentum `(m, 0, 0, 0)`.
    pub fn rest() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0)
    }

    pub fn zero() -> Self {
        Self(Vector4::zeros())
    }

    pub fn t(&self) -> f64 {
        self.0[0]
    }

    pub fn spatial(&self) -> Vector3<f64> {
        Vector3::new(self.0[1], self.0[2], self.0[3])
    }

    /// Covariant components `p_μ = g_μν p^ν`.
    pub fn lower(&self) -> Vector4<f64> {
        Vector4::new(self.0[0], -self.0[1], -self.0[2], -self.0[3])
    }

    /// Minkowski product `p·q = p⁰q⁰ − p⃗·q⃗`.
    pub fn dot(&self, other: &FourVector) -> f64 {
        self.0[0] * other.0[0] - self.spatial().dot(&other.spatial())
    }

    pub fn square(&self) -> f64 {
        self.dot(self)
    }

    /// Deviation from the unit mass shell, `|p⁰ − √(|p⃗|²+1)|`.
    pub fn shell_defect(&self) -> f64 {
        (self.0[0] - energy(&self.spatial())).abs()
    }

    pub fn component(&self, mu: usize) -> f64 {
        self.0[mu]
    }
}

/// Rapidity vector ζ⃗; the boost velocity is `tanh(|ζ⃗|) ζ̂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rapidity(pub Vector3<f64>);

impl Rapidity {
    pub fn along(axis: usize, zeta: f64) -> Self {
        let mut v = Vector3::zeros();
        v[axis] = zeta;
        Self(v)
    }

    pub fn velocity(&self) -> Vector3<f64> {
        let z = self.0.norm();
        if z == 0.0 {
            Vector3::zeros()
        } else {
            self.0 * (z.tanh() / z)
        }
    }

    pub fn from_velocity(beta: &Vector3<f64>) -> Result<Self> {
        let b = beta.norm();
        if b >= 1.0 || !b.is_finite() {
            return Err(Error::Domain(format!("|β| = {b} is not below 1")));
        }
        if b == 0.0 {
            return Ok(Self(Vector3::zeros()));
        }
        Ok(Self(beta * (b.atanh() / b)))
    }
}

/// 4×4 real matrix `Λ^μ_ν` acting on contravariant components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzTransform(pub Matrix4<f64>);

impl LorentzTransform {
    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    /// Pure boost with velocity β⃗.
    pub fn boost_from_velocity(beta: &Vector3<f64>) -> Result<Self> {
        let b2 = beta.norm_squared();
        if !(b2 < 1.0) {
            return Err(Error::Domain(format!(
                "boost velocity |β| = {} is not below 1",
                b2.sqrt()
            )));
        }
        let gamma = 1.0 / (1.0 - b2).sqrt();
        // (γ − 1)/β² written without the 0/0 at rest.
        let k = gamma * gamma / (gamma + 1.0);
        let mut m = Matrix4::identity();
        m[(0, 0)] = gamma;
        for i in 0..3 {
            m[(0, i + 1)] = gamma * beta[i];
            m[(i + 1, 0)] = gamma * beta[i];
            for j in 0..3 {
                m[(i + 1, j + 1)] += k * beta[i] * beta[j];
            }
        }
        Ok(Self(m))
    }

    pub fn from_rapidity(zeta: &Rapidity) -> Self {
        Self::boost_from_velocity(&zeta.velocity()).expect("tanh keeps |β| below 1")
    }

    /// Standard boost Λ[p] taking the rest momentum to `p`.
    pub fn standard_boost(p: &FourVector) -> Self {
        let q = p.spatial();
        Self::boost_from_velocity(&(q / energy(&q))).expect("on-shell velocity is subluminal")
    }

    /// Active rotation by `angle` about `axis`.
    pub fn rotation(axis: &Vector3<f64>, angle: f64) -> Self {
        let r = Rotation3::new(axis.normalize() * angle);
        Self::from_spatial_rotation(r.matrix())
    }

    pub fn from_spatial_rotation(r: &Matrix3<f64>) -> Self {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(1, 1).copy_from(r);
        Self(m)
    }

    pub fn apply(&self, p: &FourVector) -> FourVector {
        FourVector(self.0 * p.0)
    }

    /// `Λ⁻¹ = g Λᵀ g`.
    pub fn inverse(&self) -> Self {
        let g = metric();
        Self(g * self.0.transpose() * g)
    }

    /// max |ΛᵀgΛ − g| over entries.
    pub fn metric_defect(&self) -> f64 {
        let g = metric();
        (self.0.transpose() * g * self.0 - g).abs().max()
    }

    pub fn is_proper_orthochronous(&self) -> bool {
        self.0[(0, 0)] >= 1.0 - tolerance::LINEAR_ALGEBRA && self.0.determinant() > 0.0
    }

    /// A proper orthochronous transformation is a pure boost iff its matrix is symmetric.
    pub fn is_pure_boost(&self, tol: f64) -> bool {
        (self.0 - self.0.transpose()).abs().max() <= tol
    }

    /// Velocity of the frame reached from rest: `Λe₀ = γ(1, β⃗)`.
    pub fn velocity(&self) -> Vector3<f64> {
        let g = self.0[(0, 0)];
        Vector3::new(self.0[(1, 0)], self.0[(2, 0)], self.0[(3, 0)]) / g
    }

    /// Polar decomposition `Λ = B·R` into a pure boost and a spatial rotation.
    pub fn polar_decomposition(&self) -> (LorentzTransform, Matrix3<f64>) {
        let b = Self::boost_from_velocity(&self.velocity()).expect("timelike image of rest");
        let r = b.inverse().0 * self.0;
        (b, r.fixed_view::<3, 3>(1, 1).into_owned())
    }

    /// Lift to SL(2,C).
    ///
    /// The lift is determined up to sign. The boost factor is lifted to its positive
    /// Hermitian representative and the rotation factor to the SU(2) element with
    /// non-negative scalar part.
    pub fn lift(&self) -> SpinorMap {
        let (b, r) = self.polar_decomposition();
        let hb = SpinorMap::boost(&b.velocity()).expect("subluminal");
        let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(r));
        let (w, v) = if q.w < 0.0 {
            (-q.w, -q.vector())
        } else {
            (q.w, q.vector().into_owned())
        };
        let s = pauli();
        let mut m = Matrix2::identity() * C64::new(w, 0.0);
        for k in 0..3 {
            m -= s[k] * C64::new(0.0, v[k]);
        }
        hb * SpinorMap(m)
    }
}

impl Mul for LorentzTransform {
    type Output = LorentzTransform;

    fn mul(self, rhs: LorentzTransform) -> LorentzTransform {
        LorentzTransform(self.0 * rhs.0)
    }
}

/// Pauli matrices σ_x, σ_y, σ_z.
pub fn pauli() -> [Matrix2<C64>; 3] {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        Matrix2::new(o, l, l, o),
        Matrix2::new(o, -i, i, o),
        Matrix2::new(l, o, o, -l),
    ]
}

/// `n⃗·σ⃗` for a real 3-vector.
pub fn sigma_dot(n: &Vector3<f64>) -> Matrix2<C64> {
    let s = pauli();
    s[0] * C64::from(n.x) + s[1] * C64::from(n.y) + s[2] * C64::from(n.z)
}

/// Element of SL(2,C).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinorMap(pub Matrix2<C64>);

impl SpinorMap {
    pub fn identity() -> Self {
        Self(Matrix2::identity())
    }

    /// Wraps a matrix after checking `det = 1`.
    pub fn new(m: Matrix2<C64>) -> Result<Self> {
        let d = m.determinant();
        if (d - C64::new(1.0, 0.0)).norm() > tolerance::DETERMINANT {
            return Err(Error::InvalidInput(format!("det = {d} is not 1")));
        }
        Ok(Self(m))
    }

    /// Positive Hermitian lift of the boost with velocity β⃗:
    /// `cosh(ζ/2) + sinh(ζ/2) β̂·σ⃗`.
    pub fn boost(beta: &Vector3<f64>) -> Result<Self> {
        let b2 = beta.norm_squared();
        if !(b2 < 1.0) {
            return Err(Error::Domain(format!(
                "boost velocity |β| = {} is not below 1",
                b2.sqrt()
            )));
        }
        let gamma = 1.0 / (1.0 - b2).sqrt();
        let c = ((gamma + 1.0) / 2.0).sqrt();
        let v = beta * (gamma / (2.0 * (gamma + 1.0)).sqrt());
        Ok(Self(Matrix2::identity() * C64::from(c) + sigma_dot(&v)))
    }

    pub fn from_rapidity(zeta: &Rapidity) -> Self {
        let z = zeta.0.norm();
        if z == 0.0 {
            return Self::identity();
        }
        let n = zeta.0 / z;
        Self(Matrix2::identity() * C64::from((z / 2.0).cosh()) + sigma_dot(&(n * (z / 2.0).sinh())))
    }

    /// Standard boost `A[p] = (m + ω + p⃗·σ⃗)/√(2m(m+ω))`.
    pub fn standard_boost(p: &FourVector) -> Self {
        let q = p.spatial();
        let w = energy(&q);
        let norm = (2.0 * (1.0 + w)).sqrt();
        Self((Matrix2::identity() * C64::from(1.0 + w) + sigma_dot(&q)) / C64::from(norm))
    }

    /// `exp(−iθ n̂·σ⃗/2)`.
    pub fn rotation(axis: &Vector3<f64>, angle: f64) -> Self {
        let n = axis.normalize();
        let (s, c) = (angle / 2.0).sin_cos();
        Self(Matrix2::identity() * C64::from(c) - sigma_dot(&n) * C64::new(0.0, s))
    }

    pub fn determinant(&self) -> C64 {
        self.0.determinant()
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Inverse of a unit-determinant matrix.
    pub fn inverse(&self) -> Self {
        let m = &self.0;
        let d = m.determinant();
        Self(Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / d)
    }

    /// max |A A† − 1|.
    pub fn unitarity_defect(&self) -> f64 {
        (self.0 * self.0.adjoint() - Matrix2::identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// For an SU(2) element `cos(θ/2) − i sin(θ/2) n̂·σ⃗`, returns `(θ, n̂)` with θ ∈ [0, 2π].
    ///
    /// The angle range covers the whole of SU(2), so `−1` maps to θ = 2π.
    pub fn axis_angle(&self) -> (f64, Vector3<f64>) {
        let m = &self.0;
        let w = 0.5 * (m[(0, 0)] + m[(1, 1)]).re;
        // m = w − i v⃗·σ⃗
        let v = Vector3::new(
            -0.5 * (m[(0, 1)] + m[(1, 0)]).im,
            0.5 * (m[(1, 0)] - m[(0, 1)]).re,
            -0.5 * (m[(0, 0)] - m[(1, 1)]).im,
        );
        let s = v.norm();
        let theta = 2.0 * s.atan2(w);
        let axis = if s > 0.0 { v / s } else { Vector3::z() };
        (theta, axis)
    }

    /// Image in SO⁺(1,3): `Λ^μ_ν = ½ tr(σ_μ A σ_ν A†)` with σ₀ = 1.
    pub fn covering_to_lorentz(&self) -> Result<LorentzTransform> {
        let d = self.determinant();
        if (d - C64::new(1.0, 0.0)).norm() > tolerance::DETERMINANT {
            return Err(Error::InvalidInput(format!("det = {d} is not 1")));
        }
        Ok(self.covering_unchecked())
    }

    pub(crate) fn covering_unchecked(&self) -> LorentzTransform {
        let s = pauli();
        let basis = [Matrix2::identity(), s[0], s[1], s[2]];
        let a = &self.0;
        let ad = a.adjoint();
        let mut m = Matrix4::zeros();
        for nu in 0..4 {
            let image = a * basis[nu] * ad;
            for mu in 0..4 {
                m[(mu, nu)] = 0.5 * (basis[mu] * image).trace().re;
            }
        }
        LorentzTransform(m)
    }

    /// Acts on a four-vector through the covering map.
    pub fn apply(&self, p: &FourVector) -> FourVector {
        self.covering_unchecked().apply(p)
    }

    /// max entrywise distance.
    pub fn distance(&self, other: &SpinorMap) -> f64 {
        (self.0 - other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for SpinorMap {
    type Output = SpinorMap;

    fn mul(self, rhs: SpinorMap) -> SpinorMap {
        SpinorMap(self.0 * rhs.0)
    }
}

/// Wigner rotation `W(Λp ← p) = A[Λp]⁻¹ · A · A[p]`, an element of SU(2).
pub fn wigner_rotation(a: &SpinorMap, p: &FourVector) -> SpinorMap {
    let p = FourVector::on_shell(p.spatial());
    let lp = FourVector::on_shell(a.apply(&p).spatial());
    SpinorMap::standard_boost(&lp).inverse() * *a * SpinorMap::standard_boost(&p)
}

/// Wigner rotation for a 4×4 transformation, via [`LorentzTransform::lift`].
pub fn wigner_rotation_for(lambda: &LorentzTransform, p: &FourVector) -> SpinorMap {
    wigner_rotation(&lambda.lift(), p)
}

//! Spin-s representations of SU(2) and the spin-½ Dirac machinery.
//!
//! Spin components are always ordered with `m` descending: index `k` carries
//! `m = s − k`. The same order is used by the angular momentum matrices, the
//! D-matrices, the Dirac rest spinors and every amplitude in [`crate::wavepacket`].

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2, Matrix4, RowVector4, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::lorentz::{energy, pauli, sigma_dot, FourVector, SpinorMap};
use crate::tolerance;
use crate::C64;

/// Spin quantum number, stored as `2s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub const ZERO: Spin = Spin { twice: 0 };
    pub const HALF: Spin = Spin { twice: 1 };
    pub const ONE: Spin = Spin { twice: 2 };
    pub const THREE_HALVES: Spin = Spin { twice: 3 };

    pub const fn from_twice(twice: u32) -> Self {
        Self { twice }
    }

    /// `s` must be a non-negative multiple of ½.
    pub fn new(s: f64) -> Result<Self> {
        let t = 2.0 * s;
        if !(t >= 0.0) || (t - t.round()).abs() > 1e-12 || t > 1e6 {
            return Err(Error::Domain(format!(
                "spin {s} is not a non-negative half-integer"
            )));
        }
        Ok(Self {
            twice: t.round() as u32,
        })
    }

    pub fn twice(&self) -> u32 {
        self.twice
    }

    pub fn value(&self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    /// Multiplet dimension `2s + 1`.
    pub fn dim(&self) -> usize {
        self.twice as usize + 1
    }

    /// Magnetic quantum number at basis index `k`.
    pub fn m(&self, k: usize) -> f64 {
        self.value() - k as f64
    }

    /// Index of `−m` given the index of `m`.
    pub fn flipped(&self, k: usize) -> usize {
        self.twice as usize - k
    }

    pub fn is_half_integer(&self) -> bool {
        self.twice % 2 == 1
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice.is_multiple_of(2) {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for Spin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Domain(format!("cannot parse spin '{s}'"));
        match s.split_once('/') {
            Some((num, den)) => {
                let num: u32 = num.trim().parse().map_err(|_| bad())?;
                match den.trim() {
                    "1" => Ok(Spin::from_twice(2 * num)),
                    "2" => Ok(Spin::from_twice(num)),
                    _ => Err(bad()),
                }
            }
            None => Spin::new(s.parse().map_err(|_| bad())?),
        }
    }
}

/// Angular momentum matrices `J_x, J_y, J_z` for one spin.
#[derive(Clone, Debug)]
pub struct SpinRep {
    pub spin: Spin,
    pub j: [DMatrix<C64>; 3],
}

/// Ladder-operator construction of the spin-s matrices.
pub fn spin_matrices(spin: Spin) -> SpinRep {
    let d = spin.dim();
    let s = spin.value();
    let mut jz = DMatrix::zeros(d, d);
    let mut jp = DMatrix::<C64>::zeros(d, d);
    for k in 0..d {
        let m = spin.m(k);
        jz[(k, k)] = C64::from(m);
        // J₊|m⟩ = √(s(s+1) − m(m+1)) |m+1⟩, and m+1 sits at index k−1.
        if k > 0 {
            jp[(k - 1, k)] = C64::from((s * (s + 1.0) - m * (m + 1.0)).sqrt());
        }
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * C64::from(0.5);
    let jy = (&jp - &jm) * C64::new(0.0, -0.5);
    SpinRep {
        spin,
        j: [jx, jy, jz],
    }
}

impl SpinRep {
    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    /// `n⃗·J⃗`.
    pub fn dot(&self, n: &Vector3<f64>) -> DMatrix<C64> {
        &self.j[0] * C64::from(n.x) + &self.j[1] * C64::from(n.y) + &self.j[2] * C64::from(n.z)
    }

    /// `D^{(s)}(R) = exp(−iθ n̂·J⃗)` with (θ, n̂) read from the SU(2) element.
    ///
    /// No unitarity check; see [`wigner_d`] for the checked entry point.
    pub fn rotation_matrix(&self, r: &SpinorMap) -> DMatrix<C64> {
        match self.spin.twice() {
            0 => DMatrix::identity(1, 1),
            1 => DMatrix::from_iterator(2, 2, r.0.iter().copied()),
            _ => {
                let (theta, axis) = r.axis_angle();
                (self.dot(&axis) * C64::new(0.0, -theta)).exp()
            }
        }
    }
}

/// Checked Wigner D-matrix of an SU(2) element.
pub fn wigner_d(spin: Spin, r: &SpinorMap) -> Result<DMatrix<C64>> {
    let defect = r.unitarity_defect();
    let det = r.determinant();
    if defect > tolerance::UNITARITY || (det - C64::new(1.0, 0.0)).norm() > tolerance::UNITARITY {
        return Err(Error::Domain(format!(
            "rotation is not in SU(2): unitarity defect {defect:e}, det {det}"
        )));
    }
    Ok(spin_matrices(spin).rotation_matrix(r))
}

/// Spin part of the boost generator, `(J⃗ × p⃗)/(ω + m)` for each spatial axis.
pub fn boost_spin_term(rep: &SpinRep, p: &Vector3<f64>) -> [DMatrix<C64>; 3] {
    let scale = 1.0 / (energy(p) + 1.0);
    let j = &rep.j;
    let term =
        |a: usize, b: usize| (&j[a] * C64::from(p[b]) - &j[b] * C64::from(p[a])) * C64::from(scale);
    [term(1, 2), term(2, 0), term(0, 1)]
}

// ---------------------------------------------------------------------------
// Dirac algebra (Dirac basis)
// ---------------------------------------------------------------------------

fn blocks(a: Matrix2<C64>, b: Matrix2<C64>, c: Matrix2<C64>, d: Matrix2<C64>) -> Matrix4<C64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&a);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&b);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&c);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&d);
    m
}

/// γ^μ in the Dirac representation.
pub fn gamma(mu: usize) -> Matrix4<C64> {
    let z = Matrix2::zeros();
    let one = Matrix2::identity();
    match mu {
        0 => blocks(one, z, z, -one),
        1..=3 => {
            let s = pauli()[mu - 1];
            blocks(z, s, -s, z)
        }
        _ => panic!("Lorentz index {mu} out of range"),
    }
}

/// `σ^{μν} = (i/2)[γ^μ, γ^ν]`.
pub fn sigma_munu(mu: usize, nu: usize) -> Matrix4<C64> {
    let (a, b) = (gamma(mu), gamma(nu));
    (a * b - b * a) * C64::new(0.0, 0.5)
}

/// Feynman slash `p̸ = γ^μ p_μ`.
pub fn slash(p: &FourVector) -> Matrix4<C64> {
    let low = p.lower();
    (0..4).fold(Matrix4::zeros(), |acc, mu| {
        acc + gamma(mu) * C64::from(low[mu])
    })
}

/// Four-component Dirac spinor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiracSpinor(pub Vector4<C64>);

impl DiracSpinor {
    /// Dirac adjoint `ū = u†γ⁰`.
    pub fn bar(&self) -> RowVector4<C64> {
        self.0.adjoint() * gamma(0)
    }

    /// `ū_self Γ v`.
    pub fn sandwich(&self, op: &Matrix4<C64>, other: &DiracSpinor) -> C64 {
        (self.bar() * op * other.0)[(0, 0)]
    }
}

fn two_spinor(m: usize) -> nalgebra::Vector2<C64> {
    match m {
        0 => nalgebra::Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
        1 => nalgebra::Vector2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
        _ => panic!("spin-½ index {m} out of range"),
    }
}

/// Positive-energy spinor `u(p, m)` with `ūu = 1`; `m` indexes (+½, −½).
pub fn dirac_u(p: &FourVector, m: usize) -> DiracSpinor {
    let q = p.spatial();
    let w = energy(&q);
    let chi = two_spinor(m);
    let n = C64::from(1.0 / (2.0 * (w + 1.0)).sqrt());
    let upper = chi * C64::from(w + 1.0) * n;
    let lower = sigma_dot(&q) * chi * n;
    DiracSpinor(Vector4::new(upper[0], upper[1], lower[0], lower[1]))
}

/// Negative-energy spinor `v(p, m) = C ū(p, m)ᵀ` with `C = iγ²γ⁰`.
pub fn dirac_v(p: &FourVector, m: usize) -> DiracSpinor {
    let u = dirac_u(p, m);
    let conj = u.0.map(|z| z.conj());
    DiracSpinor(gamma(2) * conj * C64::new(0.0, 1.0))
}

/// Dirac-basis image `S(A)` of an SL(2,C) element.
///
/// `A = H·R` with `H` positive Hermitian and `R ∈ SU(2)`; `H = cosh(ζ/2) + sinh(ζ/2) n̂·σ⃗`
/// maps to `cosh(ζ/2) + sinh(ζ/2) n̂·α⃗` and `R` to `diag(R, R)`.
pub fn dirac_rep(a: &SpinorMap) -> Matrix4<C64> {
    let aad = a.0 * a.0.adjoint();
    let h = (aad + Matrix2::identity()) / C64::from((aad.trace().re + 2.0).sqrt());
    let hinv = SpinorMap(h).inverse();
    let r = hinv.0 * a.0;
    let c = 0.5 * h.trace().re;
    let s = pauli();
    let g0 = gamma(0);
    let mut boost = Matrix4::identity() * C64::from(c);
    for k in 0..3 {
        let v = 0.5 * (h * s[k]).trace().re;
        boost += g0 * gamma(k + 1) * C64::from(v);
    }
    let z = Matrix2::zeros();
    boost * blocks(r, z, z, r)
}

/// Gordon decomposition residual
/// `ū_a γ^μ u_b − ū_a[(p_a+p_b)^μ/2m + iσ^{μν}(p_a−p_b)_ν/2m]u_b`.
pub fn gordon_residual(pa: &FourVector, ma: usize, pb: &FourVector, mb: usize, mu: usize) -> C64 {
    let (ua, ub) = (dirac_u(pa, ma), dirac_u(pb, mb));
    let pa = FourVector::on_shell(pa.spatial());
    let pb = FourVector::on_shell(pb.spatial());
    let lhs = ua.sandwich(&gamma(mu), &ub);
    let convection = ua.sandwich(&Matrix4::identity(), &ub) * (0.5 * (pa.0[mu] + pb.0[mu]));
    let diff = FourVector(pa.0 - pb.0).lower();
    let spin = (0..4).fold(C64::new(0.0, 0.0), |acc, nu| {
        acc + ua.sandwich(&sigma_munu(mu, nu), &ub) * diff[nu]
    }) * C64::new(0.0, 0.5);
    lhs - convection - spin
}

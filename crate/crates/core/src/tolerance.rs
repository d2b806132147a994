//! Validation tolerances.
//!
//! Every threshold that decides a pass or fail lives here so the library,
//! the check suite and the acceptance tests agree on them.

/// Pure linear-algebra identities (single products of small matrices).
pub const LINEAR_ALGEBRA: f64 = 1e-12;

/// Composed group-law checks, where rounding accumulates over several 4×4 products.
pub const GROUP_LAW: f64 = 1e-10;

/// Determinant slack accepted when a 2×2 complex matrix is declared to be in SL(2,C).
pub const DETERMINANT: f64 = 1e-9;

/// Unitarity slack accepted for an SU(2) argument of a Wigner D-matrix.
pub const UNITARITY: f64 = 1e-9;

/// Spinor bilinear identities evaluated at |p| ≤ 2 (Gordon, conservation, completeness).
pub const SPINOR_IDENTITY: f64 = 1e-10;

/// Inner products preserved by the Poincaré transformations, under quadrature.
pub const TRANSFORM_UNITARITY: f64 = 1e-6;

/// Hermiticity defect of the boost generator (quadrature plus differentiation).
pub const GENERATOR_HERMITICITY: f64 = 1e-7;

/// Pointwise relative error of the generator against the finite-boost derivative.
pub const GENERATOR_FINITE_BOOST: f64 = 1e-6;

/// Relative agreement between the commutator engine and a closed-form deficit kernel.
pub const ANALYTIC_AGREEMENT: f64 = 1e-6;

/// Relative tolerance of the Dirac-current commutator relations.
pub const DIRAC_CONTROL: f64 = 1e-5;

/// Charge normalisation of the Dirac current.
pub const CHARGE_NORMALIZATION: f64 = 1e-6;

/// Norms on rule n and rule 2n must agree to this before any audit is trusted.
pub const QUADRATURE_GATE: f64 = 1e-8;

/// Fraction of |Ψ|² mass allowed on the outermost layer of a quadrature rule.
pub const BOUNDARY_MASS: f64 = 1e-10;

/// A claimed inequality must exceed the quadrature error bar by this factor.
pub const SEPARATION_FACTOR: f64 = 100.0;

/// Parseval identity for position amplitudes.
pub const PARSEVAL: f64 = 1e-6;

/// Relative violation that counts as "clearly not covariant" in the bracket witness.
pub const COVARIANCE_WITNESS: f64 = 1e-2;

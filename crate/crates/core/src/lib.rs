//! Relativistic kinematics of a single free massive particle of arbitrary spin.
//!
//! The crate builds, bottom-up:
//!
//!   * [`lorentz`]: four-vectors, Lorentz transformations and their SL(2,C) lift,
//!     including Wigner rotations computed entirely in the spinor representation.
//!   * [`spin`]: spin-s angular momentum matrices, Wigner D-matrices, Dirac spinors
//!     and the gamma-matrix algebra.
//!   * [`quadrature`]: tensor Gauss-Hermite rules and a reduced radial-radial-angle
//!     rule for rotationally invariant two-point integrals.
//!   * [`wavepacket`]: momentum-spin amplitudes, their Poincaré and inversion
//!     transforms, expectations and Newton-Wigner position amplitudes.
//!   * [`operators`]: the boost generator, kernel-valued current operators and
//!     commutator expectations.
//!   * [`audit`]: covariance experiments built on the above (the no-go deficit of the
//!     Newton-Wigner current and the Dirac-current positive control).
//!
//! Units are natural (ħ = c = 1) with the particle mass set to one. The metric
//! signature is (+,−,−,−).

// Index loops mirror tensor notation; `!(x < y)` deliberately rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]
#![forbid(unsafe_code)]

pub mod audit;
pub mod error;
pub mod lorentz;
pub mod numerics;
pub mod operators;
pub mod quadrature;
pub mod spin;
pub mod tolerance;
pub mod wavepacket;

pub use error::{Error, Result};
pub use lorentz::{FourVector, LorentzTransform, Rapidity, SpinorMap};
pub use spin::{Spin, SpinRep};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Particle mass; all momenta are measured in units of it.
pub const MASS: f64 = 1.0;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! Open quantum systems described by (S, L, H) triples.
//!
//! The crate is organized bottom-up:
//!
//! * [`space`], [`operator`], [`standard`], [`state`] and [`order`] provide
//!   labeled tensor-product spaces, dense operators, the usual qubit and
//!   oscillator operator sets, states, and the operator ordering `A ≤ B`.
//! * [`network`] holds the triple type and its composition rules
//!   (concatenation, series product, inverse, feedback reduction).
//! * [`generator`] evaluates Lindblad generators in the Heisenberg and
//!   Schrödinger pictures.
//! * [`dissipation`] checks supply-rate inequalities, positive-real and
//!   bounded-real conditions, and stability certificates.
//! * [`dynamics`] integrates the master equation and extracts decay rates and
//!   linear drift matrices.
//! * [`random`] draws seeded operators, triples and states for property
//!   checks.

pub mod dissipation;
pub mod dynamics;
pub mod error;
pub mod generator;
pub mod network;
pub mod operator;
pub mod order;
pub mod random;
pub mod space;
pub mod standard;
pub mod state;

pub use error::{Error, Result};
pub use network::{ChannelPartition, DirectCoupling, SlhTriple};
pub use operator::{CMatrix, Operator};
pub use order::{order_leq, OrderCheck};
pub use space::{Factor, FactorKind, HilbertSpace};
pub use state::{DensityMatrix, StateVector};

pub use num_complex::Complex64;

/// Hermiticity tolerance, relative to `max(1, max |A_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Default tolerance for `A ≤ B`.
pub const ORDER_TOL: f64 = 1e-9;
/// Default tolerance for certificate margins.
pub const CERTIFICATE_TOL: f64 = 1e-8;
/// Tolerance on `S†S = SS† = I`.
pub const UNITARITY_TOL: f64 = 1e-9;
/// Minimum singular value of `I − S₂₂` for a well-posed feedback loop.
pub const WELL_POSED_TOL: f64 = 1e-8;

//! Heat flow between a continuous quantum measurement apparatus and
//! dissipative few-level quantum systems.
//!
//! Units throughout: `hbar = k_B = 1` and the qubit splitting `Δ` sets the
//! energy scale, so energies are in units of `Δ`, times in `1/Δ`, heat
//! currents in `Δ²`.
//!
//! Two computational paths are provided and cross-check each other:
//!
//! * [`bloch`]: the qubit Bloch equations with closed-form steady state and
//!   exactly solvable transients, plus a fixed-step RK4 integrator;
//! * [`lindblad`]: a generic dense N-level Lindblad engine (vectorized
//!   Liouvillian, null-space steady state, matrix-exponential propagation).
//!
//! [`heat`] evaluates heat currents and excess heat on top of both, and
//! [`lambda_model`] builds the three-level Λ system where the steady-state
//! measurement current can turn negative.

pub mod bloch;
pub mod error;
pub mod heat;
pub mod lambda_model;
pub mod lindblad;
pub mod rates;

pub use error::{Error, Result};
pub use num_complex::Complex64;

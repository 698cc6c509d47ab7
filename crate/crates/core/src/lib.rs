//! Quantum scattering of a nonrelativistic spin-1/2 particle on a rotating
//! conical (cosmic-string) background.
//!
//! The crate computes, in natural units (ħ = c = 1):
//!
//! * per-channel phase shifts, split into a rotational part (from the
//!   noninertial frame) and a topological part (from the conical deficit),
//! * the partial-wave field, the closed-form incident wave and the scattered
//!   wave, the latter both as a closed-form amplitude and as a numerical
//!   quadrature of its integral representation,
//! * differential cross sections over angular sweeps,
//! * an independent verification suite that checks every closed form against
//!   series, quadrature and asymptotic-fit oracles.
//!
//! Modules mirror the pipeline: [`specfun`] evaluates Bessel functions and the
//! integral representation they satisfy, [`model`] holds physical parameters
//! and phase shifts, [`waves`] builds fields and amplitudes, [`verify`] runs
//! the oracle suite, and [`cli`] is the command-line surface.

// `!(x > 0.0)` is used on purpose throughout the input validation: it
// rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod model;
pub mod quad;
pub mod specfun;
mod textfmt;
pub mod verify;
pub mod waves;

pub use num_complex::Complex64;

//! Explicit fractional FTCS integration of the subdiffusion equation
//!
//! `u_t = K · D_t^{1-γ} u_xx` on a one-dimensional zero-Dirichlet lattice,
//! where `D_t^{1-γ}` is the Riemann-Liouville derivative discretized with
//! Grünwald-Letnikov weights.
//!
//! The crate is `no_std` (it needs `alloc`) and is organised bottom-up:
//!
//! - [`gl_coeffs`]: Grünwald-Letnikov weights of order 1 and 2.
//! - [`specfun`]: real Gamma, Mittag-Leffler `E_γ(-x)` and Wright `M_ν(z)`.
//! - [`oracles`]: exact solutions (free propagator, absorbing-boundary
//!   series, single-mode decay).
//! - [`solver`]: the time stepper and its history storage.
//! - [`stability`]: von Neumann bounds, the instability criterion and the
//!   onset scan.
//! - [`analysis`]: error norms, second moment and observed convergence order.
//!
//! IO, configuration and the command-line front end live in the `fracdiff`
//! crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
mod error;
pub mod gl_coeffs;
pub mod oracles;
pub mod solver;
pub mod specfun;
pub mod stability;
mod sum;

pub use error::{Error, Result};
pub use gl_coeffs::{CoefficientTable, Order};
pub use sum::NeumaierSum;

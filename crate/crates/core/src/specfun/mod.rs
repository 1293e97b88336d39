//! Special functions needed by the exact-solution oracles.
//!
//! All routines take and return real `f64` values and keep no state.

mod gamma;
mod mittag_leffler;
mod quad;
mod wright;

pub use gamma::{real_gamma, recip_gamma};
pub use mittag_leffler::{mittag_leffler_neg, MLParams};
pub use quad::{integrate, Quadrature};
pub use wright::{wright_m, WRIGHT_Z_MAX};

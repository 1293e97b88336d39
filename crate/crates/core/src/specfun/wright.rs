//! Wright M-function `M_ν(z) = Σ (-z)^n / (n! Γ(1 - ν - νn))`.
//!
//! Summed directly in double precision. Terms whose Gamma argument is a
//! non-positive integer vanish exactly through [`recip_gamma`]. The series
//! cancels more and more as `z` grows, so arguments above
//! [`WRIGHT_Z_MAX`] are rejected, as is any argument whose rounding error
//! estimate exceeds `CANCELLATION_TOL`.

use core::f64::consts::PI;

use super::recip_gamma;
use crate::{Error, NeumaierSum, Result};

/// Largest accepted argument.
pub const WRIGHT_Z_MAX: f64 = 10.0;

const CANCELLATION_TOL: f64 = 1e-5;
const MAX_TERMS: usize = 5_000;

pub fn wright_m(nu: f64, z: f64) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::Domain {
            what: "Wright order nu",
            value: nu,
        });
    }
    if !(z >= 0.0) {
        return Err(Error::Domain {
            what: "Wright argument",
            value: z,
        });
    }
    if z > WRIGHT_Z_MAX {
        return Err(Error::Range {
            what: "Wright argument",
            value: z,
            limit: WRIGHT_Z_MAX,
        });
    }
    if z == 0.0 {
        return Ok(recip_gamma(1.0 - nu));
    }

    let ln_z = libm::log(z);
    let mut sum = NeumaierSum::new();
    // (-z)^n / n!, updated in place.
    let mut power = 1.0;
    let mut max_term: f64 = 0.0;
    let mut prev_envelope = f64::INFINITY;
    for n in 0..MAX_TERMS {
        if n > 0 {
            power *= -z / n as f64;
        }
        let arg = 1.0 - nu * (n + 1) as f64;
        let term = power * recip_gamma(arg);
        sum.add(term);
        max_term = max_term.max(libm::fabs(term));

        // Bound on |term|: |1/Γ(y)| <= Γ(1 - y)/π for y < 0 and <= 1.2 otherwise.
        let ln_recip_bound = if arg < 0.0 {
            libm::lgamma(1.0 - arg) - libm::log(PI)
        } else {
            libm::log(1.2)
        };
        let envelope = libm::exp(n as f64 * ln_z - libm::lgamma(n as f64 + 1.0) + ln_recip_bound);
        let converged = envelope < prev_envelope
            && envelope <= f64::EPSILON * 1e-2 * libm::fabs(sum.value()).max(f64::MIN_POSITIVE);
        prev_envelope = envelope;
        if converged {
            let rounding = max_term * f64::EPSILON;
            if rounding > CANCELLATION_TOL {
                return Err(Error::Range {
                    what: "Wright argument (cancellation)",
                    value: z,
                    limit: WRIGHT_Z_MAX,
                });
            }
            let value = sum.value();
            if value < 0.0 {
                // Far tail where the true value is below the rounding floor.
                if value >= -64.0 * rounding {
                    return Ok(0.0);
                }
                return Err(Error::Accuracy {
                    requested: CANCELLATION_TOL,
                    achieved: -value,
                });
            }
            return Ok(value);
        }
    }
    Err(Error::Range {
        what: "Wright argument (no convergence)",
        value: z,
        limit: WRIGHT_Z_MAX,
    })
}

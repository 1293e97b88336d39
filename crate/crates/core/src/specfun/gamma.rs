use core::f64::consts::PI;

use crate::{Error, Result};

/// `sin(π x)` with exact zeros at the integers.
pub(crate) fn sinpi(x: f64) -> f64 {
    // x - 2 round(x/2) is exact and lands in [-1, 1].
    let mut r = x - 2.0 * libm::round(0.5 * x);
    let sign = if r < 0.0 { -1.0 } else { 1.0 };
    r = libm::fabs(r);
    if r > 0.5 {
        r = 1.0 - r;
    }
    if r == 0.0 {
        return 0.0;
    }
    sign * libm::sin(PI * r)
}

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == libm::floor(x)
}

/// `Γ(x)` for real `x`, using reflection through `Γ(1 - x)` for `x < 0`.
pub fn real_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || is_pole(x) {
        return Err(Error::Domain {
            what: "gamma argument",
            value: x,
        });
    }
    if x > 0.0 {
        return Ok(libm::tgamma(x));
    }
    Ok(PI / (sinpi(x) * libm::tgamma(1.0 - x)))
}

/// `1 / Γ(x)`, which is entire: it returns exactly `0` at the poles of `Γ`.
pub fn recip_gamma(x: f64) -> f64 {
    if is_pole(x) {
        return 0.0;
    }
    if x >= 0.5 {
        // tgamma overflows to +inf past ~171.6 and 1/inf = 0 is the right limit.
        return 1.0 / libm::tgamma(x);
    }
    let s = sinpi(x);
    let reflected = 1.0 - x;
    if reflected < 170.0 {
        s * libm::tgamma(reflected) / PI
    } else {
        let sign = if s < 0.0 { -1.0 } else { 1.0 };
        sign * libm::exp(libm::log(libm::fabs(s)) + libm::lgamma(reflected) - libm::log(PI))
    }
}

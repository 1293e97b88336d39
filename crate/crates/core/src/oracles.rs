//! Exact solutions of the fractional diffusion equation used as ground truth.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{check_gamma, check_positive};
use crate::solver::{Grid1D, InitialCondition};
use crate::specfun::{wright_m, MLParams};
use crate::{Error, Result};

/// Number of odd modes kept by default in the absorbing-boundary series.
pub const DEFAULT_SERIES_TERMS: usize = 50;

// Oracles are compared against solver output at the 1e-10 level.
const ORACLE_ML_ACCURACY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// `δ(x)` initial data on a wide symmetric domain.
    FreePropagator,
    /// `x(1 - x)` on `[0, 1]` with absorbing ends.
    AbsorbingParabolic,
    /// `sin(nπx)` on `[0, 1]` with absorbing ends.
    AbsorbingMode(u32),
}

/// A continuous problem: equation parameters, domain and initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub gamma: f64,
    /// Generalized diffusion coefficient `K_γ`.
    pub k: f64,
    pub domain: (f64, f64),
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, gamma: f64, k: f64, domain: (f64, f64)) -> Result<Self> {
        check_gamma(gamma)?;
        check_positive("K", k)?;
        let (lo, hi) = domain;
        match kind {
            ProblemKind::FreePropagator => {
                if !(hi > 0.0 && lo == -hi && hi.is_finite()) {
                    return Err(Error::Grid(
                        "free propagator needs a symmetric domain [-L, L]",
                    ));
                }
            }
            ProblemKind::AbsorbingParabolic | ProblemKind::AbsorbingMode(_) => {
                if domain != (0.0, 1.0) {
                    return Err(Error::Grid("absorbing problems are posed on [0, 1]"));
                }
            }
        }
        if let ProblemKind::AbsorbingMode(0) = kind {
            return Err(Error::Domain {
                what: "mode number",
                value: 0.0,
            });
        }
        Ok(Self {
            kind,
            gamma,
            k,
            domain,
        })
    }

    pub fn free_propagator(gamma: f64, k: f64, half_width: f64) -> Result<Self> {
        Self::new(
            ProblemKind::FreePropagator,
            gamma,
            k,
            (-half_width, half_width),
        )
    }

    pub fn absorbing_parabolic(gamma: f64, k: f64) -> Result<Self> {
        Self::new(ProblemKind::AbsorbingParabolic, gamma, k, (0.0, 1.0))
    }

    pub fn absorbing_mode(n: u32, gamma: f64, k: f64) -> Result<Self> {
        Self::new(ProblemKind::AbsorbingMode(n), gamma, k, (0.0, 1.0))
    }

    /// Lattice with spacing `dx`.
    ///
    /// Absorbing problems need `dx` to divide the unit interval. The free
    /// propagator gets the largest symmetric lattice `[-N dx, N dx]` that fits
    /// inside its domain, so `x = 0` is always a node.
    pub fn lattice(&self, dx: f64) -> Result<Grid1D> {
        match self.kind {
            ProblemKind::FreePropagator => {
                let half_cells = libm::floor(self.domain.1 / dx * (1.0 + 1e-12)) as usize;
                Grid1D::symmetric(half_cells, dx)
            }
            _ => Grid1D::with_spacing(self.domain.0, self.domain.1, dx),
        }
    }

    pub fn initial_condition(&self) -> InitialCondition {
        match self.kind {
            ProblemKind::FreePropagator => InitialCondition::Delta { x0: 0.0 },
            ProblemKind::AbsorbingParabolic => InitialCondition::Parabolic,
            ProblemKind::AbsorbingMode(n) => InitialCondition::Mode(n),
        }
    }

    /// The exact solution frozen at time `t`, ready to evaluate at many `x`.
    pub fn exact_at(&self, t: f64) -> Result<ExactSolution> {
        match self.kind {
            ProblemKind::FreePropagator => {
                check_positive("t", t)?;
                Ok(ExactSolution::Propagator {
                    nu: 0.5 * self.gamma,
                    scale: libm::sqrt(self.k * libm::pow(t, self.gamma)),
                })
            }
            ProblemKind::AbsorbingParabolic => Ok(ExactSolution::Series(AbsorbingSeries::new(
                t,
                self.gamma,
                self.k,
                DEFAULT_SERIES_TERMS,
            )?)),
            ProblemKind::AbsorbingMode(n) => Ok(ExactSolution::Mode {
                n,
                amplitude: mode_decay(n, t, self.gamma, self.k)?,
            }),
        }
    }
}

/// An exact solution at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactSolution {
    Propagator { nu: f64, scale: f64 },
    Series(AbsorbingSeries),
    Mode { n: u32, amplitude: f64 },
}

impl ExactSolution {
    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            ExactSolution::Propagator { nu, scale } => propagator_scaled(*nu, x, *scale),
            ExactSolution::Series(series) => Ok(series.eval(x)),
            ExactSolution::Mode { n, amplitude } => Ok(amplitude * libm::sin(*n as f64 * PI * x)),
        }
    }
}

/// Free-space Green's function for `u(x, 0) = δ(x)`:
/// `u = M_{γ/2}(|x| / √(K t^γ)) / (2 √(K t^γ))`.
pub fn propagator(x: f64, t: f64, gamma: f64, k: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_positive("K", k)?;
    check_positive("t", t)?;
    let scale = libm::sqrt(k * libm::pow(t, gamma));
    propagator_scaled(0.5 * gamma, x, scale)
}

// M_{1/2}(z) = exp(-z²/4)/√π, so the Brownian case needs no range limit.
fn propagator_scaled(nu: f64, x: f64, scale: f64) -> Result<f64> {
    let z = libm::fabs(x) / scale;
    let m = if nu == 0.5 {
        libm::exp(-0.25 * z * z) / libm::sqrt(PI)
    } else {
        wright_m(nu, z)?
    };
    Ok(m / (2.0 * scale))
}

/// The odd-mode amplitudes of the `x(1 - x)` solution at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorbingSeries {
    // 8/π³ · E_γ(-K (2n+1)² π² t^γ) / (2n+1)³
    coefficients: Vec<f64>,
}

impl AbsorbingSeries {
    pub fn new(t: f64, gamma: f64, k: f64, n_terms: usize) -> Result<Self> {
        check_gamma(gamma)?;
        check_positive("K", k)?;
        if !(t >= 0.0) {
            return Err(Error::Domain {
                what: "t",
                value: t,
            });
        }
        if n_terms == 0 {
            return Err(Error::Domain {
                what: "n_terms",
                value: 0.0,
            });
        }
        let ml = MLParams::new(gamma)?.with_target_accuracy(ORACLE_ML_ACCURACY)?;
        let t_pow = libm::pow(t, gamma);
        let prefactor = 8.0 / (PI * PI * PI);
        let coefficients = (0..n_terms)
            .map(|n| {
                let odd = (2 * n + 1) as f64;
                let decay = ml.eval_neg(k * odd * odd * PI * PI * t_pow)?;
                Ok(prefactor * decay / (odd * odd * odd))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { coefficients })
    }

    pub fn eval(&self, x: f64) -> f64 {
        // Summed from the smallest term up.
        self.coefficients
            .iter()
            .enumerate()
            .rev()
            .map(|(n, c)| c * libm::sin((2 * n + 1) as f64 * PI * x))
            .sum()
    }
}

/// Absorbing-boundary solution for `u(x, 0) = x(1 - x)` on `[0, 1]`.
pub fn absorbing_series(x: f64, t: f64, gamma: f64, k: f64, n_terms: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            what: "x",
            value: x,
        });
    }
    Ok(AbsorbingSeries::new(t, gamma, k, n_terms)?.eval(x))
}

/// Amplitude `E_γ(-K n²π² t^γ)` of the eigenmode `sin(nπx)` at time `t`.
pub fn mode_decay(n: u32, t: f64, gamma: f64, k: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_positive("K", k)?;
    if n == 0 {
        return Err(Error::Domain {
            what: "mode number",
            value: 0.0,
        });
    }
    if !(t >= 0.0) {
        return Err(Error::Domain {
            what: "t",
            value: t,
        });
    }
    let lambda = n as f64 * PI;
    MLParams::new(gamma)?
        .with_target_accuracy(ORACLE_ML_ACCURACY)?
        .eval_neg(k * lambda * lambda * libm::pow(t, gamma))
}

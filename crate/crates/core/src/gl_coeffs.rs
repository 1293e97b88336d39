//! Grünwald-Letnikov weights `ω_k^{(α)}`.
//!
//! The weights are the power-series coefficients of a generating function:
//! `(1 - z)^α` for the first-order approximation and
//! `(3/2 - 2z + z²/2)^α` for the second-order one. The solver uses them with
//! `α = 1 - γ`.

use alloc::vec::Vec;

use crate::{Error, NeumaierSum, Result};

/// Approximation order `p` of the fractional derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn from_int(p: u32) -> Result<Self> {
        match p {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            _ => Err(Error::Domain {
                what: "coefficient order",
                value: p as f64,
            }),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            Order::First => 1,
            Order::Second => 2,
        }
    }
}

// Second-order generating polynomial 3/2 - 2z + z²/2.
const SECOND_ORDER_POLY: [f64; 3] = [1.5, -2.0, 0.5];

/// Immutable table `ω_0 ..= ω_n` for a fixed `α` and order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    alpha: f64,
    order: Order,
    coeffs: Vec<f64>,
}

impl CoefficientTable {
    /// Builds `ω_0 ..= ω_n`.
    pub fn new(alpha: f64, order: Order, n: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Domain {
                what: "alpha",
                value: alpha,
            });
        }
        let mut table = CoefficientTable {
            alpha,
            order,
            coeffs: Vec::new(),
        };
        table.extend_to(n);
        Ok(table)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn order(&self) -> Order {
        self.order
    }

    /// Number of stored weights (`n + 1`).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn get(&self, k: usize) -> Option<f64> {
        self.coeffs.get(k).copied()
    }

    /// Grows the table so that it holds `ω_0 ..= ω_n`.
    ///
    /// Existing entries are never touched and the recurrences only read
    /// earlier entries, so extending is identical to building the longer
    /// table from scratch.
    pub fn extend_to(&mut self, n: usize) {
        let target = n + 1;
        if self.coeffs.len() >= target {
            return;
        }
        self.coeffs.reserve(target - self.coeffs.len());
        let a = self.alpha;
        while self.coeffs.len() < target {
            let k = self.coeffs.len();
            let next = match self.order {
                Order::First => {
                    if k == 0 {
                        1.0
                    } else {
                        (1.0 - (a + 1.0) / k as f64) * self.coeffs[k - 1]
                    }
                }
                Order::Second => self.second_order_next(k),
            };
            self.coeffs.push(next);
        }
    }

    // Power-of-a-series recurrence for g = f^α:
    //   g_0 = f_0^α,  g_k = 1/(k f_0) Σ_{j=1}^{min(k,2)} ((α+1) j - k) f_j g_{k-j}
    fn second_order_next(&self, k: usize) -> f64 {
        let f = SECOND_ORDER_POLY;
        if k == 0 {
            return libm::pow(f[0], self.alpha);
        }
        let kf = k as f64;
        let mut acc = 0.0;
        for (j, &fj) in f.iter().enumerate().take(k.min(2) + 1).skip(1) {
            let weight = (self.alpha + 1.0) * j as f64 - kf;
            acc += weight * fj * self.coeffs[k - j];
        }
        acc / (kf * f[0])
    }

    /// A copy holding only `ω_0 ..= ω_n`.
    pub fn truncated(&self, n: usize) -> Self {
        CoefficientTable {
            alpha: self.alpha,
            order: self.order,
            coeffs: self.coeffs[..(n + 1).min(self.coeffs.len())].to_vec(),
        }
    }

    /// `Σ_{k=0}^{m} (-1)^k ω_k`, compensated.
    ///
    /// This is the denominator of the finite-`m` von Neumann bound.
    pub fn alternating_partial_sum(&self, m: usize) -> Result<f64> {
        if m >= self.coeffs.len() {
            return Err(Error::Range {
                what: "partial sum index",
                value: m as f64,
                limit: self.coeffs.len().saturating_sub(1) as f64,
            });
        }
        Ok(self
            .alternating_terms()
            .take(m + 1)
            .collect::<NeumaierSum>()
            .value())
    }

    pub(crate) fn alternating_terms(&self) -> impl Iterator<Item = f64> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, &w)| if k % 2 == 0 { w } else { -w })
    }
}

/// First-order weights: `ω_0 = 1`, `ω_k = (1 - (α+1)/k) ω_{k-1}`.
pub fn first_order_coeffs(alpha: f64, n: usize) -> Result<CoefficientTable> {
    CoefficientTable::new(alpha, Order::First, n)
}

/// Second-order weights: coefficients of `(3/2 - 2z + z²/2)^α`.
pub fn second_order_coeffs(alpha: f64, n: usize) -> Result<CoefficientTable> {
    CoefficientTable::new(alpha, Order::Second, n)
}

/// Free-function form of [`CoefficientTable::alternating_partial_sum`].
pub fn alternating_partial_sum(table: &CoefficientTable, m: usize) -> Result<f64> {
    table.alternating_partial_sum(m)
}

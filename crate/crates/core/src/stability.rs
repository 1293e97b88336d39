//! Von Neumann stability bounds, the empirical instability criterion and the
//! onset scan.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{check_gamma, check_positive};
use crate::solver::{step, FieldHistory, Grid1D, InitialCondition, SchemeParams};
use crate::{CoefficientTable, Error, NeumaierSum, Order, Result};

/// Closed-form limit `S_γ^×` of the bound sequence.
///
/// `1/2^{2-γ}` for first-order weights and `1/4^{3/2-γ}` for second-order.
pub fn bound_limit(gamma: f64, order: Order) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(match order {
        Order::First => libm::pow(2.0, gamma - 2.0),
        Order::Second => libm::pow(4.0, gamma - 1.5),
    })
}

/// `S_{γ,m}^×` for `m = 0..=m_max` and the limit they approach.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityBoundSeries {
    pub gamma: f64,
    pub order: Order,
    pub values: Vec<f64>,
    pub limit: f64,
}

impl StabilityBoundSeries {
    pub fn get(&self, m: usize) -> Option<f64> {
        self.values.get(m).copied()
    }
}

/// `S_{γ,m}^× = 1 / (2 Σ_{k=0}^{m} (-1)^k ω_k^{(1-γ)})`.
pub fn bound_series(gamma: f64, order: Order, m_max: usize) -> Result<StabilityBoundSeries> {
    if m_max < 1 {
        return Err(Error::InsufficientData {
            needed: 1,
            got: m_max,
        });
    }
    let limit = bound_limit(gamma, order)?;
    let table = CoefficientTable::new(1.0 - gamma, order, m_max)?;
    // Running sum; each prefix is the same Neumaier accumulation that
    // `alternating_partial_sum` performs, so the values agree exactly.
    let mut acc = NeumaierSum::new();
    let values = table
        .alternating_terms()
        .map(|t| {
            acc.add(t);
            0.5 / acc.value()
        })
        .collect();
    Ok(StabilityBoundSeries {
        gamma,
        order,
        values,
        limit,
    })
}

/// `ΔS_γ = S_{γ,2}^× - S_{γ,1}^×`.
///
/// For first-order weights this is the largest jump between consecutive
/// bounds.
pub fn delta_s(gamma: f64, order: Order) -> Result<f64> {
    let series = bound_series(gamma, order, 2)?;
    Ok(series.values[2] - series.values[1])
}

/// `sin²((2N-1)π/(4N))`, the largest `sin²(qΔx/2)` on a lattice of `2N+1`
/// points with absorbing ends.
pub fn lattice_correction(n_half: usize) -> Result<f64> {
    if n_half == 0 {
        return Err(Error::Grid("N must be at least 1"));
    }
    let n = n_half as f64;
    let s = libm::sin((2.0 * n - 1.0) * PI / (4.0 * n));
    Ok(s * s)
}

/// Thresholds of the ratio test `|u^{(m-1)}/u^{(m)} - Ξ| > Ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstabilityCriterion {
    /// `Ξ`.
    pub xi: f64,
    /// `ΔM`: the test must hold over the last `ΔM + 1` steps.
    pub window: usize,
}

impl Default for InstabilityCriterion {
    fn default() -> Self {
        Self {
            xi: 5.0,
            window: 10,
        }
    }
}

impl InstabilityCriterion {
    fn violated(&self, prev: f64, cur: f64) -> Option<bool> {
        if cur == 0.0 {
            None
        } else {
            Some(libm::fabs(prev / cur - self.xi) > self.xi)
        }
    }

    /// Applies the test to the final `ΔM + 1` steps of `history`.
    ///
    /// A node where `u^{(m)} = 0` is skipped for that step; it qualifies if the
    /// test holds on every step where it is defined and at least `ΔM/2` steps
    /// are defined. Returns the first step of the longest trailing run of
    /// violations over all qualifying nodes, or `None` if no node qualifies.
    pub fn detect(&self, history: &FieldHistory) -> Result<Option<usize>> {
        let steps = history.len().saturating_sub(1);
        if steps < self.window + 1 {
            return Err(Error::InsufficientData {
                needed: self.window + 1,
                got: steps,
            });
        }
        let last = steps;
        let first = last - self.window;
        let min_defined = self.window.div_ceil(2);
        let mut onset: Option<usize> = None;
        for j in 0..history.width() {
            let mut defined = 0;
            let mut all = true;
            for m in first..=last {
                match self.violated(history.snapshot(m - 1)[j], history.snapshot(m)[j]) {
                    Some(true) => defined += 1,
                    Some(false) => {
                        all = false;
                        break;
                    }
                    None => {}
                }
            }
            if !all || defined < min_defined {
                continue;
            }
            let mut start = first;
            while start > 1 {
                let m = start - 1;
                match self.violated(history.snapshot(m - 1)[j], history.snapshot(m)[j]) {
                    Some(false) => break,
                    _ => start = m,
                }
            }
            onset = Some(onset.map_or(start, |o| o.min(start)));
        }
        Ok(onset)
    }
}

/// [`InstabilityCriterion::detect`] with explicit thresholds.
pub fn detect_instability(history: &FieldHistory, xi: f64, window: usize) -> Result<Option<usize>> {
    InstabilityCriterion { xi, window }.detect(history)
}

/// The two model problems used for stability experiments. Both use a lattice
/// of `2N + 1` points including the absorbing ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanProblem {
    /// `x(1 - x)` on `[0, 1]`, so `Δx = 1/(2N)` and `Δt` follows from `S`.
    Absorbing { n_half: usize },
    /// Unit delta at the centre of `[-NΔx, NΔx]`; `Δt` is fixed and `Δx`
    /// follows from `S`.
    Propagator { n_half: usize, dt: f64 },
}

impl ScanProblem {
    pub fn n_half(&self) -> usize {
        match *self {
            ScanProblem::Absorbing { n_half } | ScanProblem::Propagator { n_half, .. } => n_half,
        }
    }

    /// Lattice, initial data and scheme parameters at stability parameter `s`.
    pub fn setup(
        &self,
        gamma: f64,
        k: f64,
        s: f64,
        order: Order,
    ) -> Result<(Grid1D, InitialCondition, SchemeParams)> {
        match *self {
            ScanProblem::Absorbing { n_half } => {
                if n_half == 0 {
                    return Err(Error::Grid("N must be at least 1"));
                }
                let dx = 1.0 / (2 * n_half) as f64;
                let grid = Grid1D::new(0.0, 1.0, 2 * n_half - 1)?;
                let params = SchemeParams::from_s(gamma, k, dx, s)?.with_order(order);
                Ok((grid, InitialCondition::Parabolic, params))
            }
            ScanProblem::Propagator { n_half, dt } => {
                check_positive("S", s)?;
                check_positive("K", k)?;
                check_positive("dt", dt)?;
                check_gamma(gamma)?;
                let dx = libm::sqrt(k * libm::pow(dt, gamma) / s);
                let grid = Grid1D::symmetric(n_half, dx)?;
                let params = SchemeParams::from_dt(gamma, k, dx, dt)?.with_order(order);
                Ok((grid, InitialCondition::Delta { x0: 0.0 }, params))
            }
        }
    }
}

/// Settings of an onset scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub problem: ScanProblem,
    pub k: f64,
    pub order: Order,
    /// Number of time steps `M` per trial.
    pub steps: usize,
    pub scan_step: f64,
    pub start_factor: f64,
    /// The scan gives up past this value of `S`.
    pub s_max: f64,
    pub criterion: InstabilityCriterion,
}

impl ScanConfig {
    pub fn new(problem: ScanProblem, steps: usize) -> Self {
        Self {
            problem,
            k: 1.0,
            order: Order::First,
            steps,
            scan_step: 0.001,
            start_factor: 0.98,
            s_max: 1.0,
            criterion: InstabilityCriterion::default(),
        }
    }

    pub fn with_order(mut self, order: Order) -> Self {
        self.order = order;
        self
    }

    /// `S` tested at scan position `n`.
    pub fn s_at(&self, gamma: f64, n: usize) -> Result<f64> {
        Ok(self.start_factor * bound_limit(gamma, self.order)? + self.scan_step * n as f64)
    }
}

/// Outcome of a stability trial or scan.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub gamma: f64,
    pub order: Order,
    /// The last `S` that was run.
    pub s_tested: f64,
    /// Number of steps `M` requested per trial.
    pub steps: usize,
    pub unstable: bool,
    pub first_unstable_step: Option<usize>,
    /// Smallest unstable `S` found by a scan.
    pub s_min: Option<f64>,
    pub sin2_correction: f64,
    pub s_theory: f64,
}

impl StabilityReport {
    /// `S_min · sin²((2N-1)π/(4N))`.
    pub fn s_min_corrected(&self) -> Option<f64> {
        self.s_min.map(|s| s * self.sin2_correction)
    }
}

/// Runs one problem for `config.steps` steps at `s` and applies the criterion.
///
/// A non-finite field ends the run early and counts as unstable at that step.
pub fn run_trial(gamma: f64, s: f64, config: &ScanConfig) -> Result<StabilityReport> {
    let (grid, ic, params) = config.problem.setup(gamma, config.k, s, config.order)?;
    let coeffs = params.coefficients(config.steps)?;
    let mut history = FieldHistory::new(ic.sample(&grid)?)?;
    history.reserve(config.steps);
    let mut first_unstable_step = None;
    for _ in 0..config.steps {
        let stats = step(&mut history, &params, &coeffs)?;
        if stats.overflow {
            first_unstable_step = Some(stats.index);
            break;
        }
    }
    if first_unstable_step.is_none() {
        first_unstable_step = config.criterion.detect(&history)?;
    }
    Ok(StabilityReport {
        gamma,
        order: config.order,
        s_tested: s,
        steps: config.steps,
        unstable: first_unstable_step.is_some(),
        first_unstable_step,
        s_min: None,
        sin2_correction: lattice_correction(config.problem.n_half())?,
        s_theory: bound_limit(gamma, config.order)?,
    })
}

/// Raises `S` from `start_factor · S^×` in increments of `scan_step` until a
/// trial is unstable.
pub fn onset_scan(gamma: f64, config: &ScanConfig) -> Result<StabilityReport> {
    check_positive("scan_step", config.scan_step)?;
    check_positive("start_factor", config.start_factor)?;
    for n in 0.. {
        let s = config.s_at(gamma, n)?;
        if s > config.s_max {
            break;
        }
        let mut report = run_trial(gamma, s, config)?;
        if report.unstable {
            report.s_min = Some(s);
            return Ok(report);
        }
    }
    Err(Error::ScanFailure {
        gamma,
        s_max: config.s_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn history_from(states: &[Vec<f64>]) -> FieldHistory {
        let mut h = FieldHistory::new(states[0].clone()).unwrap();
        for s in &states[1..] {
            h.push(s);
        }
        h
    }

    #[test]
    fn limits() {
        assert_eq!(bound_limit(1.0, Order::First).unwrap(), 0.5);
        assert_eq!(bound_limit(1.0, Order::Second).unwrap(), 0.5);
        assert!((bound_limit(0.5, Order::First).unwrap() - 0.3535533905932738).abs() < 1e-15);
        assert!((bound_limit(0.5, Order::Second).unwrap() - 0.25).abs() < 1e-15);
        assert!(bound_limit(0.0, Order::First).is_err());
    }

    #[test]
    fn series_values() {
        let s = bound_series(0.5, Order::First, 2).unwrap();
        assert!((s.values[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.values[2] - 0.5 / 1.375).abs() < 1e-15);
        let classical = bound_series(1.0, Order::First, 100).unwrap();
        assert!(classical.values.iter().all(|&v| v == 0.5));
        assert!(bound_series(0.5, Order::First, 0).is_err());
    }

    #[test]
    fn series_matches_partial_sums_exactly() {
        for order in [Order::First, Order::Second] {
            let s = bound_series(0.3, order, 200).unwrap();
            let table = CoefficientTable::new(0.7, order, 200).unwrap();
            for m in 0..=200 {
                assert_eq!(s.values[m], 0.5 / table.alternating_partial_sum(m).unwrap());
            }
        }
    }

    #[test]
    fn series_approaches_the_limit() {
        for i in 1..=9 {
            let gamma = i as f64 / 10.0;
            let s = bound_series(gamma, Order::First, 10_000).unwrap();
            assert!((s.values[1000] - s.limit).abs() < 1e-3);
            assert!((s.values[10_000] - s.limit).abs() < 1e-4, "gamma {gamma}");
        }
    }

    #[test]
    fn second_order_bounds_are_lower() {
        for i in 1..=9 {
            let gamma = i as f64 / 10.0;
            let a = bound_series(gamma, Order::First, 500).unwrap();
            let b = bound_series(gamma, Order::Second, 500).unwrap();
            for m in 1..=500 {
                assert!(b.values[m] < a.values[m], "gamma {gamma}, m {m}");
            }
        }
    }

    #[test]
    fn delta_s_values() {
        assert_eq!(delta_s(1.0, Order::First).unwrap(), 0.0);
        assert!((delta_s(0.5, Order::First).unwrap() - (1.0 / 2.75 - 1.0 / 3.0)).abs() < 1e-15);
        // α → 1 gives weights (1, -1, 0, ...): both partial sums tend to 2.
        assert!(delta_s(1e-9, Order::First).unwrap().abs() < 1e-8);
    }

    #[test]
    fn delta_s_is_the_largest_jump() {
        for gamma in [0.2, 0.5, 0.8] {
            let s = bound_series(gamma, Order::First, 2000).unwrap();
            let d = delta_s(gamma, Order::First).unwrap();
            for m in 1..2000 {
                assert!(s.values[m + 1] - s.values[m] <= d + 1e-15);
            }
        }
    }

    #[test]
    fn correction_factor() {
        assert!((lattice_correction(1).unwrap() - 0.5).abs() < 1e-15);
        let c5 = lattice_correction(5).unwrap();
        assert!((c5 - (0.9 * PI / 2.0).sin().powi(2)).abs() < 1e-15);
        assert!(lattice_correction(0).is_err());
    }

    #[test]
    fn detector_examples() {
        let geometric: Vec<Vec<f64>> = (0..20).map(|m| vec![0.9f64.powi(-m), 1.0]).collect();
        assert_eq!(
            detect_instability(&history_from(&geometric), 5.0, 10).unwrap(),
            None
        );

        let alternating: Vec<Vec<f64>> = (0..20)
            .map(|m| vec![0.0, if m % 2 == 0 { 1.0 } else { -1.0 }])
            .collect();
        assert_eq!(
            detect_instability(&history_from(&alternating), 5.0, 10).unwrap(),
            Some(1)
        );

        // Ratio 11 over the final 11 steps only.
        let mut shrinking: Vec<Vec<f64>> = (0..9).map(|_| vec![1.0]).collect();
        for m in 1..=11 {
            shrinking.push(vec![11f64.powi(-m)]);
        }
        assert_eq!(
            detect_instability(&history_from(&shrinking), 5.0, 10).unwrap(),
            Some(9)
        );
    }

    #[test]
    fn detector_needs_enough_defined_steps() {
        let mostly_zero: Vec<Vec<f64>> = (0..20)
            .map(|m| vec![if m % 4 == 0 { 1.0 } else { 0.0 }])
            .collect();
        // Ratios are defined only every fourth step, and those are 0.
        assert_eq!(
            detect_instability(&history_from(&mostly_zero), 5.0, 10).unwrap(),
            None
        );
        let short: Vec<Vec<f64>> = (0..5).map(|_| vec![1.0]).collect();
        assert!(matches!(
            detect_instability(&history_from(&short), 5.0, 10),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn detector_skips_zero_denominators() {
        // Sign flips ending on an exact zero: the last ratio is undefined.
        let mut states: Vec<Vec<f64>> = (0..23)
            .map(|m| vec![if m % 2 == 0 { 1.0 } else { -1.0 }])
            .collect();
        states.push(vec![0.0]);
        assert_eq!(
            detect_instability(&history_from(&states), 5.0, 10).unwrap(),
            Some(1)
        );
        // A zero numerator gives ratio 0, which sits on the band edge.
        states.push(vec![1.0]);
        assert_eq!(
            detect_instability(&history_from(&states), 5.0, 10).unwrap(),
            None
        );
    }

    #[test]
    fn sharpness() {
        for gamma in [0.25, 0.5, 0.75] {
            let config = ScanConfig::new(ScanProblem::Absorbing { n_half: 5 }, 1000);
            let corr = lattice_correction(5).unwrap();
            let limit = bound_limit(gamma, Order::First).unwrap();
            let stable = run_trial(gamma, 0.95 * limit / corr, &config).unwrap();
            assert!(!stable.unstable, "gamma {gamma} flagged at 0.95");
            let unstable = run_trial(gamma, 1.05 * limit / corr, &config).unwrap();
            assert!(unstable.unstable, "gamma {gamma} not flagged at 1.05");
            assert!(unstable.first_unstable_step.unwrap() <= 1000);
        }
    }

    #[test]
    fn classical_scan_characterization() {
        // At γ = 1 the smooth modes decay geometrically and the barely stable
        // alternating mode takes over the ratio test below the bound.
        let config = ScanConfig::new(ScanProblem::Absorbing { n_half: 5 }, 1000);
        let report = onset_scan(1.0, &config).unwrap();
        assert!((report.s_min.unwrap() - 0.502).abs() < 1e-12);
    }

    #[test]
    fn scan_failure_is_reported() {
        let mut config = ScanConfig::new(ScanProblem::Absorbing { n_half: 5 }, 100);
        config.s_max = 0.3;
        assert!(matches!(
            onset_scan(0.5, &config),
            Err(Error::ScanFailure { .. })
        ));
    }

    proptest! {
        #[test]
        fn detector_is_scale_invariant(
            scale in prop_oneof![1e-200f64..1e-100, 1e-3f64..1e3, -1e3f64..-1e-3, 1e100f64..1e200],
            seed in proptest::collection::vec(-2.0f64..2.0, 3),
            ratio in -3.0f64..3.0,
        ) {
            let states: Vec<Vec<f64>> = (0..16)
                .map(|m| seed.iter().map(|v| v * ratio.powi(m)).collect())
                .collect();
            let scaled: Vec<Vec<f64>> = states
                .iter()
                .map(|s| s.iter().map(|v| v * scale).collect())
                .collect();
            prop_assume!(scaled.iter().flatten().zip(states.iter().flatten()).all(|(v, w)| v.is_finite() && (*v == 0.0) == (*w == 0.0) && v.abs() > 1e-290));
            let a = detect_instability(&history_from(&states), 5.0, 10).unwrap();
            let b = detect_instability(&history_from(&scaled), 5.0, 10).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}

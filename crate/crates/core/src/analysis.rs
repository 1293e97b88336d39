//! Error norms, second moments and observed convergence order.

use alloc::vec::Vec;

use crate::oracles::ProblemSpec;
use crate::solver::{solve, Grid1D, SchemeParams};
use crate::{Error, NeumaierSum, Order, Result};

/// Discrepancy between a lattice field and an exact solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub l_inf: f64,
    /// `sqrt(Σ_j e_j² Δx)` over interior nodes.
    pub l2: f64,
    pub n_nodes: usize,
    pub t: f64,
}

/// Compares `field` with `oracle(x_j)` at every interior node.
pub fn error_norms<F>(field: &[f64], mut oracle: F, grid: &Grid1D, t: f64) -> Result<ErrorReport>
where
    F: FnMut(f64) -> Result<f64>,
{
    if field.len() != grid.n_interior {
        return Err(Error::Grid("field does not match the lattice"));
    }
    let mut l_inf = 0.0f64;
    let mut sq = NeumaierSum::new();
    for (j, &u) in field.iter().enumerate() {
        let e = libm::fabs(u - oracle(grid.x(j))?);
        l_inf = l_inf.max(e);
        sq.add(e * e);
    }
    Ok(ErrorReport {
        l_inf,
        l2: libm::sqrt(sq.value() * grid.dx()),
        n_nodes: field.len(),
        t,
    })
}

/// `Σ x_j² U_j / Σ U_j`.
pub fn second_moment(field: &[f64], grid: &Grid1D) -> Result<f64> {
    if field.len() != grid.n_interior {
        return Err(Error::Grid("field does not match the lattice"));
    }
    let mut mass = NeumaierSum::new();
    let mut moment = NeumaierSum::new();
    for (j, &u) in field.iter().enumerate() {
        let x = grid.x(j);
        mass.add(u);
        moment.add(x * x * u);
    }
    let mass = mass.value();
    if mass == 0.0 || !mass.is_finite() {
        return Err(Error::UndefinedMoment);
    }
    Ok(moment.value() / mass)
}

/// `2K t^γ / Γ(1+γ)`.
pub fn msd_law(t: f64, gamma: f64, k: f64) -> f64 {
    2.0 * k * libm::pow(t, gamma) / libm::tgamma(1.0 + gamma)
}

/// Least-squares slope of `log(error)` against `log(dx)`.
pub fn fit_order(dx: &[f64], errors: &[f64]) -> Result<f64> {
    if dx.len() != errors.len() {
        return Err(Error::Grid("dx and error sequences differ in length"));
    }
    if dx.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: dx.len(),
        });
    }
    let mut pts = Vec::with_capacity(dx.len());
    for (&h, &e) in dx.iter().zip(errors) {
        if !(h > 0.0) {
            return Err(Error::Domain {
                what: "dx",
                value: h,
            });
        }
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::Domain {
                what: "error",
                value: e,
            });
        }
        pts.push((libm::log(h), libm::log(e)));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Grid("all dx values are equal"));
    }
    Ok(sxy / sxx)
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceLevel {
    pub dx: f64,
    pub dt: f64,
    /// Time actually reached, `steps · Δt`.
    pub t: f64,
    pub steps: usize,
    pub error: ErrorReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub levels: Vec<ConvergenceLevel>,
    /// Fitted slope of the `l_inf` errors.
    pub order: f64,
}

/// Solves one refinement level at fixed `S` and measures its error at the
/// step nearest `t_measure`.
pub fn convergence_level(
    problem: &ProblemSpec,
    s: f64,
    dx: f64,
    t_measure: f64,
    order: Order,
) -> Result<ConvergenceLevel> {
    let params = SchemeParams::from_s(problem.gamma, problem.k, dx, s)?.with_order(order);
    let grid = problem.lattice(dx)?;
    let traj = solve(
        &grid,
        &problem.initial_condition(),
        &params,
        t_measure,
        &[t_measure],
    )?;
    if let Some(step) = traj.overflow_step {
        return Err(Error::Range {
            what: "overflow at step",
            value: step as f64,
            limit: params.steps_to(t_measure) as f64,
        });
    }
    let snap = &traj.snapshots[0];
    let exact = problem.exact_at(snap.time)?;
    let error = error_norms(&snap.values, |x| exact.eval(x), &grid, snap.time)?;
    Ok(ConvergenceLevel {
        dx,
        dt: params.dt,
        t: snap.time,
        steps: snap.step,
        error,
    })
}

/// Observed order of accuracy along a strictly decreasing `dx` sequence.
pub fn convergence_order(
    problem: &ProblemSpec,
    s: f64,
    dx_seq: &[f64],
    t_measure: f64,
    order: Order,
) -> Result<ConvergenceStudy> {
    if dx_seq.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: dx_seq.len(),
        });
    }
    if dx_seq.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Grid("dx sequence must be strictly decreasing"));
    }
    let levels = dx_seq
        .iter()
        .map(|&dx| convergence_level(problem, s, dx, t_measure, order))
        .collect::<Result<Vec<_>>>()?;
    let errs: Vec<f64> = levels.iter().map(|l| l.error.l_inf).collect();
    let order = fit_order(dx_seq, &errs)?;
    Ok(ConvergenceStudy { levels, order })
}

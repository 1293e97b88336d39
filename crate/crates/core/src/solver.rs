//! Explicit fractional FTCS time stepping.
//!
//! One step advances every interior node by
//!
//! ```text
//! U_j^{m+1} = U_j^m + S Σ_{k=0}^{m} ω_k^{(1-γ)} L_j^{m-k},
//! L_j^n     = U_{j-1}^n - 2 U_j^n + U_{j+1}^n,
//! ```
//!
//! with `S = K Δt^γ / Δx²` and zero values at both ends of the lattice. The
//! Laplacians of every past state are kept, so a step costs one
//! multiply-add per node and history entry.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{check_gamma, check_positive};
use crate::{CoefficientTable, Error, NeumaierSum, Order, Result};

/// Past this many history terms the per-node convolution is compensated.
pub const COMPENSATED_AFTER: usize = 10_000;

/// `Δt = (S Δx² / K)^{1/γ}`.
pub fn dt_from_s(s: f64, dx: f64, gamma: f64, k: f64) -> Result<f64> {
    check_positive("S", s)?;
    check_positive("dx", dx)?;
    check_gamma(gamma)?;
    check_positive("K", k)?;
    let dt = libm::pow(s * dx * dx / k, 1.0 / gamma);
    check_positive("dt", dt)?;
    Ok(dt)
}

/// Discretization parameters. `Δt` is stored; `S` is always derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub gamma: f64,
    pub k: f64,
    pub dx: f64,
    pub dt: f64,
    pub order: Order,
    /// Number of history terms kept in the convolution; `0` keeps all.
    pub short_memory: usize,
}

impl SchemeParams {
    pub fn from_dt(gamma: f64, k: f64, dx: f64, dt: f64) -> Result<Self> {
        check_gamma(gamma)?;
        check_positive("K", k)?;
        check_positive("dx", dx)?;
        check_positive("dt", dt)?;
        Ok(Self {
            gamma,
            k,
            dx,
            dt,
            order: Order::First,
            short_memory: 0,
        })
    }

    pub fn from_s(gamma: f64, k: f64, dx: f64, s: f64) -> Result<Self> {
        Self::from_dt(gamma, k, dx, dt_from_s(s, dx, gamma, k)?)
    }

    pub fn with_order(mut self, order: Order) -> Self {
        self.order = order;
        self
    }

    pub fn with_short_memory(mut self, terms: usize) -> Result<Self> {
        if terms == 1 {
            return Err(Error::Domain {
                what: "short_memory",
                value: 1.0,
            });
        }
        self.short_memory = terms;
        Ok(self)
    }

    /// `S_γ = K Δt^γ / Δx²`.
    pub fn s(&self) -> f64 {
        self.k * libm::pow(self.dt, self.gamma) / (self.dx * self.dx)
    }

    /// Order of the Grünwald-Letnikov derivative, `1 - γ`.
    pub fn alpha(&self) -> f64 {
        1.0 - self.gamma
    }

    pub fn coefficients(&self, n: usize) -> Result<CoefficientTable> {
        CoefficientTable::new(self.alpha(), self.order, n)
    }

    /// Number of steps needed to reach `t` (rounded up, forgiving rounding noise).
    pub fn steps_to(&self, t: f64) -> usize {
        let ratio = t / self.dt;
        let nearest = libm::round(ratio);
        if libm::fabs(ratio - nearest) <= 1e-9 * nearest.max(1.0) {
            nearest as usize
        } else {
            libm::ceil(ratio) as usize
        }
    }
}

/// Uniform lattice with zero-Dirichlet ends at `xmin` and `xmax`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub xmin: f64,
    pub xmax: f64,
    pub n_interior: usize,
}

impl Grid1D {
    pub fn new(xmin: f64, xmax: f64, n_interior: usize) -> Result<Self> {
        if !(xmax > xmin) || !xmin.is_finite() || !xmax.is_finite() {
            return Err(Error::Grid("xmax must exceed xmin"));
        }
        if n_interior == 0 {
            return Err(Error::Grid("at least one interior node is required"));
        }
        Ok(Self {
            xmin,
            xmax,
            n_interior,
        })
    }

    /// Lattice of spacing `dx`, which must divide `xmax - xmin`.
    pub fn with_spacing(xmin: f64, xmax: f64, dx: f64) -> Result<Self> {
        check_positive("dx", dx)?;
        let cells = (xmax - xmin) / dx;
        let rounded = libm::round(cells);
        if libm::fabs(cells - rounded) > 1e-9 * rounded.max(1.0) {
            return Err(Error::Grid("dx does not divide the domain"));
        }
        if rounded < 2.0 {
            return Err(Error::Grid("at least one interior node is required"));
        }
        Self::new(xmin, xmax, rounded as usize - 1)
    }

    /// `2N + 1` points on `[-N dx, N dx]`, boundaries included.
    pub fn symmetric(half_cells: usize, dx: f64) -> Result<Self> {
        check_positive("dx", dx)?;
        if half_cells == 0 {
            return Err(Error::Grid("at least one interior node is required"));
        }
        let l = half_cells as f64 * dx;
        Self::new(-l, l, 2 * half_cells - 1)
    }

    pub fn dx(&self) -> f64 {
        (self.xmax - self.xmin) / (self.n_interior + 1) as f64
    }

    /// Position of interior node `j` (0-based, so `j = 0` is `xmin + dx`).
    pub fn x(&self, j: usize) -> f64 {
        self.xmin + (j + 1) as f64 * self.dx()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_interior).map(move |j| self.x(j))
    }

    pub fn length(&self) -> f64 {
        self.xmax - self.xmin
    }

    /// Interior node closest to `x0`.
    pub fn nearest_node(&self, x0: f64) -> Result<usize> {
        let idx = libm::round((x0 - self.xmin) / self.dx());
        if !(idx >= 1.0 && idx <= self.n_interior as f64) {
            return Err(Error::Range {
                what: "delta position",
                value: x0,
                limit: self.xmax,
            });
        }
        Ok(idx as usize - 1)
    }
}

/// Initial data `U^{(0)}`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// Unit mass on the single node nearest `x0`: `U = 1/Δx` there.
    Delta { x0: f64 },
    /// Unit mass spread `(1/4, 1/2, 1/4)/Δx` around the node nearest `x0`.
    ///
    /// Carries no weight on the alternating lattice mode, which matters when
    /// `S` sits exactly on the Brownian bound and that mode never decays.
    HatDelta { x0: f64 },
    /// `(x - xmin)(xmax - x)`, i.e. `x(1 - x)` on the unit interval.
    Parabolic,
    /// `sin(nπ (x - xmin)/(xmax - xmin))`.
    Mode(u32),
    /// Values at the interior nodes.
    Values(Vec<f64>),
}

impl InitialCondition {
    pub fn sample(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        let n = grid.n_interior;
        let dx = grid.dx();
        match self {
            InitialCondition::Delta { x0 } => {
                let mut u = vec![0.0; n];
                u[grid.nearest_node(*x0)?] = 1.0 / dx;
                Ok(u)
            }
            InitialCondition::HatDelta { x0 } => {
                let c = grid.nearest_node(*x0)?;
                if c == 0 || c + 1 == n {
                    return Err(Error::Grid(
                        "hat delta needs both neighbours inside the lattice",
                    ));
                }
                let mut u = vec![0.0; n];
                u[c] = 0.5 / dx;
                u[c - 1] = 0.25 / dx;
                u[c + 1] = 0.25 / dx;
                Ok(u)
            }
            InitialCondition::Parabolic => Ok(grid
                .positions()
                .map(|x| (x - grid.xmin) * (grid.xmax - x))
                .collect()),
            InitialCondition::Mode(m) => {
                let wave = *m as f64 * PI / grid.length();
                Ok(grid
                    .positions()
                    .map(|x| libm::sin(wave * (x - grid.xmin)))
                    .collect())
            }
            InitialCondition::Values(v) => {
                if v.len() != n {
                    return Err(Error::Grid(
                        "tabulated initial data does not match the lattice",
                    ));
                }
                Ok(v.clone())
            }
        }
    }
}

/// All states `U^{(0)} ..= U^{(m)}` and their Laplacians, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldHistory {
    width: usize,
    snapshots: Vec<f64>,
    laplacians: Vec<f64>,
}

fn laplacian_into(u: &[f64], out: &mut Vec<f64>) {
    let n = u.len();
    for j in 0..n {
        let left = if j == 0 { 0.0 } else { u[j - 1] };
        let right = if j + 1 == n { 0.0 } else { u[j + 1] };
        out.push(left - 2.0 * u[j] + right);
    }
}

impl FieldHistory {
    pub fn new(initial: Vec<f64>) -> Result<Self> {
        if initial.is_empty() {
            return Err(Error::Grid("empty initial state"));
        }
        let width = initial.len();
        let mut laplacians = Vec::with_capacity(width);
        laplacian_into(&initial, &mut laplacians);
        Ok(Self {
            width,
            snapshots: initial,
            laplacians,
        })
    }

    /// Pre-allocates room for `steps` further states.
    pub fn reserve(&mut self, steps: usize) {
        self.snapshots.reserve(steps * self.width);
        self.laplacians.reserve(steps * self.width);
    }

    /// Number of interior nodes.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of stored states (`m + 1`).
    pub fn len(&self) -> usize {
        self.snapshots.len() / self.width
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshot(&self, m: usize) -> &[f64] {
        &self.snapshots[m * self.width..(m + 1) * self.width]
    }

    pub fn laplacian(&self, m: usize) -> &[f64] {
        &self.laplacians[m * self.width..(m + 1) * self.width]
    }

    pub fn latest(&self) -> &[f64] {
        self.snapshot(self.len() - 1)
    }

    pub fn snapshots(&self) -> impl DoubleEndedIterator<Item = &[f64]> + ExactSizeIterator + '_ {
        self.snapshots.chunks_exact(self.width)
    }

    pub fn push(&mut self, state: &[f64]) {
        assert_eq!(state.len(), self.width, "state width mismatch");
        self.snapshots.extend_from_slice(state);
        laplacian_into(state, &mut self.laplacians);
    }
}

/// What a single step produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    /// Index of the new state, `m + 1`.
    pub index: usize,
    /// `max_j |U_j^{(m+1)}|`; infinite or NaN on overflow.
    pub max_abs: f64,
    /// With short memory on: `S Σ_{dropped k} |ω_k| · max |L|`, a bound on the
    /// neglected part of the convolution (NaN if the table is too short to tell).
    pub dropped_tail: f64,
    /// The new state held non-finite values and was not stored.
    pub overflow: bool,
}

/// Advances `history` by one step and appends the new state.
pub fn step(
    history: &mut FieldHistory,
    params: &SchemeParams,
    coeffs: &CoefficientTable,
) -> Result<StepStats> {
    let m = history.len() - 1;
    let memory = if params.short_memory == 0 {
        m + 1
    } else {
        params.short_memory.min(m + 1)
    };
    if coeffs.len() < memory {
        return Err(Error::Range {
            what: "history length",
            value: memory as f64,
            limit: coeffs.len() as f64,
        });
    }
    let w = &coeffs.as_slice()[..memory];
    let n = history.width();
    let s = params.s();

    let mut next = history.latest().to_vec();
    if memory > COMPENSATED_AFTER {
        let mut acc = vec![NeumaierSum::new(); n];
        for (k, &wk) in w.iter().enumerate() {
            for (a, &l) in acc.iter_mut().zip(history.laplacian(m - k)) {
                a.add(wk * l);
            }
        }
        for (u, a) in next.iter_mut().zip(&acc) {
            *u += s * a.value();
        }
    } else {
        let mut acc = vec![0.0; n];
        for (k, &wk) in w.iter().enumerate() {
            for (a, &l) in acc.iter_mut().zip(history.laplacian(m - k)) {
                *a += wk * l;
            }
        }
        for (u, a) in next.iter_mut().zip(&acc) {
            *u += s * a;
        }
    }

    let dropped_tail = if memory <= m {
        dropped_tail_bound(history, coeffs, memory, m, s)
    } else {
        0.0
    };
    let max_abs = next.iter().fold(0.0f64, |acc, v| {
        if v.is_finite() {
            acc.max(libm::fabs(*v))
        } else {
            f64::INFINITY
        }
    });
    let overflow = !max_abs.is_finite();
    if !overflow {
        history.push(&next);
    }
    Ok(StepStats {
        index: m + 1,
        max_abs,
        dropped_tail,
        overflow,
    })
}

fn dropped_tail_bound(
    history: &FieldHistory,
    coeffs: &CoefficientTable,
    memory: usize,
    m: usize,
    s: f64,
) -> f64 {
    if coeffs.len() <= m {
        return f64::NAN;
    }
    let weights: f64 = coeffs.as_slice()[memory..=m]
        .iter()
        .map(|w| libm::fabs(*w))
        .sum();
    let lap_max = (0..=m - memory)
        .flat_map(|i| history.laplacian(i).iter())
        .fold(0.0f64, |acc, v| acc.max(libm::fabs(*v)));
    s * weights * lap_max
}

/// A stored state of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub requested_time: f64,
    /// `step · Δt`; differs from `requested_time` when the request was off-grid.
    pub time: f64,
    pub step: usize,
    pub snapped: bool,
    pub values: Vec<f64>,
}

/// Per-step diagnostics; entry `i` belongs to state `U^{(i)}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepLog {
    pub max_abs: Vec<f64>,
    pub dropped_tail: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid1D,
    pub params: SchemeParams,
    pub snapshots: Vec<Snapshot>,
    pub log: StepLog,
    pub history: FieldHistory,
    /// Step at which a non-finite value appeared; the run stopped there.
    pub overflow_step: Option<usize>,
}

impl Trajectory {
    pub fn steps_run(&self) -> usize {
        self.history.len() - 1
    }

    pub fn is_unstable(&self) -> bool {
        self.overflow_step.is_some()
    }

    pub fn final_state(&self) -> &[f64] {
        self.history.latest()
    }
}

/// Integrates from `U^{(0)}` to `t_final`.
///
/// Requested snapshot times are snapped to the nearest step. If
/// `snapshot_times` is empty, only the final state is recorded.
pub fn solve(
    grid: &Grid1D,
    initial: &InitialCondition,
    params: &SchemeParams,
    t_final: f64,
    snapshot_times: &[f64],
) -> Result<Trajectory> {
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::Domain {
            what: "t_final",
            value: t_final,
        });
    }
    let dx_rel = libm::fabs(grid.dx() - params.dx) / params.dx;
    if dx_rel > 1e-9 {
        return Err(Error::Grid("grid spacing differs from the scheme's dx"));
    }
    let total_steps = params.steps_to(t_final);
    let default_times = [t_final];
    let times = if snapshot_times.is_empty() {
        &default_times[..]
    } else {
        snapshot_times
    };
    let mut plan = Vec::with_capacity(times.len());
    for &t in times {
        if !(t >= 0.0 && t <= t_final * (1.0 + 1e-12)) {
            return Err(Error::Range {
                what: "snapshot time",
                value: t,
                limit: t_final,
            });
        }
        let ratio = t / params.dt;
        let step = (libm::round(ratio) as usize).min(total_steps);
        let snapped = libm::fabs(ratio - libm::round(ratio)) > 1e-9 * ratio.max(1.0);
        plan.push((t, step, snapped));
    }

    let u0 = initial.sample(grid)?;
    let coeffs = params.coefficients(total_steps)?;
    let mut history = FieldHistory::new(u0)?;
    history.reserve(total_steps);
    let mut log = StepLog::default();
    log.max_abs.push(
        history
            .latest()
            .iter()
            .fold(0.0f64, |a, v| a.max(libm::fabs(*v))),
    );
    log.dropped_tail.push(0.0);

    let mut overflow_step = None;
    for _ in 0..total_steps {
        let stats = step(&mut history, params, &coeffs)?;
        log.max_abs.push(stats.max_abs);
        log.dropped_tail.push(stats.dropped_tail);
        if stats.overflow {
            overflow_step = Some(stats.index);
            break;
        }
    }

    let snapshots = plan
        .into_iter()
        .filter(|&(_, step, _)| step < history.len())
        .map(|(requested_time, step, snapped)| Snapshot {
            requested_time,
            time: step as f64 * params.dt,
            step,
            snapped,
            values: history.snapshot(step).to_vec(),
        })
        .collect();
    Ok(Trajectory {
        grid: *grid,
        params: *params,
        snapshots,
        log,
        history,
        overflow_step,
    })
}

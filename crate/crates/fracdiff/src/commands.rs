//! Subcommand pipelines. Each returns its CSV bytes and a manifest; writing
//! them out is left to the caller.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde_json::{json, Value};

use fracdiff_core::analysis::convergence_order;
use fracdiff_core::gl_coeffs::CoefficientTable;
use fracdiff_core::solver::solve;
use fracdiff_core::specfun::MLParams;
use fracdiff_core::stability::{
    bound_limit, lattice_correction, onset_scan, ScanProblem, StabilityReport,
};

use crate::config::{CoeffsConfig, ConvergenceConfig, MlConfig, ScanSettings, SolveConfig};
use crate::csvio::{format_real, write_csv, Field};
use crate::error::{CliError, Result};

pub struct RunOutput {
    pub csv: Vec<u8>,
    /// Resolved parameters and derived quantities.
    pub manifest: Value,
    /// Set when the run stopped early; the partial output is still valid.
    pub abort: Option<CliError>,
}

fn order_int(o: fracdiff_core::Order) -> u32 {
    o.as_int()
}

pub fn run_solve(cfg: &SolveConfig) -> Result<RunOutput> {
    let p = &cfg.params;
    let traj = solve(&cfg.grid, &cfg.initial, p, cfg.t_final, &cfg.snapshot_times)?;
    for snap in &traj.snapshots {
        if snap.snapped {
            log::warn!(
                "snapshot time {} is not a multiple of dt = {}; using t = {} (step {})",
                snap.requested_time,
                p.dt,
                snap.time,
                snap.step
            );
        }
    }
    let max_dropped = traj.log.dropped_tail.iter().copied().fold(0.0, f64::max);
    if max_dropped > 0.0 {
        log::warn!("short-memory truncation dropped up to {max_dropped:e} per step");
    }
    let grid = &traj.grid;
    // After an overflow the last finite state is appended for diagnosis.
    let last_finite = traj.overflow_step.map(|_| {
        let step = traj.steps_run();
        (step, step as f64 * p.dt, traj.final_state())
    });
    if let Some((step, _, _)) = last_finite {
        log::warn!("run aborted: later snapshots are omitted and the last finite state (step {step}) is appended");
    }
    let rows = traj
        .snapshots
        .iter()
        .map(|snap| (snap.step, snap.time, snap.values.as_slice()))
        .chain(last_finite)
        .flat_map(|(step, t, values)| {
            values
                .iter()
                .enumerate()
                .map(move |(j, &u)| vec![step.into(), t.into(), grid.x(j).into(), u.into()])
        });
    let csv = write_csv(Vec::new(), &["step", "t", "x", "u"], rows)?;
    let abort = traj.overflow_step.map(|step| CliError::Instability {
        step,
        time: step as f64 * p.dt,
    });
    let manifest = json!({
        "gamma": p.gamma,
        "K": p.k,
        "dx": p.dx,
        "dt": p.dt,
        "S": p.s(),
        "S_requested": cfg.s_requested,
        "coeff_order": order_int(p.order),
        "short_memory": p.short_memory,
        "grid": {"xmin": grid.xmin, "xmax": grid.xmax, "n_interior": grid.n_interior},
        "ic": cfg.ic.describe(),
        "t_final": cfg.t_final,
        "steps_planned": p.steps_to(cfg.t_final),
        "steps_run": traj.steps_run(),
        "overflow_step": traj.overflow_step,
        "max_dropped_tail": max_dropped,
        "snapshots": traj.snapshots.iter().map(|s| json!({
            "requested_time": s.requested_time,
            "time": s.time,
            "step": s.step,
            "snapped": s.snapped,
        })).collect::<Vec<_>>(),
    });
    Ok(RunOutput {
        csv,
        manifest,
        abort,
    })
}

/// Runs `jobs` on at most `threads` workers and returns results in job order.
fn run_pool<T, R, F>(jobs: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads.clamp(1, jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                *slots[i].lock().unwrap() = Some(f(job));
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().unwrap())
        .collect()
}

pub fn run_scan(settings: &ScanSettings) -> Result<RunOutput> {
    let config = &settings.config;
    let reports: Vec<fracdiff_core::Result<StabilityReport>> =
        run_pool(&settings.gammas, settings.threads, |&g| {
            onset_scan(g, config)
        });
    let reports = reports
        .into_iter()
        .collect::<fracdiff_core::Result<Vec<_>>>()?;
    let rows = reports.iter().map(|r| {
        vec![
            r.gamma.into(),
            order_int(r.order).into(),
            r.steps.into(),
            r.s_min.unwrap().into(),
            r.s_min_corrected().unwrap().into(),
            r.s_theory.into(),
        ]
    });
    let csv = write_csv(
        Vec::new(),
        &[
            "gamma",
            "order",
            "M",
            "S_min",
            "S_min_corrected",
            "S_theory",
        ],
        rows,
    )?;
    let (problem, n_half, dt) = match config.problem {
        ScanProblem::Absorbing { n_half } => ("absorbing", n_half, None),
        ScanProblem::Propagator { n_half, dt } => ("propagator", n_half, Some(dt)),
    };
    let mut results = Vec::new();
    for r in &reports {
        let (grid, _, params) =
            config
                .problem
                .setup(r.gamma, config.k, r.s_min.unwrap(), config.order)?;
        results.push(json!({
            "gamma": r.gamma,
            "S_theory": r.s_theory,
            "S_min": r.s_min,
            "S_min_corrected": r.s_min_corrected(),
            "first_unstable_step": r.first_unstable_step,
            "dx_at_S_min": params.dx,
            "dt_at_S_min": params.dt,
            "n_interior": grid.n_interior,
        }));
    }
    let manifest = json!({
        "gamma": settings.gammas,
        "problem": problem,
        "N": n_half,
        "dt": dt,
        "K": config.k,
        "M": config.steps,
        "coeff_order": order_int(config.order),
        "scan_step": config.scan_step,
        "start_factor": config.start_factor,
        "s_max": config.s_max,
        "xi": config.criterion.xi,
        "delta_M": config.criterion.window,
        "sin2_correction": lattice_correction(n_half)?,
        "threads": settings.threads,
        "results": results,
    });
    Ok(RunOutput {
        csv,
        manifest,
        abort: None,
    })
}

pub fn run_coeffs(cfg: &CoeffsConfig) -> Result<RunOutput> {
    let table = CoefficientTable::new(cfg.alpha, cfg.order, cfg.n)?;
    let rows = table
        .as_slice()
        .iter()
        .enumerate()
        .map(|(k, &w)| vec![k.into(), w.into()]);
    let csv = write_csv(Vec::new(), &["k", "omega"], rows)?;
    let manifest = json!({"alpha": cfg.alpha, "order": order_int(cfg.order), "n": cfg.n});
    Ok(RunOutput {
        csv,
        manifest,
        abort: None,
    })
}

pub fn run_ml(cfg: &MlConfig) -> Result<RunOutput> {
    let params = MLParams::new(cfg.gamma)?.with_target_accuracy(cfg.accuracy)?;
    let values = cfg
        .x_grid
        .iter()
        .map(|&x| {
            params
                .eval_neg(x)
                .map(|v| vec![Field::Real(x), Field::Real(v)])
        })
        .collect::<fracdiff_core::Result<Vec<_>>>()?;
    let csv = write_csv(Vec::new(), &["x", "value"], values)?;
    let manifest = json!({
        "gamma": cfg.gamma,
        "x_grid": cfg.x_grid,
        "accuracy": cfg.accuracy,
        "series_radius": params.series_radius,
    });
    Ok(RunOutput {
        csv,
        manifest,
        abort: None,
    })
}

pub fn run_convergence(cfg: &ConvergenceConfig) -> Result<RunOutput> {
    let study = convergence_order(&cfg.problem, cfg.s, &cfg.dx_list, cfg.t_measure, cfg.order)?;
    let rows = study.levels.iter().map(|l| {
        vec![
            l.dx.into(),
            l.dt.into(),
            l.error.l_inf.into(),
            l.error.l2.into(),
        ]
    });
    let mut csv = write_csv(Vec::new(), &["dx", "dt", "l_inf", "l2"], rows)?;
    csv.extend_from_slice(format!("# order={}\n", format_real(study.order)).as_bytes());
    let problem = match cfg.problem.kind {
        fracdiff_core::oracles::ProblemKind::AbsorbingMode(n) => format!("mode:{n}"),
        _ => "absorbing".to_string(),
    };
    let manifest = json!({
        "problem": problem,
        "gamma": cfg.problem.gamma,
        "K": cfg.problem.k,
        "S": cfg.s,
        "coeff_order": order_int(cfg.order),
        "t_measure": cfg.t_measure,
        "S_theory": bound_limit(cfg.problem.gamma, cfg.order)?,
        "levels": study.levels.iter().map(|l| json!({
            "dx": l.dx,
            "dt": l.dt,
            "steps": l.steps,
            "t": l.t,
            "l_inf": l.error.l_inf,
            "l2": l.error.l2,
        })).collect::<Vec<_>>(),
        "order": study.order,
    });
    Ok(RunOutput {
        csv,
        manifest,
        abort: None,
    })
}

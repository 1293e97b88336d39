//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use fracdiff_core::analysis::{convergence_order, error_norms, msd_law, second_moment};
use fracdiff_core::gl_coeffs::{first_order_coeffs, second_order_coeffs};
use fracdiff_core::oracles::ProblemSpec;
use fracdiff_core::solver::{solve, Grid1D, InitialCondition, SchemeParams};
use fracdiff_core::specfun::{mittag_leffler_neg, wright_m};
use fracdiff_core::stability::{
    bound_limit, bound_series, delta_s, onset_scan, run_trial, ScanConfig, ScanProblem,
};
use fracdiff_core::Order;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

const ONSET_TOL: f64 = 0.005;

fn absorbing_scan(gamma: f64, steps: usize, order: Order) -> Result<(f64, f64), String> {
    let config = ScanConfig::new(ScanProblem::Absorbing { n_half: 5 }, steps).with_order(order);
    let report = onset_scan(gamma, &config).map_err(|e| e.to_string())?;
    Ok((report.s_min.unwrap(), report.s_min_corrected().unwrap()))
}

fn onset_reproduction() -> Outcome {
    let mut ok = true;
    let mut msg = String::new();
    for gamma in [0.2, 0.4, 0.6, 0.8, 1.0] {
        let theory = bound_limit(gamma, Order::First).unwrap();
        match absorbing_scan(gamma, 1000, Order::First) {
            Ok((s_min, corrected)) => {
                let pass = (corrected - theory).abs() <= ONSET_TOL;
                ok &= pass;
                let _ = write!(
                    msg,
                    " γ={gamma}: S_min={s_min:.3} corrected={corrected:.4} theory={theory:.4}{};",
                    if pass { "" } else { " (off)" }
                );
            }
            Err(e) => {
                ok = false;
                let _ = write!(msg, " γ={gamma}: {e};");
            }
        }
    }
    (ok, msg)
}

fn small_m_inflation() -> Outcome {
    let mut ok = true;
    let mut msg = String::new();
    for gamma in [0.2, 0.4, 0.6, 0.8, 1.0] {
        match (
            absorbing_scan(gamma, 50, Order::First),
            absorbing_scan(gamma, 1000, Order::First),
        ) {
            (Ok((short, _)), Ok((long, _))) => {
                ok &= short > long;
                let _ = write!(msg, " γ={gamma}: M=50 {short:.3} > M=1000 {long:.3};");
            }
            (a, b) => {
                ok = false;
                let _ = write!(msg, " γ={gamma}: {:?} {:?};", a.err(), b.err());
            }
        }
    }
    (ok, msg)
}

fn second_order_bound() -> Outcome {
    let mut ok = true;
    let mut msg = String::new();
    for gamma in [0.5, 1.0] {
        let theory = bound_limit(gamma, Order::Second).unwrap();
        match absorbing_scan(gamma, 1000, Order::Second) {
            Ok((_, corrected)) => {
                let pass = (corrected - theory).abs() <= ONSET_TOL;
                ok &= pass;
                let _ = write!(
                    msg,
                    " order 2 γ={gamma}: corrected={corrected:.4} theory={theory:.4};"
                );
            }
            Err(e) => {
                ok = false;
                let _ = write!(msg, " order 2 γ={gamma}: {e};");
            }
        }
    }
    match absorbing_scan(1.0, 1000, Order::First) {
        Ok((_, corrected)) => {
            let pass = (corrected - 0.5).abs() <= ONSET_TOL;
            ok &= pass;
            let _ = write!(msg, " order 1 γ=1: corrected={corrected:.4};");
        }
        Err(e) => {
            ok = false;
            let _ = write!(msg, " order 1 γ=1: {e};");
        }
    }
    (ok, msg)
}

/// l_inf error at t = 10 on `[-10√(t^γ), 10√(t^γ)]` with `dx` from `S` and `dt`.
fn propagator_error(gamma: f64, s: f64, dt: f64, ic: &InitialCondition) -> Result<f64, String> {
    let t = 10.0;
    let half_width = 10.0 * f64::powf(t, gamma).sqrt();
    let problem =
        ProblemSpec::free_propagator(gamma, 1.0, half_width).map_err(|e| e.to_string())?;
    let dx = (dt.powf(gamma) / s).sqrt();
    let params = SchemeParams::from_dt(gamma, 1.0, dx, dt).map_err(|e| e.to_string())?;
    let grid = problem.lattice(dx).map_err(|e| e.to_string())?;
    let traj = solve(&grid, ic, &params, t, &[t]).map_err(|e| e.to_string())?;
    let snap = &traj.snapshots[0];
    let exact = problem.exact_at(snap.time).map_err(|e| e.to_string())?;
    let report = error_norms(&snap.values, |x| exact.eval(x), &grid, snap.time)
        .map_err(|e| e.to_string())?;
    Ok(report.l_inf)
}

fn propagator_agreement() -> Outcome {
    let cases = [
        (1.0, 0.5, 1e-3, InitialCondition::HatDelta { x0: 0.0 }),
        (0.5, 0.33, 1e-2, InitialCondition::Delta { x0: 0.0 }),
        (0.75, 0.4, 1e-2, InitialCondition::Delta { x0: 0.0 }),
    ];
    let mut ok = true;
    let mut msg = String::new();
    for (gamma, s, tol, ic) in cases {
        match (
            propagator_error(gamma, s, 0.01, &ic),
            propagator_error(gamma, s, 0.0025, &ic),
        ) {
            (Ok(coarse), Ok(fine)) => {
                let pass = coarse < tol && fine < coarse;
                ok &= pass;
                let _ = write!(
                    msg,
                    " γ={gamma} S={s}: l_inf {coarse:.2e} -> {fine:.2e} (tol {tol:e});"
                );
            }
            (a, b) => {
                ok = false;
                let _ = write!(msg, " γ={gamma}: {:?} {:?};", a.err(), b.err());
            }
        }
    }
    (ok, msg)
}

fn absorbing_agreement() -> Outcome {
    let cases = [
        (0.5, 0.33, 0.1, 2e-2),
        (0.75, 0.4, 0.05, 5e-3),
        (1.0, 0.5, 0.02, 5e-3),
    ];
    let mut ok = true;
    let mut msg = String::new();
    for (gamma, s, dx, tol) in cases {
        let run = || -> Result<f64, String> {
            let problem =
                ProblemSpec::absorbing_parabolic(gamma, 1.0).map_err(|e| e.to_string())?;
            let level =
                fracdiff_core::analysis::convergence_level(&problem, s, dx, 0.5, Order::First)
                    .map_err(|e| e.to_string())?;
            Ok(level.error.l_inf)
        };
        match run() {
            Ok(err) => {
                let pass = err < tol;
                ok &= pass;
                let _ = write!(
                    msg,
                    " γ={gamma} S={s} dx={dx}: l_inf {err:.2e} (tol {tol:e});"
                );
            }
            Err(e) => {
                ok = false;
                let _ = write!(msg, " γ={gamma}: {e};");
            }
        }
    }
    (ok, msg)
}

fn convergence() -> Outcome {
    let mut ok = true;
    let mut msg = String::new();
    for (gamma, s) in [(0.75, 0.3), (1.0, 0.4)] {
        let problem = ProblemSpec::absorbing_parabolic(gamma, 1.0).unwrap();
        match convergence_order(&problem, s, &[0.1, 0.05, 0.025], 0.5, Order::First) {
            Ok(study) => {
                let pass = (1.6..=2.4).contains(&study.order);
                ok &= pass;
                let errs: Vec<String> = study
                    .levels
                    .iter()
                    .map(|l| format!("{:.2e}", l.error.l_inf))
                    .collect();
                let _ = write!(
                    msg,
                    " γ={gamma} S={s}: order {:.3} [{}];",
                    study.order,
                    errs.join(", ")
                );
            }
            Err(e) => {
                ok = false;
                let _ = write!(msg, " γ={gamma}: {e};");
            }
        }
    }
    (ok, msg)
}

fn unstable_regime() -> Outcome {
    let gamma = 0.5;
    let s = 0.36;
    let dt = 0.0005;
    let steps = 100; // t = 0.05
    let problem = ScanProblem::Propagator { n_half: 50, dt };
    let config = ScanConfig::new(problem, steps);
    let report = match run_trial(gamma, s, &config) {
        Ok(r) => r,
        Err(e) => return (false, format!(" {e}")),
    };
    let (grid, ic, params) = problem.setup(gamma, 1.0, s, Order::First).unwrap();
    let traj = solve(&grid, &ic, &params, steps as f64 * dt, &[]).unwrap();
    let h = &traj.history;
    // Sign flips at every one of the last 11 steps at some node.
    let alternating = (0..h.width())
        .any(|j| (steps - 10..=steps).all(|m| h.snapshot(m - 1)[j] * h.snapshot(m)[j] < 0.0));
    let ok = report.unstable && alternating;
    (
        ok,
        format!(
            " γ=0.5 S=0.36 dt=5e-4: detector {} (first step {:?}), sign alternation by t=0.05: {alternating};",
            if report.unstable { "fired" } else { "silent" },
            report.first_unstable_step
        ),
    )
}

// e^{x²} erfc(x) = 2/√π ∫_0^∞ exp(-t² - 2xt) dt, composite Simpson on [0, 12].
fn scaled_erfc(x: f64) -> f64 {
    let (upper, n) = (12.0, 24_000);
    let h = upper / n as f64;
    let f = |t: f64| (-t * t - 2.0 * x * t).exp();
    let mut s = f(0.0) + f(upper);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 / PI.sqrt() * s * h / 3.0
}

fn special_functions() -> Outcome {
    let grid = |hi: f64, n: usize| (0..=n).map(move |i| hi * i as f64 / n as f64);
    let e1 = grid(10.0, 200)
        .map(|x| (mittag_leffler_neg(1.0, x).unwrap() - (-x).exp()).abs())
        .fold(0.0, f64::max);
    let ehalf = grid(5.0, 100)
        .map(|x| (mittag_leffler_neg(0.5, x).unwrap() - scaled_erfc(x)).abs())
        .fold(0.0, f64::max);
    let mhalf = grid(5.0, 100)
        .map(|z| (wright_m(0.5, z).unwrap() - (-z * z / 4.0).exp() / PI.sqrt()).abs())
        .fold(0.0, f64::max);
    let ok = e1 <= 1e-10 && ehalf <= 1e-8 && mhalf <= 1e-10;
    (ok, format!(" max |E_1 - exp| {e1:.1e}; max |E_1/2 - erfcx| {ehalf:.1e}; max |M_1/2 - gauss| {mhalf:.1e};"))
}

fn classical_limit() -> Outcome {
    let grid = Grid1D::with_spacing(0.0, 1.0, 0.01).unwrap();
    let params = SchemeParams::from_s(1.0, 1.0, 0.01, 0.4).unwrap();
    let steps = 100;
    let u0: Vec<f64> = grid
        .positions()
        .map(|x| (PI * x).sin() + 0.3 * (7.0 * PI * x).sin() + x * (1.0 - x))
        .collect();
    let traj = solve(
        &grid,
        &InitialCondition::Values(u0.clone()),
        &params,
        steps as f64 * params.dt,
        &[],
    )
    .unwrap();
    let s = params.s();
    let n = u0.len();
    let mut u = u0;
    for _ in 0..steps {
        let mut next = u.clone();
        for j in 0..n {
            let left = if j == 0 { 0.0 } else { u[j - 1] };
            let right = if j + 1 == n { 0.0 } else { u[j + 1] };
            next[j] = u[j] + s * (left - 2.0 * u[j] + right);
        }
        u = next;
    }
    let identical = traj.steps_run() == steps
        && traj
            .final_state()
            .iter()
            .zip(&u)
            .all(|(a, b)| a.to_bits() == b.to_bits());
    (
        identical,
        format!(
            " {} nodes incl. boundaries, {steps} steps: bit-identical {identical};",
            n + 2
        ),
    )
}

fn msd() -> Outcome {
    let gamma = 0.5;
    let (dt, s): (f64, f64) = (0.01, 0.33);
    let dx = (dt.powf(gamma) / s).sqrt();
    let grid = Grid1D::symmetric((30.0 / dx).floor() as usize, dx).unwrap();
    let params = SchemeParams::from_dt(gamma, 1.0, dx, dt).unwrap();
    let times = [1.0, 5.0, 10.0];
    let traj = solve(
        &grid,
        &InitialCondition::Delta { x0: 0.0 },
        &params,
        10.0,
        &times,
    )
    .unwrap();
    let mut ok = true;
    let mut msg = String::new();
    for snap in &traj.snapshots {
        let m = second_moment(&snap.values, &grid).unwrap();
        let law = msd_law(snap.time, gamma, 1.0);
        let ratio = m / law;
        ok &= (ratio - 1.0).abs() <= 0.02;
        let _ = write!(msg, " t={}: MSD/law {ratio:.4};", snap.time);
    }
    (ok, msg)
}

// (-1)^k binom(α, k) = Γ(k - α) / (Γ(-α) Γ(k + 1)) for 0 < α < 1.
fn binomial_weight(alpha: f64, k: usize) -> f64 {
    libm::tgamma(k as f64 - alpha) / (libm::tgamma(-alpha) * libm::tgamma(k as f64 + 1.0))
}

fn coefficient_properties() -> Outcome {
    let mut binom_err: f64 = 0.0;
    let mut gf_err: f64 = 0.0;
    let mut conv_err: f64 = 0.0;
    let z: f64 = 0.5;
    for i in 1..=9 {
        let alpha = i as f64 / 10.0;
        let first = first_order_coeffs(alpha, 80).unwrap();
        for k in 0..=50 {
            binom_err = binom_err.max((first.as_slice()[k] - binomial_weight(alpha, k)).abs());
        }
        let second = second_order_coeffs(alpha, 80).unwrap();
        let series = |c: &[f64]| {
            c.iter()
                .enumerate()
                .map(|(k, w)| w * z.powi(k as i32))
                .sum::<f64>()
        };
        gf_err = gf_err.max((series(first.as_slice()) - (1.0 - z).powf(alpha)).abs());
        gf_err = gf_err
            .max((series(second.as_slice()) - (1.5 - 2.0 * z + 0.5 * z * z).powf(alpha)).abs());
        let gamma = 1.0 - alpha;
        let b = bound_series(gamma, Order::First, 1000).unwrap();
        conv_err = conv_err.max((b.values[1000] - b.limit).abs());
    }
    let ds = delta_s(0.5, Order::First).unwrap();
    let ok =
        binom_err <= 1e-12 && gf_err <= 1e-10 && conv_err < 1e-3 && (ds - 0.0303030).abs() <= 1e-6;
    (
        ok,
        format!(" binomial {binom_err:.1e}; generating function {gf_err:.1e}; |S_1000 - S^x| {conv_err:.1e}; ΔS_0.5 = {ds:.7};"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (
            "stability onset matches 1/2^(2-γ) (N=5, M=1000)",
            onset_reproduction,
        ),
        ("M=50 onset exceeds M=1000 onset", small_m_inflation),
        (
            "second-order coefficient bound 1/4^(3/2-γ)",
            second_order_bound,
        ),
        ("free propagator agreement at t=10", propagator_agreement),
        ("absorbing-boundary agreement at t=0.5", absorbing_agreement),
        ("observed convergence order at fixed S", convergence),
        ("unstable regime γ=0.5, S=0.36", unstable_regime),
        ("special-function identities", special_functions),
        ("γ=1 equals classical FTCS bit for bit", classical_limit),
        ("mean-square displacement law γ=0.5", msd),
        (
            "Grünwald-Letnikov coefficient properties",
            coefficient_properties,
        ),
    ];
    let start = Instant::now();
    let results: Vec<(Outcome, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|(_, f)| {
                scope.spawn(move || {
                    let t = Instant::now();
                    let outcome = std::panic::catch_unwind(f)
                        .unwrap_or_else(|_| (false, " panicked".to_string()));
                    (outcome, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failures = 0;
    for (i, ((name, _), ((ok, detail), secs))) in criteria.iter().zip(results).enumerate() {
        if !ok {
            failures += 1;
        }
        println!(
            "AC{:<2} {} {name} [{secs:.1}s]:{detail}",
            i + 1,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "acceptance: {} passed, {failures} failed ({:.1}s)",
        criteria.len() - failures,
        start.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

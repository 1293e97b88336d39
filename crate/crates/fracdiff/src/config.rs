//! Experiment configuration: JSON files overlaid with command-line flags.
//!
//! Every subcommand has one argument struct that is both a clap argument
//! group and a serde document. Config keys are snake_case and flags are the
//! kebab-case spelling of the same key (`t_final` / `--t-final`). A flag wins
//! over the file.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use fracdiff_core::solver::{Grid1D, InitialCondition, SchemeParams};
use fracdiff_core::stability::ScanProblem;
use fracdiff_core::Order;

use crate::csvio::read_real_column;
use crate::error::{CliError, Result};

/// Where results go. Not part of the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// CSV output file (default: stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Run manifest (default: `<output>.manifest.json` when --output is given).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

impl OutputArgs {
    pub fn manifest_path(&self) -> Option<PathBuf> {
        self.manifest.clone().or_else(|| {
            self.output.as_ref().map(|o| {
                let mut s = o.clone().into_os_string();
                s.push(".manifest.json");
                PathBuf::from(s)
            })
        })
    }
}

/// Initial condition as written on the command line (`delta`, `delta:0.5`,
/// `hat`, `parabolic`, `mode:2`, `tabulated:u0.csv`) or in a config file,
/// where `{"kind": "mode", "n": 2}` is also accepted.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "IcRepr")]
pub enum IcSpec {
    Delta { x0: f64 },
    Hat { x0: f64 },
    Parabolic,
    Mode(u32),
    Tabulated(PathBuf),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IcRepr {
    Short(String),
    Full(IcFull),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IcFull {
    kind: String,
    x0: Option<f64>,
    n: Option<u32>,
    file: Option<PathBuf>,
}

impl IcSpec {
    fn build(
        kind: &str,
        x0: Option<f64>,
        n: Option<u32>,
        file: Option<PathBuf>,
    ) -> std::result::Result<Self, String> {
        match kind {
            "delta" => Ok(IcSpec::Delta {
                x0: x0.unwrap_or(0.0),
            }),
            "hat" => Ok(IcSpec::Hat {
                x0: x0.unwrap_or(0.0),
            }),
            "parabolic" => Ok(IcSpec::Parabolic),
            "mode" => Ok(IcSpec::Mode(n.unwrap_or(1))),
            "tabulated" => file
                .map(IcSpec::Tabulated)
                .ok_or_else(|| "tabulated initial data needs a file".to_string()),
            other => Err(format!(
                "unknown initial condition '{other}' (delta, hat, parabolic, mode, tabulated)"
            )),
        }
    }

    pub fn describe(&self) -> serde_json::Value {
        match self {
            IcSpec::Delta { x0 } => serde_json::json!({"kind": "delta", "x0": x0}),
            IcSpec::Hat { x0 } => serde_json::json!({"kind": "hat", "x0": x0}),
            IcSpec::Parabolic => serde_json::json!({"kind": "parabolic"}),
            IcSpec::Mode(n) => serde_json::json!({"kind": "mode", "n": n}),
            IcSpec::Tabulated(p) => serde_json::json!({"kind": "tabulated", "file": p}),
        }
    }
}

impl FromStr for IcSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let num = |a: &str| a.parse::<f64>().map_err(|e| format!("'{a}': {e}"));
        match (kind, arg) {
            ("delta" | "hat", Some(a)) => Self::build(kind, Some(num(a)?), None, None),
            ("mode", Some(a)) => {
                let n = a.parse::<u32>().map_err(|e| format!("'{a}': {e}"))?;
                Self::build(kind, None, Some(n), None)
            }
            ("tabulated", Some(a)) => Self::build(kind, None, None, Some(PathBuf::from(a))),
            (_, None) => Self::build(kind, None, None, None),
            (_, Some(_)) => Err(format!("'{kind}' takes no argument")),
        }
    }
}

impl TryFrom<IcRepr> for IcSpec {
    type Error = String;

    fn try_from(r: IcRepr) -> std::result::Result<Self, String> {
        match r {
            IcRepr::Short(s) => s.parse(),
            IcRepr::Full(f) => Self::build(&f.kind, f.x0, f.n, f.file),
        }
    }
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),+ $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )+
    };
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Anomalous diffusion exponent, 0 < gamma <= 1.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Generalized diffusion coefficient (default 1).
    #[arg(long = "K", alias = "k")]
    #[serde(rename = "K", alias = "k")]
    pub k: Option<f64>,
    #[arg(long)]
    pub dx: Option<f64>,
    /// Time step; give exactly one of --dt and --S.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Stability parameter K dt^gamma / dx^2.
    #[arg(long = "S", alias = "s")]
    #[serde(rename = "S", alias = "s")]
    pub s: Option<f64>,
    /// Domain ends `xmin,xmax`; dx must divide the length.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub domain: Option<Vec<f64>>,
    /// Symmetric lattice [-N dx, N dx] instead of --domain.
    #[arg(long)]
    pub half_cells: Option<usize>,
    /// delta[:x0] | hat[:x0] | parabolic | mode[:n] | tabulated:FILE
    #[arg(long)]
    pub ic: Option<IcSpec>,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Comma-separated output times (default: t_final).
    #[arg(long, value_delimiter = ',')]
    pub snapshot_times: Option<Vec<f64>>,
    /// Grünwald-Letnikov coefficient order, 1 or 2.
    #[arg(long)]
    pub coeff_order: Option<u32>,
    /// History terms kept in the convolution (0 = all).
    #[arg(long)]
    pub short_memory: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Comma-separated exponents to scan.
    #[arg(long, value_delimiter = ',')]
    #[serde(alias = "gamma_list")]
    pub gamma: Option<Vec<f64>>,
    /// Steps per trial (default 1000).
    #[arg(long = "M", alias = "m")]
    #[serde(rename = "M")]
    pub steps: Option<usize>,
    /// Lattice of 2N+1 points including the ends (default 5).
    #[arg(long = "N", alias = "n")]
    #[serde(rename = "N")]
    pub n_half: Option<usize>,
    /// absorbing | propagator (default absorbing).
    #[arg(long)]
    pub problem: Option<String>,
    /// Fixed time step of the propagator problem.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "K", alias = "k")]
    #[serde(rename = "K", alias = "k")]
    pub k: Option<f64>,
    /// Increment of S between trials (default 0.001).
    #[arg(long)]
    pub scan_step: Option<f64>,
    /// First S as a multiple of the theoretical bound (default 0.98).
    #[arg(long)]
    pub start_factor: Option<f64>,
    #[arg(long)]
    pub coeff_order: Option<u32>,
    /// Worker threads (default: all cores; FRACDIFF_THREADS caps it).
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffsArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Derivative order, 0 <= alpha <= 1.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// 1 or 2 (default 1).
    #[arg(long)]
    pub order: Option<u32>,
    /// Highest index k.
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Comma-separated arguments x >= 0; E_gamma(-x) is reported.
    #[arg(long = "x", alias = "x-grid", value_delimiter = ',')]
    #[serde(rename = "x_grid", alias = "x")]
    pub x_grid: Option<Vec<f64>>,
    /// Absolute accuracy target (default 1e-8).
    #[arg(long)]
    pub accuracy: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long = "K", alias = "k")]
    #[serde(rename = "K", alias = "k")]
    pub k: Option<f64>,
    #[arg(long = "S", alias = "s")]
    #[serde(rename = "S", alias = "s")]
    pub s: Option<f64>,
    /// Strictly decreasing spacings, at least three.
    #[arg(long, value_delimiter = ',')]
    pub dx_list: Option<Vec<f64>>,
    /// Measurement time (default 0.5).
    #[arg(long)]
    pub t_measure: Option<f64>,
    /// absorbing (x(1-x) initial data) | mode:n (default absorbing).
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub coeff_order: Option<u32>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

/// Environment variable capping the scan worker pool.
pub const THREADS_ENV: &str = "FRACDIFF_THREADS";

fn load_file<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        key: None,
        message: format!("{}: {e}", path.display()),
    })
}

fn require<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| CliError::parse(key, "missing required key"))
}

fn check_gamma(gamma: f64, key: &str) -> Result<f64> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(gamma)
    } else {
        Err(CliError::parse(key, format!("{gamma} is outside (0, 1]")))
    }
}

fn check_positive(v: f64, key: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::parse(
            key,
            format!("{v} must be positive and finite"),
        ))
    }
}

fn order_from(v: Option<u32>, key: &str) -> Result<Order> {
    Order::from_int(v.unwrap_or(1)).map_err(|_| CliError::parse(key, "must be 1 or 2"))
}

/// A fully resolved `solve` run.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub params: SchemeParams,
    /// `S` as given, before the round trip through `dt`.
    pub s_requested: Option<f64>,
    pub grid: Grid1D,
    pub ic: IcSpec,
    pub initial: InitialCondition,
    pub t_final: f64,
    pub snapshot_times: Vec<f64>,
}

impl SolveArgs {
    pub fn merged(self) -> Result<Self> {
        let mut base: SolveArgs = load_file(self.config.as_deref())?;
        let top = self;
        overlay!(base, top; gamma, k, dx, dt, s, domain, half_cells, ic, t_final, snapshot_times, coeff_order, short_memory);
        base.config = top.config;
        base.out = top.out;
        Ok(base)
    }

    pub fn resolve(self) -> Result<SolveConfig> {
        let a = self.merged()?;
        let gamma = check_gamma(require(a.gamma, "gamma")?, "gamma")?;
        let k = check_positive(a.k.unwrap_or(1.0), "K")?;
        let dx = check_positive(require(a.dx, "dx")?, "dx")?;
        let order = order_from(a.coeff_order, "coeff_order")?;
        let params = match (a.dt, a.s) {
            (Some(_), Some(_)) => {
                return Err(CliError::parse(
                    "dt",
                    "give exactly one of dt and S, not both",
                ))
            }
            (None, None) => return Err(CliError::parse("dt", "one of dt and S is required")),
            (Some(dt), None) => SchemeParams::from_dt(gamma, k, dx, check_positive(dt, "dt")?),
            (None, Some(s)) => SchemeParams::from_s(gamma, k, dx, check_positive(s, "S")?),
        }
        .map_err(|e| CliError::parse("dt", e))?
        .with_order(order);
        let params = params
            .with_short_memory(a.short_memory.unwrap_or(0))
            .map_err(|_| CliError::parse("short_memory", "must be 0 (off) or at least 2"))?;

        let grid = match (&a.domain, a.half_cells) {
            (Some(_), Some(_)) => {
                return Err(CliError::parse(
                    "domain",
                    "give either domain or half_cells, not both",
                ))
            }
            (None, None) => {
                return Err(CliError::parse(
                    "domain",
                    "one of domain and half_cells is required",
                ))
            }
            (Some(d), None) => {
                if d.len() != 2 {
                    return Err(CliError::parse("domain", "expected two numbers xmin,xmax"));
                }
                Grid1D::with_spacing(d[0], d[1], dx).map_err(|e| CliError::parse("domain", e))?
            }
            (None, Some(n)) => {
                Grid1D::symmetric(n, dx).map_err(|e| CliError::parse("half_cells", e))?
            }
        };

        let ic = require(a.ic, "ic")?;
        let initial = match &ic {
            IcSpec::Delta { x0 } => InitialCondition::Delta { x0: *x0 },
            IcSpec::Hat { x0 } => InitialCondition::HatDelta { x0: *x0 },
            IcSpec::Parabolic => InitialCondition::Parabolic,
            IcSpec::Mode(n) => InitialCondition::Mode(*n),
            IcSpec::Tabulated(path) => InitialCondition::Values(read_real_column(path)?),
        };
        initial
            .sample(&grid)
            .map_err(|e| CliError::parse("ic", e))?;

        let t_final = require(a.t_final, "t_final")?;
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(CliError::parse(
                "t_final",
                format!("{t_final} must be non-negative"),
            ));
        }
        let snapshot_times = a.snapshot_times.unwrap_or_else(|| vec![t_final]);
        if let Some(t) = snapshot_times
            .iter()
            .find(|&&t| !(t >= 0.0 && t <= t_final))
        {
            return Err(CliError::parse(
                "snapshot_times",
                format!("{t} is outside [0, t_final]"),
            ));
        }
        Ok(SolveConfig {
            params,
            s_requested: a.s,
            grid,
            ic,
            initial,
            t_final,
            snapshot_times,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ScanSettings {
    pub gammas: Vec<f64>,
    pub config: fracdiff_core::stability::ScanConfig,
    pub threads: usize,
}

impl ScanArgs {
    pub fn merged(self) -> Result<Self> {
        let mut base: ScanArgs = load_file(self.config.as_deref())?;
        let top = self;
        overlay!(base, top; gamma, steps, n_half, problem, dt, k, scan_step, start_factor, coeff_order, threads);
        base.config = top.config;
        base.out = top.out;
        Ok(base)
    }

    pub fn resolve(self) -> Result<ScanSettings> {
        use fracdiff_core::stability::{InstabilityCriterion, ScanConfig};
        let a = self.merged()?;
        let gammas = require(a.gamma, "gamma")?;
        if gammas.is_empty() {
            return Err(CliError::parse("gamma", "empty list"));
        }
        for &g in &gammas {
            check_gamma(g, "gamma")?;
        }
        let criterion = InstabilityCriterion::default();
        let steps = a.steps.unwrap_or(1000);
        if steps < criterion.window + 1 {
            return Err(CliError::parse(
                "M",
                format!("needs at least {} steps", criterion.window + 1),
            ));
        }
        let n_half = a.n_half.unwrap_or(5);
        if n_half == 0 {
            return Err(CliError::parse("N", "must be at least 1"));
        }
        let problem = match a.problem.as_deref().unwrap_or("absorbing") {
            "absorbing" => ScanProblem::Absorbing { n_half },
            "propagator" => ScanProblem::Propagator {
                n_half,
                dt: check_positive(require(a.dt, "dt")?, "dt")?,
            },
            other => {
                return Err(CliError::parse(
                    "problem",
                    format!("unknown problem '{other}' (absorbing, propagator)"),
                ))
            }
        };
        let mut config =
            ScanConfig::new(problem, steps).with_order(order_from(a.coeff_order, "coeff_order")?);
        config.k = check_positive(a.k.unwrap_or(1.0), "K")?;
        config.scan_step = check_positive(a.scan_step.unwrap_or(config.scan_step), "scan_step")?;
        config.start_factor = check_positive(
            a.start_factor.unwrap_or(config.start_factor),
            "start_factor",
        )?;
        let mut threads = match a.threads {
            Some(0) => return Err(CliError::parse("threads", "must be at least 1")),
            Some(n) => n,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        if let Ok(cap) = std::env::var(THREADS_ENV) {
            match cap.trim().parse::<usize>() {
                Ok(c) if c > 0 => threads = threads.min(c),
                _ => {
                    return Err(CliError::parse(
                        THREADS_ENV,
                        format!("'{cap}' is not a positive integer"),
                    ))
                }
            }
        }
        Ok(ScanSettings {
            gammas,
            config,
            threads,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CoeffsConfig {
    pub alpha: f64,
    pub order: Order,
    pub n: usize,
}

impl CoeffsArgs {
    pub fn resolve(self) -> Result<CoeffsConfig> {
        let mut base: CoeffsArgs = load_file(self.config.as_deref())?;
        let top = self;
        overlay!(base, top; alpha, order, n);
        let alpha = require(base.alpha, "alpha")?;
        if !(0.0..=1.0).contains(&alpha) {
            return Err(CliError::parse(
                "alpha",
                format!("{alpha} is outside [0, 1]"),
            ));
        }
        Ok(CoeffsConfig {
            alpha,
            order: order_from(base.order, "order")?,
            n: require(base.n, "n")?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct MlConfig {
    pub gamma: f64,
    pub x_grid: Vec<f64>,
    pub accuracy: f64,
}

impl MlArgs {
    pub fn resolve(self) -> Result<MlConfig> {
        let mut base: MlArgs = load_file(self.config.as_deref())?;
        let top = self;
        overlay!(base, top; gamma, x_grid, accuracy);
        Ok(MlConfig {
            gamma: check_gamma(require(base.gamma, "gamma")?, "gamma")?,
            x_grid: require(base.x_grid, "x_grid")?,
            accuracy: check_positive(base.accuracy.unwrap_or(1e-8), "accuracy")?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    pub problem: fracdiff_core::oracles::ProblemSpec,
    pub s: f64,
    pub dx_list: Vec<f64>,
    pub t_measure: f64,
    pub order: Order,
}

impl ConvergenceArgs {
    pub fn resolve(self) -> Result<ConvergenceConfig> {
        use fracdiff_core::oracles::ProblemSpec;
        let mut base: ConvergenceArgs = load_file(self.config.as_deref())?;
        let top = self;
        overlay!(base, top; gamma, k, s, dx_list, t_measure, problem, coeff_order);
        let gamma = check_gamma(require(base.gamma, "gamma")?, "gamma")?;
        let k = check_positive(base.k.unwrap_or(1.0), "K")?;
        let s = check_positive(require(base.s, "S")?, "S")?;
        let dx_list = require(base.dx_list, "dx_list")?;
        if dx_list.len() < 3 {
            return Err(CliError::parse(
                "dx_list",
                "at least three refinement levels are required",
            ));
        }
        if dx_list.windows(2).any(|w| !(w[1] < w[0])) || dx_list.iter().any(|&h| !(h > 0.0)) {
            return Err(CliError::parse(
                "dx_list",
                "must be positive and strictly decreasing",
            ));
        }
        let t_measure = check_positive(base.t_measure.unwrap_or(0.5), "t_measure")?;
        let problem = match base.problem.as_deref().unwrap_or("absorbing") {
            "absorbing" => ProblemSpec::absorbing_parabolic(gamma, k),
            p => match p.strip_prefix("mode:").map(str::parse::<u32>) {
                Some(Ok(n)) => ProblemSpec::absorbing_mode(n, gamma, k),
                _ => {
                    return Err(CliError::parse(
                        "problem",
                        format!("unknown problem '{p}' (absorbing, mode:n)"),
                    ))
                }
            },
        }
        .map_err(|e| CliError::parse("problem", e))?;
        Ok(ConvergenceConfig {
            problem,
            s,
            dx_list,
            t_measure,
            order: order_from(base.coeff_order, "coeff_order")?,
        })
    }
}

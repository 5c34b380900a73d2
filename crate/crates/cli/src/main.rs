//! `cxmetric`: command-line access to the metric estimators.
//!
//! Exit status is 0 when every checked invariant held, 1 on an invariant
//! violation and 2 on a configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde_json::{json, Value};

use cxmetric::corpus::{self, Direction};
use cxmetric::disc::{affine_disc_bound, recentered_disc_bound};
use cxmetric::domain::{base_point, normalize_frame};
use cxmetric::line::{line_type, line_type_by_regression, radius_scaling_exponent, RayOptions, DEFAULT_ORDER_CAP};
use cxmetric::psh::{bnw_family, verify_candidate, LeviProbe};
use cxmetric::sampling::rng_for;
use cxmetric::scaling::{self, parse_methods, DeltaGrid, SweepConfig};
use cxmetric::sibony::{normal_candidate, sibony_lower_bound, tangential_candidate, CandidateOptions, ScalarCandidate};
use cxmetric::{BoundaryFrame, ComplexDirection, ConvexDomain, MetricError};

#[derive(Parser)]
#[command(name = "cxmetric", version, about = "Sibony and Kobayashi metric estimates on convex domains in C^n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Line type of the boundary along a complex direction.
    Type(Common),
    /// Scaling of the boundary radius with delta.
    Radius(Common),
    /// Sibony lower bounds (and disc upper bounds with --upper) on the delta grid.
    Bounds {
        #[command(flatten)]
        common: Common,
        /// Also compute analytic-disc upper bounds.
        #[arg(long)]
        upper: bool,
    },
    /// Full delta sweep with exponent fits and sandwich constants.
    Sweep(Common),
    /// Admissibility checks for the constructed candidates at one delta.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-2)]
        delta: f64,
        /// Interior sample points.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Empirical BNW constants for random admissible polynomials.
    Bnw {
        #[command(flatten)]
        common: Common,
        /// Polynomial degree.
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 400)]
        grid: usize,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Corpus identifier or path to a JSON polynomial domain.
    #[arg(long, default_value = "ball:2")]
    domain: String,
    /// Boundary point: "north" or a vector of reals.
    #[arg(long, default_value = "north")]
    point: String,
    /// "normal", "tangent:j" or an explicit vector.
    #[arg(long, default_value = "tangent:1")]
    dir: String,
    #[arg(long, default_value_t = 1e-4)]
    delta_min: f64,
    #[arg(long, default_value_t = 1e-1)]
    delta_max: f64,
    #[arg(long, default_value_t = 16)]
    count: usize,
    /// Comma-separated subset of sibony, disc, recentered, oracle.
    #[arg(long, default_value = "sibony,disc,recentered,oracle")]
    methods: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report destination (.csv or .json); JSON goes to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Violation(String),
}

impl From<MetricError> for Failure {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::NegativeLevi { .. } | MetricError::NotAdmissible { .. } => Failure::Violation(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

struct Setup {
    domain: ConvexDomain,
    frame: BoundaryFrame,
    direction: Direction,
}

impl Setup {
    fn new(c: &Common) -> Result<Self, MetricError> {
        let domain = corpus::load_domain(&c.domain)?;
        let p = corpus::resolve_point(&domain, &c.point)?;
        let frame = normalize_frame(&domain, &p)?;
        let direction = corpus::resolve_direction(&frame, &c.dir)?;
        Ok(Self { domain, frame, direction })
    }

    fn xi(&self) -> ComplexDirection {
        self.direction.vector(&self.frame)
    }
}

fn grid(c: &Common) -> Result<DeltaGrid, MetricError> {
    let g = DeltaGrid { min: c.delta_min, max: c.delta_max, count: c.count };
    if !(g.min > 0.0 && g.min < g.max && g.max.is_finite()) || g.count < 8 {
        return Err(MetricError::ConfigInvalid(format!(
            "need 0 < delta-min < delta-max and count >= 8, got {}, {}, {}",
            g.min, g.max, g.count
        )));
    }
    Ok(g)
}

fn emit(value: &Value, out: Option<&PathBuf>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize") + "\n";
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn run_type(c: &Common) -> Outcome {
    let s = Setup::new(c)?;
    let xi = s.xi();
    let taylor = match &s.direction {
        Direction::Tangential(t) => Some(line_type(&s.domain, &s.frame.p, t, DEFAULT_ORDER_CAP)?),
        Direction::Normal => None,
    };
    let deltas = grid(c)?.values();
    let scaling = radius_scaling_exponent(&s.domain, &s.frame.p, &xi, &deltas, &RayOptions::default())?;
    let regression = line_type_by_regression(&scaling)?;
    let agree = taylor.as_ref().is_none_or(|t| t.m == regression.m);
    if !agree {
        warn!("Taylor and regression line types disagree");
    }
    let report = json!({
        "domain": s.domain.name(),
        "point": to_value(&s.frame.p),
        "taylor": taylor.as_ref().map(to_value),
        "regression": to_value(&regression),
        "consistent": agree,
    });
    emit(&report, c.out.as_ref())?;
    Ok(agree)
}

fn run_radius(c: &Common) -> Outcome {
    let s = Setup::new(c)?;
    let g = grid(c)?;
    let scaling = radius_scaling_exponent(&s.domain, &s.frame.p, &s.xi(), &g.values(), &RayOptions::default())?;
    let m = line_type_by_regression(&scaling).ok().map(|e| e.m);
    info!("radius slope {:.4}, R^2 {:.6}", scaling.fit.slope, scaling.fit.r2);
    let ok = scaling.monotone;
    let report = json!({
        "domain": s.domain.name(),
        "scaling": to_value(&scaling),
        "m_estimate": m,
    });
    emit(&report, c.out.as_ref())?;
    Ok(ok)
}

fn lower_candidate(s: &Setup, delta: f64, seed: u64) -> Result<ScalarCandidate, MetricError> {
    match &s.direction {
        Direction::Normal => normal_candidate(&s.frame, delta),
        Direction::Tangential(t) => {
            let opts = CandidateOptions { ray: RayOptions { initial_step: Some(delta), ..RayOptions::default() }, seed, ..CandidateOptions::default() };
            tangential_candidate(&s.domain, &s.frame, t, delta, true, &opts)
        }
    }
}

fn run_bounds(c: &Common, upper: bool) -> Outcome {
    let s = Setup::new(c)?;
    let g = grid(c)?;
    let xi = s.xi();
    let mut ok = true;
    let mut rows = Vec::new();
    for delta in g.values() {
        let candidate = lower_candidate(&s, delta, c.seed)?;
        let lower = sibony_lower_bound(&candidate, &xi.xi)?;
        let mut row = json!({ "delta": delta, "lower": lower, "candidate": to_value(&candidate.export()) });
        if upper {
            let p_delta = base_point(&s.domain, &s.frame.p, &s.frame.nu, delta)?;
            let ray = RayOptions { initial_step: Some(delta), ..RayOptions::default() };
            let affine = affine_disc_bound(&s.domain, &p_delta, &xi, &ray)?;
            let recentered = recentered_disc_bound(&s.domain, &p_delta, &xi, &s.frame.nu, 200, &ray)?;
            let best = if recentered.value <= affine.value { recentered } else { affine };
            if lower > best.value * (1.0 + 1e-9) {
                warn!("delta {delta}: lower {lower} exceeds upper {}", best.value);
                ok = false;
            }
            row["upper"] = json!(best.value);
            row["disc"] = to_value(&best.disc);
        }
        rows.push(row);
    }
    let report = json!({ "domain": s.domain.name(), "direction": c.dir, "bounds": rows });
    emit(&report, c.out.as_ref())?;
    Ok(ok)
}

fn run_sweep(c: &Common) -> Outcome {
    let mut config = SweepConfig::new(&c.domain, &c.dir);
    config.boundary_point = c.point.clone();
    config.delta_grid = DeltaGrid { min: c.delta_min, max: c.delta_max, count: c.count };
    config.methods = parse_methods(&c.methods)?;
    config.seed = c.seed;
    config.validate()?;
    let report = scaling::sweep(&config)?;
    for d in &report.diagnostics {
        warn!("{d}");
    }
    match &c.out {
        Some(path) => scaling::write_report(&report, path)?,
        None => scaling::write_json(&report, std::io::stdout().lock())?,
    }
    for v in &report.violations {
        warn!("violation: {v}");
    }
    Ok(report.ok())
}

fn run_verify(c: &Common, delta: f64, samples: usize) -> Outcome {
    if !(delta > 0.0) || samples < 10 {
        return Err(Failure::Config("verify needs delta > 0 and at least 10 samples".into()));
    }
    let s = Setup::new(c)?;
    let mut candidates = vec![normal_candidate(&s.frame, delta)?];
    if let Direction::Tangential(t) = &s.direction {
        let opts = CandidateOptions { ray: RayOptions { initial_step: Some(delta), ..RayOptions::default() }, seed: c.seed, ..CandidateOptions::default() };
        candidates.push(tangential_candidate(&s.domain, &s.frame, t, delta, true, &opts)?);
        candidates.push(tangential_candidate(&s.domain, &s.frame, t, delta, false, &opts)?);
    }
    let probe = LeviProbe::standard(s.domain.dim(), &mut rng_for(c.seed, 2));
    let mut ok = true;
    let mut reports = Vec::new();
    for candidate in &candidates {
        let report = verify_candidate(candidate, &s.domain, samples, &probe, &mut rng_for(c.seed, 1))?;
        ok &= report.passed;
        reports.push(json!({ "candidate": to_value(&candidate.export()), "report": to_value(&report) }));
    }
    emit(&json!({ "domain": s.domain.name(), "delta": delta, "candidates": reports }), c.out.as_ref())?;
    Ok(ok)
}

fn run_bnw(c: &Common, m: usize, r: f64, samples: usize, grid: usize) -> Outcome {
    if m < 2 || !(r > 0.0) || samples == 0 || grid == 0 {
        return Err(Failure::Config("bnw needs m >= 2, r > 0, samples > 0 and grid > 0".into()));
    }
    let report = bnw_family(m, r, samples, grid, c.seed)?;
    emit(&to_value(&report), c.out.as_ref())?;
    Ok(report.all_positive && report.min_constant.is_finite())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Type(c) => run_type(c),
        Command::Radius(c) => run_radius(c),
        Command::Bounds { common, upper } => run_bounds(common, *upper),
        Command::Sweep(c) => run_sweep(c),
        Command::Verify { common, delta, samples } => run_verify(common, *delta, *samples),
        Command::Bnw { common, m, r, samples, grid } => run_bnw(common, *m, *r, *samples, *grid),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("cxmetric: invariant violated");
            ExitCode::from(1)
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("cxmetric: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("cxmetric: {msg}");
            ExitCode::from(2)
        }
    }
}

//! Delta sweeps: lower and upper bounds along `P_delta`, exponent fits,
//! sandwich constants and the CSV/JSON reports.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{self, Direction};
use crate::disc::{affine_disc_bound, recentered_disc_bound};
use crate::domain::{base_point, normalize_frame, BoundaryFrame, ComplexDirection, ConvexDomain};
use crate::error::{MetricError, Result};
use crate::line::{gradient_ratio, line_type, max_radius, LineTypeEstimate, RayOptions, DEFAULT_ORDER_CAP};
use crate::regression::{self, LinearFit};
use crate::sibony::{normal_candidate, sibony_lower_bound, tangential_candidate, CandidateOptions};

pub const SCHEMA_VERSION: &str = "v1";
pub const CSV_COLUMNS: [&str; 8] = ["delta", "lower", "upper", "oracle", "m_used", "theta_star", "R_xi", "grad_ratio"];
/// Relative slack of the ordering checks `lower <= oracle <= upper`.
pub const ORDER_SLACK: f64 = 1e-9;
pub const MIN_R2: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sibony,
    Disc,
    Recentered,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Sibony, Method::Disc, Method::Recentered, Method::Oracle];
}

impl FromStr for Method {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sibony" => Ok(Method::Sibony),
            "disc" => Ok(Method::Disc),
            "recentered" => Ok(Method::Recentered),
            "oracle" => Ok(Method::Oracle),
            other => Err(MetricError::ConfigInvalid(format!("unknown method {other:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Sibony => "sibony",
            Method::Disc => "disc",
            Method::Recentered => "recentered",
            Method::Oracle => "oracle",
        };
        f.write_str(s)
    }
}

pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let mut out: Vec<Method> = list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(MetricError::ConfigInvalid("no methods selected".into()));
    }
    Ok(out)
}

/// Log-spaced grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for DeltaGrid {
    fn default() -> Self {
        Self { min: 1e-4, max: 1e-1, count: 16 }
    }
}

impl DeltaGrid {
    pub fn values(&self) -> Vec<f64> {
        regression::log_spaced(self.min, self.max, self.count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub domain_id: String,
    pub boundary_point: String,
    pub direction: String,
    pub delta_grid: DeltaGrid,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub theta_samples: usize,
    pub recentered_budget: usize,
}

impl SweepConfig {
    pub fn new(domain_id: impl Into<String>, direction: impl Into<String>) -> Self {
        Self {
            domain_id: domain_id.into(),
            boundary_point: "north".into(),
            direction: direction.into(),
            delta_grid: DeltaGrid::default(),
            methods: Method::ALL.to_vec(),
            seed: 0,
            theta_samples: 256,
            recentered_budget: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.delta_grid;
        if !(g.min > 0.0 && g.min < g.max) || !g.max.is_finite() {
            return Err(MetricError::ConfigInvalid(format!("need 0 < delta-min < delta-max, got {} and {}", g.min, g.max)));
        }
        if g.count < 8 {
            return Err(MetricError::ConfigInvalid(format!("need at least 8 deltas, got {}", g.count)));
        }
        if self.methods.is_empty() {
            return Err(MetricError::ConfigInvalid("no methods selected".into()));
        }
        if self.theta_samples < 8 {
            return Err(MetricError::ConfigInvalid("need at least 8 angles".into()));
        }
        Ok(())
    }

    fn wants(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }

    fn ray(&self, delta: f64) -> RayOptions {
        RayOptions { theta_samples: self.theta_samples, initial_step: Some(delta), ..RayOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub delta: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub oracle: Option<f64>,
    pub m_used: usize,
    pub theta_star: Option<f64>,
    pub r_xi: Option<f64>,
    pub grad_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Lower,
    Upper,
    Oracle,
    Radius,
}

impl BoundRecord {
    pub fn get(&self, field: Field) -> Option<f64> {
        match field {
            Field::Lower => self.lower,
            Field::Upper => self.upper,
            Field::Oracle => self.oracle,
            Field::Radius => self.r_xi,
        }
    }

    /// Ordering violations `lower <= oracle <= upper`, with relative slack.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let le = |a: f64, b: f64| a <= b + ORDER_SLACK * a.abs().max(b.abs()).max(1.0);
        if let (Some(l), Some(u)) = (self.lower, self.upper) {
            if !le(l, u) {
                out.push(format!("delta {}: lower {l} exceeds upper {u}", self.delta));
            }
        }
        if let Some(o) = self.oracle {
            if let Some(l) = self.lower {
                if !le(l, o) {
                    out.push(format!("delta {}: lower {l} exceeds oracle {o}", self.delta));
                }
            }
            if let Some(u) = self.upper {
                if !le(o, u) {
                    out.push(format!("delta {}: oracle {o} exceeds upper {u}", self.delta));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub flagged: bool,
}

impl From<LinearFit> for ExponentFit {
    fn from(f: LinearFit) -> Self {
        Self { slope: f.slope, intercept: f.intercept, r2: f.r2, flagged: f.r2 < MIN_R2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub schema: String,
    pub config: SweepConfig,
    pub domain: String,
    pub direction_kind: String,
    pub records: Vec<BoundRecord>,
    pub exponent_lower: Option<ExponentFit>,
    pub exponent_upper: Option<ExponentFit>,
    pub sandwich: Option<Sandwich>,
    pub type_estimate: Option<LineTypeEstimate>,
    pub diagnostics: Vec<String>,
    pub violations: Vec<String>,
}

impl ScalingReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// Scaling exponent `1/m` used for the sandwich (`1` in the normal direction).
    pub fn m_used(&self) -> usize {
        self.records.first().map(|r| r.m_used).unwrap_or(1)
    }
}

/// OLS slope of `log value` against `log delta` over the records carrying
/// `field`.
pub fn fit_exponent(records: &[BoundRecord], field: Field) -> Result<LinearFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = records.iter().filter_map(|r| r.get(field).map(|v| (r.delta, v))).unzip();
    if y.iter().any(|v| !(*v > 0.0)) {
        return Err(MetricError::DegenerateFit("non-positive values".into()));
    }
    regression::log_log(&x, &y)
}

/// `c = min lower * delta^(1/m)`, `C = max upper * delta^(1/m)`.
pub fn sandwich_constants(records: &[BoundRecord], m: usize) -> Result<Sandwich> {
    if m == 0 {
        return Err(MetricError::ConfigInvalid("m must be positive".into()));
    }
    let e = 1.0 / m as f64;
    let c = records
        .iter()
        .filter_map(|r| r.lower.map(|l| l * r.delta.powf(e)))
        .fold(f64::INFINITY, f64::min);
    let big_c = records
        .iter()
        .filter_map(|r| r.upper.map(|u| u * r.delta.powf(e)))
        .fold(f64::NEG_INFINITY, f64::max);
    if !(c > 0.0 && c.is_finite()) || !big_c.is_finite() {
        return Err(MetricError::DegenerateFit("sandwich needs positive lower and finite upper bounds".into()));
    }
    Ok(Sandwich { c, big_c, ratio: big_c / c })
}

struct Setup {
    domain: ConvexDomain,
    frame: BoundaryFrame,
    direction: Direction,
    xi: ComplexDirection,
    m: usize,
    type_estimate: Option<LineTypeEstimate>,
}

fn setup(config: &SweepConfig) -> Result<Setup> {
    config.validate()?;
    let domain = corpus::load_domain(&config.domain_id)?;
    let p = corpus::resolve_point(&domain, &config.boundary_point)?;
    let frame = normalize_frame(&domain, &p)?;
    let direction = corpus::resolve_direction(&frame, &config.direction)?;
    let xi = direction.vector(&frame);
    let (m, type_estimate) = match &direction {
        Direction::Normal => (1, None),
        Direction::Tangential(t) => {
            let est = line_type(&domain, &frame.p, t, DEFAULT_ORDER_CAP)?;
            (est.m, Some(est))
        }
    };
    Ok(Setup { domain, frame, direction, xi, m, type_estimate })
}

fn record_at(config: &SweepConfig, s: &Setup, delta: f64, diagnostics: &mut Vec<String>) -> BoundRecord {
    let mut rec = BoundRecord {
        delta,
        lower: None,
        upper: None,
        oracle: None,
        m_used: s.m,
        theta_star: None,
        r_xi: None,
        grad_ratio: None,
    };
    let mut note = |what: &str, e: MetricError| diagnostics.push(format!("delta {delta}: {what} failed: {e}"));
    let p_delta = match base_point(&s.domain, &s.frame.p, &s.frame.nu, delta) {
        Ok(p) => p,
        Err(e) => {
            note("base point", e);
            return rec;
        }
    };
    let ray = config.ray(delta);

    if let Direction::Tangential(t) = &s.direction {
        match max_radius(&s.domain, &p_delta, t, &ray) {
            Ok(c) => {
                rec.theta_star = Some(c.theta_star);
                rec.r_xi = Some(c.radius);
                rec.grad_ratio = Some(gradient_ratio(&s.domain, &c, delta, s.m));
            }
            Err(e) => note("contact", e),
        }
    }

    if config.wants(Method::Sibony) {
        let lower = match &s.direction {
            Direction::Normal => normal_candidate(&s.frame, delta).and_then(|c| sibony_lower_bound(&c, &s.xi.xi)),
            Direction::Tangential(t) => {
                let opts = CandidateOptions { ray, seed: config.seed, ..CandidateOptions::default() };
                tangential_candidate(&s.domain, &s.frame, t, delta, true, &opts).and_then(|c| sibony_lower_bound(&c, &t.xi))
            }
        };
        match lower {
            Ok(v) => rec.lower = Some(v),
            Err(e) => note("sibony", e),
        }
    }

    let mut uppers = Vec::new();
    if config.wants(Method::Disc) {
        match affine_disc_bound(&s.domain, &p_delta, &s.xi, &ray) {
            Ok(b) => uppers.push(b.value),
            Err(e) => note("disc", e),
        }
    }
    if config.wants(Method::Recentered) {
        match recentered_disc_bound(&s.domain, &p_delta, &s.xi, &s.frame.nu, config.recentered_budget, &ray) {
            Ok(b) => uppers.push(b.value),
            Err(e) => note("recentered", e),
        }
    }
    rec.upper = uppers.into_iter().reduce(f64::min);

    if config.wants(Method::Oracle) {
        rec.oracle = s.domain.rho.exact_metric(&p_delta, &s.xi.xi);
    }
    rec
}

/// Runs the sweep. Per-delta failures become diagnostics; configuration and
/// setup failures are returned as errors.
pub fn sweep(config: &SweepConfig) -> Result<ScalingReport> {
    let s = setup(config)?;
    let deltas = config.delta_grid.values();
    let results: Vec<(BoundRecord, Vec<String>)> = deltas
        .par_iter()
        .map(|&delta| {
            let mut diag = Vec::new();
            let rec = record_at(config, &s, delta, &mut diag);
            (rec, diag)
        })
        .collect();
    let mut diagnostics = Vec::new();
    if let Some(est) = &s.type_estimate {
        diagnostics.extend(est.diagnostics.iter().cloned());
    }
    let mut records = Vec::with_capacity(results.len());
    for (rec, diag) in results {
        diagnostics.extend(diag);
        records.push(rec);
    }
    let violations: Vec<String> = records.iter().flat_map(|r| r.violations()).collect();

    let mut fit = |field: Field, label: &str| -> Option<ExponentFit> {
        if records.iter().all(|r| r.get(field).is_none()) {
            return None;
        }
        match fit_exponent(&records, field) {
            Ok(f) => {
                if f.r2 < MIN_R2 {
                    diagnostics.push(format!("{label} fit has R^2 = {:.6} below {MIN_R2}", f.r2));
                }
                Some(f.into())
            }
            Err(e) => {
                diagnostics.push(format!("{label} fit failed: {e}"));
                None
            }
        }
    };
    let exponent_lower = fit(Field::Lower, "lower");
    let exponent_upper = fit(Field::Upper, "upper");

    let sandwich = if records.iter().any(|r| r.lower.is_some()) && records.iter().any(|r| r.upper.is_some()) {
        match sandwich_constants(&records, s.m) {
            Ok(sw) => Some(sw),
            Err(e) => {
                diagnostics.push(format!("sandwich failed: {e}"));
                None
            }
        }
    } else {
        None
    };
    let ratios: Vec<f64> = records.iter().filter_map(|r| Some(r.upper? / r.lower?)).collect();
    if ratios.windows(3).any(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0 && (w[1] - w[0]).abs() > 1e-9 * w[1]) {
        diagnostics.push("upper/lower ratio is not monotone in delta; the grid may leave the asymptotic regime".into());
    }

    Ok(ScalingReport {
        schema: SCHEMA_VERSION.into(),
        config: config.clone(),
        domain: s.domain.name(),
        direction_kind: if s.direction.is_normal() { "normal".into() } else { "tangential".into() },
        records,
        exponent_lower,
        exponent_upper,
        sandwich,
        type_estimate: s.type_estimate,
        diagnostics,
        violations,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(report: &ScalingReport, out: W) -> Result<()> {
    let io = |e: csv::Error| MetricError::ConfigInvalid(format!("cannot write CSV: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in &report.records {
        w.write_record([
            r.delta.to_string(),
            cell(r.lower),
            cell(r.upper),
            cell(r.oracle),
            r.m_used.to_string(),
            cell(r.theta_star),
            cell(r.r_xi),
            cell(r.grad_ratio),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| MetricError::ConfigInvalid(format!("cannot write CSV: {e}")))?;
    Ok(())
}

pub fn write_json<W: Write>(report: &ScalingReport, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, report)
        .map_err(|e| MetricError::ConfigInvalid(format!("cannot write JSON: {e}")))?;
    writeln!(out).map_err(|e| MetricError::ConfigInvalid(format!("cannot write JSON: {e}")))?;
    Ok(())
}

/// Writes CSV or JSON according to the file extension.
pub fn write_report(report: &ScalingReport, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)
        .map_err(|e| MetricError::ConfigInvalid(format!("cannot create {}: {e}", path.display())))?;
    let file = std::io::BufWriter::new(file);
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => write_csv(report, file),
        Some("json") => write_json(report, file),
        _ => Err(MetricError::ConfigInvalid(format!("output {} must end in .csv or .json", path.display()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(delta: f64, lower: f64, upper: f64) -> BoundRecord {
        BoundRecord {
            delta,
            lower: Some(lower),
            upper: Some(upper),
            oracle: None,
            m_used: 2,
            theta_star: None,
            r_xi: None,
            grad_ratio: None,
        }
    }

    #[test]
    fn exponent_fits() {
        let rs: Vec<BoundRecord> = [1e-3, 1e-2, 1e-1].iter().map(|&d| rec(d, d, 3.0 * d.sqrt())).collect();
        let f = fit_exponent(&rs, Field::Lower).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        let f = fit_exponent(&rs, Field::Upper).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!(matches!(fit_exponent(&rs[..1], Field::Lower), Err(MetricError::DegenerateFit(_))));
    }

    #[test]
    fn sandwich_of_a_single_record() {
        let s = sandwich_constants(&[rec(0.01, 5.0, 10.0)], 2).unwrap();
        assert!(s.big_c >= s.c && (s.ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn methods_parse() {
        assert_eq!(parse_methods("oracle,disc,disc").unwrap(), vec![Method::Disc, Method::Oracle]);
        assert!(parse_methods("magic").is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = SweepConfig::new("ball:2", "normal");
        c.delta_grid.count = 4;
        assert!(c.validate().is_err());
        c.delta_grid = DeltaGrid { min: 1e-2, max: 1e-3, count: 16 };
        assert!(c.validate().is_err());
    }

    #[test]
    fn ball_normal_sweep() {
        let r = sweep(&SweepConfig::new("ball:2", "normal")).unwrap();
        assert!(r.ok(), "{:?}", r.violations);
        let lo = r.exponent_lower.unwrap();
        assert!((lo.slope + 1.0).abs() < 1e-6);
        for rec in &r.records {
            assert!((rec.lower.unwrap() * 6.0 * rec.delta - 1.0).abs() < 1e-10);
            assert_eq!(rec.m_used, 1);
        }
        let sw = r.sandwich.unwrap();
        assert!((sw.c - 1.0 / 6.0).abs() < 1e-10 && sw.big_c <= 1.01);
    }

    #[test]
    fn ball_tangential_sweep() {
        let r = sweep(&SweepConfig::new("ball:2", "tangent:1")).unwrap();
        assert!(r.ok(), "{:?}", r.violations);
        let up = r.exponent_upper.unwrap();
        assert!((up.slope + 0.5).abs() < 0.02, "{up:?}");
        assert_eq!(r.m_used(), 2);
        let mut buf = Vec::new();
        write_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("delta,lower,upper,oracle,m_used,theta_star,R_xi,grad_ratio\n"));
        assert_eq!(text.lines().count(), 17);
    }
}

//! Geometry of complex lines through interior points: boundary radii, the
//! farthest contact point, line type and the gradient law at the contact.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cvec::{self, CVector, C64};
use crate::domain::{outward_normal, BoundaryFrame, ComplexDirection, ConvexDomain};
use crate::error::{MetricError, Result};
use crate::regression::{self, LinearFit};

/// Relative threshold separating vanishing Taylor coefficients from real ones.
pub const TYPE_TOL: f64 = 1e-7;
pub const DEFAULT_ORDER_CAP: usize = 8;
pub const MAX_ORDER_CAP: usize = 12;
/// Radii of the trigonometric-moment circles, before any noise-driven rescaling.
pub const MOMENT_RADII: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

const GOLDEN_ITERS: usize = 60;
/// Signal level (relative to `|rho|` scale 1) below which circle moments are
/// considered roundoff.
const MOMENT_NOISE_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayOptions {
    pub theta_samples: usize,
    pub bracket_tol: f64,
    /// First step of the doubling bracket; estimated from `rho` when `None`.
    pub initial_step: Option<f64>,
}

impl Default for RayOptions {
    fn default() -> Self {
        Self { theta_samples: 256, bracket_tol: 1e-12, initial_step: None }
    }
}

/// Inputs of a radius probe at `P_delta = P - delta nu` along `xi`.
#[derive(Debug, Clone)]
pub struct RadialProbe {
    pub frame: BoundaryFrame,
    pub xi: ComplexDirection,
    pub delta: f64,
    pub theta_samples: usize,
    pub bracket_tol: f64,
}

impl RadialProbe {
    pub fn new(frame: BoundaryFrame, xi: ComplexDirection, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(MetricError::ConfigInvalid(format!("delta must be positive, got {delta}")));
        }
        if !xi.is_unit() {
            return Err(MetricError::ConfigInvalid("probe direction must be a unit vector".into()));
        }
        Ok(Self { frame, xi, delta, theta_samples: 256, bracket_tol: 1e-12 })
    }

    pub fn options(&self) -> Result<RayOptions> {
        if self.theta_samples < 8 || !(self.bracket_tol > 0.0) {
            return Err(MetricError::ConfigInvalid("probe needs >= 8 angles and a positive tolerance".into()));
        }
        Ok(RayOptions {
            theta_samples: self.theta_samples,
            bracket_tol: self.bracket_tol,
            initial_step: Some(self.delta),
        })
    }

    pub fn base_point(&self) -> CVector {
        &self.frame.p - &self.frame.nu.xi * C64::new(self.delta, 0.0)
    }

    pub fn contact(&self, domain: &ConvexDomain) -> Result<ContactPoint> {
        max_radius(domain, &self.base_point(), &self.xi, &self.options()?)
    }
}

/// Where the disc of radius `radius` around `P_delta` in direction
/// `line_direction = e^{i theta_star} xi` touches the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactPoint {
    pub q: CVector,
    pub radius: f64,
    pub theta_star: f64,
    pub center: CVector,
    pub line_direction: CVector,
}

/// Distance along `from + t dir` (`t > 0`) to the boundary, by a doubling
/// bracket and bisection to absolute tolerance `tol`.
pub fn ray_crossing(domain: &ConvexDomain, from: &CVector, dir: &CVector, tol: f64) -> Result<f64> {
    ray_crossing_from(domain, from, dir, tol, None)
}

fn ray_crossing_from(
    domain: &ConvexDomain,
    from: &CVector,
    dir: &CVector,
    tol: f64,
    initial_step: Option<f64>,
) -> Result<f64> {
    let rho0 = domain.evaluate(from);
    if rho0 >= 0.0 {
        return Err(MetricError::CenterOutside { rho: rho0 });
    }
    let dn = cvec::norm(dir);
    let reach = 2.0 * domain.bounding_box.diameter() / dn;
    let first = initial_step.unwrap_or_else(|| {
        let g = cvec::norm(&domain.gradient(from));
        if g > 0.0 { -rho0 / (2.0 * g * dn) } else { 1e-3 * reach }
    });
    let mut lo = 0.0;
    let mut hi = first.clamp(1e-15 * reach, reach);
    let at = |t: f64| domain.evaluate(&(from + dir * C64::new(t, 0.0)));
    while at(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 2.0 * reach {
            return Err(MetricError::RayUnbounded);
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if at(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Boundary radius along the ray `center + t e^{i theta} xi`.
pub fn boundary_radius(
    domain: &ConvexDomain,
    center: &CVector,
    xi: &ComplexDirection,
    theta: f64,
    opts: &RayOptions,
) -> Result<f64> {
    let dir = &xi.xi * C64::from_polar(1.0, theta);
    ray_crossing_from(domain, center, &dir, opts.bracket_tol, opts.initial_step)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Extremum {
    Max,
    Min,
}

fn extremal_radius(
    domain: &ConvexDomain,
    center: &CVector,
    xi: &ComplexDirection,
    opts: &RayOptions,
    kind: Extremum,
) -> Result<ContactPoint> {
    let k = opts.theta_samples.max(8);
    let radii: Vec<f64> = (0..k)
        .into_par_iter()
        .map(|i| boundary_radius(domain, center, xi, TAU * i as f64 / k as f64, opts))
        .collect::<Result<_>>()?;
    let better = |a: f64, b: f64| match kind {
        Extremum::Max => a > b,
        Extremum::Min => a < b,
    };
    let mut best = 0;
    for i in 1..k {
        if better(radii[i], radii[best]) {
            best = i;
        }
    }
    let step = TAU / k as f64;
    let mut theta_best = step * best as f64;
    let mut r_best = radii[best];

    // golden-section polish on the bracket around the grid extremum
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (theta_best - step, theta_best + step);
    let eval = |t: f64| boundary_radius(domain, center, xi, t, opts);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    for _ in 0..GOLDEN_ITERS {
        if better(fc, fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = eval(d)?;
        }
    }
    let (t_ref, r_ref) = if better(fc, fd) { (c, fc) } else { (d, fd) };
    if better(r_ref, r_best) {
        theta_best = t_ref.rem_euclid(TAU);
        r_best = r_ref;
    }
    let line_direction = &xi.xi * C64::from_polar(1.0, theta_best);
    let q = center + &line_direction * C64::new(r_best, 0.0);
    Ok(ContactPoint { q, radius: r_best, theta_star: theta_best, center: center.clone(), line_direction })
}

/// Farthest boundary point on the complex line `P_delta + C xi`: the radius
/// `R_xi(delta)` and its contact point `Q`.
pub fn max_radius(domain: &ConvexDomain, p_delta: &CVector, xi: &ComplexDirection, opts: &RayOptions) -> Result<ContactPoint> {
    extremal_radius(domain, p_delta, xi, opts, Extremum::Max)
}

/// Nearest boundary point on the complex line: the radius of the largest
/// round disc centered at `P_delta` in that line.
pub fn inscribed_radius(domain: &ConvexDomain, p_delta: &CVector, xi: &ComplexDirection, opts: &RayOptions) -> Result<ContactPoint> {
    extremal_radius(domain, p_delta, xi, opts, Extremum::Min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeMethod {
    Taylor,
    Regression,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineTypeEstimate {
    pub m: usize,
    pub method: TypeMethod,
    /// Magnitude of the order-`k` homogeneous part of `zeta -> rho(P + zeta xi)`;
    /// `None` where the numeric path does not resolve the order.
    pub coefficient_table: Vec<Option<f64>>,
    pub fit_r2: Option<f64>,
    /// Whether the exact polynomial expansion was used.
    pub exact: bool,
    pub diagnostics: Vec<String>,
}

/// Vanishing order of `rho` restricted to the complex line `P + C xi`.
pub fn line_type(domain: &ConvexDomain, p: &CVector, xi: &ComplexDirection, order_cap: usize) -> Result<LineTypeEstimate> {
    check_cap(order_cap)?;
    match domain.rho.line_restriction(p, &xi.xi) {
        Some(poly) => {
            let table: Vec<f64> = (0..=order_cap).map(|k| poly.order_magnitude(k)).collect();
            // orders beyond the cap still set the scale
            let scale = (1..=poly.max_order()).map(|k| poly.order_magnitude(k)).fold(0.0f64, f64::max);
            let threshold = TYPE_TOL * scale.max(1.0);
            let m = (1..=order_cap)
                .find(|&k| table[k] > threshold)
                .ok_or(MetricError::TypeExceedsCap { cap: order_cap })?;
            Ok(finish(LineTypeEstimate {
                m,
                method: TypeMethod::Taylor,
                coefficient_table: table.into_iter().map(Some).collect(),
                fit_r2: None,
                exact: true,
                diagnostics: Vec::new(),
            }))
        }
        None => line_type_moments(domain, p, xi, order_cap),
    }
}

/// Numeric line type from trigonometric moments of `rho` on small circles in
/// the complex line, with a Richardson-corrected order estimate.
pub fn line_type_moments(
    domain: &ConvexDomain,
    p: &CVector,
    xi: &ComplexDirection,
    order_cap: usize,
) -> Result<LineTypeEstimate> {
    check_cap(order_cap)?;
    let points = 4 * order_cap;
    let g0 = domain.evaluate(p);
    let rms = |h: f64| -> f64 {
        let mut acc = 0.0;
        for k in 0..points {
            let zeta = C64::from_polar(h, TAU * k as f64 / points as f64);
            let v = domain.evaluate(&(p + &xi.xi * zeta)) - g0;
            acc += v * v;
        }
        (acc / points as f64).sqrt()
    };
    let mut diagnostics = Vec::new();
    let mut scale = 1.0;
    let mut amps;
    loop {
        let radii = MOMENT_RADII.map(|h| h * scale);
        amps = radii.map(rms);
        if amps[2] > MOMENT_NOISE_FLOOR || radii[0] >= 0.16 {
            if scale > 1.0 {
                diagnostics.push(format!("moment radii scaled by {scale} to clear roundoff"));
            }
            break;
        }
        scale *= 4.0;
    }
    if !(amps[2] > MOMENT_NOISE_FLOOR) {
        return Err(MetricError::TypeExceedsCap { cap: order_cap });
    }
    let e1 = (amps[0] / amps[1]).log2();
    let e2 = (amps[1] / amps[2]).log2();
    let order = 2.0 * e2 - e1;
    if (e1 - e2).abs() > 0.5 {
        diagnostics.push(format!("order estimates disagree across radii: {e1:.3} vs {e2:.3}"));
    }
    let m = order.round();
    if m < 1.0 || m > order_cap as f64 {
        return Err(MetricError::TypeExceedsCap { cap: order_cap });
    }
    let m = m as usize;
    let h3 = MOMENT_RADII[2] * scale;
    let mut table = vec![None; order_cap + 1];
    table[0] = Some(g0.abs());
    table[m] = Some(amps[2] / h3.powi(m as i32));
    Ok(finish(LineTypeEstimate {
        m,
        method: TypeMethod::Taylor,
        coefficient_table: table,
        fit_r2: None,
        exact: false,
        diagnostics,
    }))
}

fn check_cap(order_cap: usize) -> Result<()> {
    if order_cap == 0 || order_cap > MAX_ORDER_CAP {
        return Err(MetricError::ConfigInvalid(format!("order cap must be in 1..={MAX_ORDER_CAP}")));
    }
    Ok(())
}

fn finish(mut est: LineTypeEstimate) -> LineTypeEstimate {
    if est.m % 2 == 1 && est.m > 1 {
        est.diagnostics.push(format!(
            "odd leading tangential order {} is impossible on a convex domain",
            est.m
        ));
    }
    est
}

/// Which radius a scaling probe records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusMode {
    /// `R_xi(delta)`: farthest boundary point in the complex line.
    Supremum,
    /// Largest round disc: nearest boundary point in the complex line.
    Inscribed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusScaling {
    pub fit: LinearFit,
    pub mode: RadiusMode,
    pub deltas: Vec<f64>,
    pub radii: Vec<f64>,
    pub monotone: bool,
}

/// Slope of `log R` against `log delta`. Complex-tangential directions use
/// `R_xi(delta)`; directions with a normal component use the inscribed radius,
/// which is linear in `delta` along `nu`.
pub fn radius_scaling_exponent(
    domain: &ConvexDomain,
    p: &CVector,
    xi: &ComplexDirection,
    delta_grid: &[f64],
    opts: &RayOptions,
) -> Result<RadiusScaling> {
    if delta_grid.len() < 8 {
        return Err(MetricError::ConfigInvalid("radius scaling needs at least 8 deltas".into()));
    }
    let nu = outward_normal(domain, p)?;
    let xi = xi.normalized()?;
    let tangential = cvec::hermitian(&xi.xi, &nu.xi).norm() < 1e-8;
    let mode = if tangential { RadiusMode::Supremum } else { RadiusMode::Inscribed };
    let radii: Vec<f64> = delta_grid
        .par_iter()
        .map(|&delta| {
            let center = crate::domain::base_point(domain, p, &nu, delta)?;
            let o = RayOptions { initial_step: Some(delta), ..*opts };
            let c = match mode {
                RadiusMode::Supremum => max_radius(domain, &center, &xi, &o)?,
                RadiusMode::Inscribed => inscribed_radius(domain, &center, &xi, &o)?,
            };
            Ok(c.radius)
        })
        .collect::<Result<_>>()?;
    let fit = regression::log_log(delta_grid, &radii)?;
    let mut order: Vec<(f64, f64)> = delta_grid.iter().copied().zip(radii.iter().copied()).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = order.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12);
    Ok(RadiusScaling { fit, mode, deltas: delta_grid.to_vec(), radii, monotone })
}

/// Line type from the radius law, `m = round(1 / slope)`.
pub fn line_type_by_regression(scaling: &RadiusScaling) -> Result<LineTypeEstimate> {
    let s = scaling.fit.slope;
    if !(s > 0.0) {
        return Err(MetricError::DegenerateFit(format!("non-positive radius slope {s}")));
    }
    let m = (1.0 / s).round().max(1.0) as usize;
    Ok(finish(LineTypeEstimate {
        m,
        method: TypeMethod::Regression,
        coefficient_table: Vec::new(),
        fit_r2: Some(scaling.fit.r2),
        exact: false,
        diagnostics: Vec::new(),
    }))
}

/// `|d rho(Q) . e^{i theta*} xi| * delta^(1/m - 1)`, bounded above and below
/// as `delta -> 0`.
pub fn gradient_ratio(domain: &ConvexDomain, contact: &ContactPoint, delta: f64, m: usize) -> f64 {
    let g = domain.gradient(&contact.q);
    let along = cvec::pairing(&g, &contact.line_direction).norm() / cvec::norm(&contact.line_direction);
    along * delta.powf(1.0 / m as f64 - 1.0)
}

//! Convex domains `{rho < 0}` in `C^n`, boundary normals and normalized frames.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cvec::{self, CMatrix, CVector, C64};
use crate::disc::ball_metric_oracle;
use crate::error::{MetricError, Result};
use crate::polynomial::{BiPoly, Polynomial, Term};

/// Boundary points must satisfy `|rho(P)| <= BOUNDARY_TOL` before snapping.
pub const BOUNDARY_TOL: f64 = 1e-8;
/// Real gradients below this norm are treated as vanishing.
pub const GRADIENT_FLOOR: f64 = 1e-10;
/// Hermitian projections shorter than this are reported as zero.
pub const PROJECTION_FLOOR: f64 = 1e-12;

/// Axis-aligned box in the interleaved real coordinates `(x_1, y_1, ..., x_n, y_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub intervals: Vec<[f64; 2]>,
}

impl BoundingBox {
    pub fn centered(center: &CVector, half_widths: &[f64]) -> Self {
        let intervals = center
            .iter()
            .zip(half_widths)
            .flat_map(|(c, &h)| [[c.re - h, c.re + h], [c.im - h, c.im + h]])
            .collect();
        Self { intervals }
    }

    pub fn center(&self) -> CVector {
        let mid: Vec<f64> = self.intervals.iter().map(|[a, b]| 0.5 * (a + b)).collect();
        cvec::from_real(&mid)
    }

    /// Length of the box diagonal.
    pub fn diameter(&self) -> f64 {
        self.intervals.iter().map(|[a, b]| (b - a) * (b - a)).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let intervals = self
            .intervals
            .iter()
            .map(|[a, b]| {
                let mid = 0.5 * (a + b);
                let half = 0.5 * (b - a) * factor;
                [mid - half, mid + half]
            })
            .collect();
        Self { intervals }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CVector {
        let x: Vec<f64> = self.intervals.iter().map(|[a, b]| rng.random_range(*a..*b)).collect();
        cvec::from_real(&x)
    }

    /// Centers of the `2 * 2n` faces.
    pub fn face_centers(&self) -> Vec<CVector> {
        let mid: Vec<f64> = self.intervals.iter().map(|[a, b]| 0.5 * (a + b)).collect();
        let mut out = Vec::with_capacity(2 * mid.len());
        for (k, [a, b]) in self.intervals.iter().enumerate() {
            for v in [*a, *b] {
                let mut x = mid.clone();
                x[k] = v;
                out.push(cvec::from_real(&x));
            }
        }
        out
    }
}

/// A defining function `rho` with `Omega = {rho < 0}`.
pub trait DefiningFunction: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn name(&self) -> String;

    fn value(&self, z: &CVector) -> f64;

    /// Wirtinger derivatives `d rho / d z_j`. Defaults to central differences.
    fn wirtinger_grad(&self, z: &CVector) -> CVector {
        fd_wirtinger_grad(|w| self.value(w), z)
    }

    fn bounding_box(&self) -> BoundingBox;

    /// Exact expansion of `zeta -> rho(p + zeta xi)` when `rho` is polynomial.
    fn line_restriction(&self, _p: &CVector, _xi: &CVector) -> Option<BiPoly> {
        None
    }

    /// Closed-form value of the invariant metric, when one is known.
    fn exact_metric(&self, _z: &CVector, _xi: &CVector) -> Option<f64> {
        None
    }

    /// Whether [`DefiningFunction::wirtinger_grad`] is analytic rather than
    /// finite-differenced.
    fn has_analytic_gradient(&self) -> bool {
        false
    }
}

/// Central-difference Wirtinger gradient, `d/dz = (d/dx - i d/dy) / 2`, with
/// step `1e-5 * (1 + |z|)`.
pub fn fd_wirtinger_grad<F: Fn(&CVector) -> f64>(f: F, z: &CVector) -> CVector {
    let h = 1e-5 * (1.0 + cvec::norm(z));
    let n = z.len();
    let mut g = CVector::zeros(n);
    let mut w = z.clone();
    for j in 0..n {
        let orig = w[j];
        w[j] = orig + C64::new(h, 0.0);
        let fxp = f(&w);
        w[j] = orig - C64::new(h, 0.0);
        let fxm = f(&w);
        w[j] = orig + C64::new(0.0, h);
        let fyp = f(&w);
        w[j] = orig - C64::new(0.0, h);
        let fym = f(&w);
        w[j] = orig;
        let dx = (fxp - fxm) / (2.0 * h);
        let dy = (fyp - fym) / (2.0 * h);
        g[j] = C64::new(0.5 * dx, -0.5 * dy);
    }
    g
}

/// Ball `|z|^2 - r^2` centered at the origin.
#[derive(Debug, Clone)]
pub struct Ball {
    n: usize,
    radius: f64,
    poly: Polynomial,
}

impl Ball {
    pub fn new(n: usize, radius: f64) -> Result<Self> {
        if n == 0 || !(radius > 0.0) {
            return Err(MetricError::ConfigInvalid(format!("invalid ball: n={n}, r={radius}")));
        }
        let mut terms: Vec<Term> = (0..n)
            .map(|j| {
                let mut powers = vec![[0, 0]; n];
                powers[j] = [1, 1];
                Term { coeff: 1.0, powers }
            })
            .collect();
        terms.push(Term { coeff: -radius * radius, powers: vec![] });
        Ok(Self { n, radius, poly: Polynomial::new(n, terms)? })
    }

    pub fn unit(n: usize) -> Self {
        Self::new(n, 1.0).expect("unit ball")
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl DefiningFunction for Ball {
    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> String {
        if self.radius == 1.0 {
            format!("ball:{}", self.n)
        } else {
            format!("ball:{}:r={}", self.n, self.radius)
        }
    }

    fn value(&self, z: &CVector) -> f64 {
        z.iter().map(|c| c.norm_sqr()).sum::<f64>() - self.radius * self.radius
    }

    fn wirtinger_grad(&self, z: &CVector) -> CVector {
        z.map(|c| c.conj())
    }

    fn bounding_box(&self) -> BoundingBox {
        BoundingBox::centered(&CVector::zeros(self.n), &vec![self.radius; self.n])
    }

    fn line_restriction(&self, p: &CVector, xi: &CVector) -> Option<BiPoly> {
        Some(self.poly.restrict_to_line(p, xi))
    }

    fn exact_metric(&self, z: &CVector, xi: &CVector) -> Option<f64> {
        let r = C64::new(self.radius, 0.0);
        ball_metric_oracle(&(z / r), &(xi / r)).ok()
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }
}

/// Complex ellipsoid `sum_j |z_j|^(2 m_j) - 1`.
#[derive(Debug, Clone)]
pub struct ComplexEllipsoid {
    exponents: Vec<u32>,
    poly: Polynomial,
}

impl ComplexEllipsoid {
    pub fn new(exponents: Vec<u32>) -> Result<Self> {
        if exponents.is_empty() || exponents.contains(&0) {
            return Err(MetricError::ConfigInvalid(format!(
                "ellipsoid exponents must be positive: {exponents:?}"
            )));
        }
        let n = exponents.len();
        let mut terms: Vec<Term> = exponents
            .iter()
            .enumerate()
            .map(|(j, &m)| {
                let mut powers = vec![[0, 0]; n];
                powers[j] = [m, m];
                Term { coeff: 1.0, powers }
            })
            .collect();
        terms.push(Term { coeff: -1.0, powers: vec![] });
        let poly = Polynomial::new(n, terms)?;
        Ok(Self { exponents, poly })
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }
}

impl DefiningFunction for ComplexEllipsoid {
    fn dim(&self) -> usize {
        self.exponents.len()
    }

    fn name(&self) -> String {
        let parts: Vec<String> = self.exponents.iter().map(|m| m.to_string()).collect();
        format!("cxellipsoid:{}", parts.join(","))
    }

    fn value(&self, z: &CVector) -> f64 {
        z.iter()
            .zip(&self.exponents)
            .map(|(c, &m)| c.norm_sqr().powi(m as i32))
            .sum::<f64>()
            - 1.0
    }

    fn wirtinger_grad(&self, z: &CVector) -> CVector {
        CVector::from_iterator(
            z.len(),
            z.iter().zip(&self.exponents).map(|(c, &m)| {
                c.conj() * (m as f64 * c.norm_sqr().powi(m as i32 - 1))
            }),
        )
    }

    fn bounding_box(&self) -> BoundingBox {
        BoundingBox::centered(&CVector::zeros(self.dim()), &vec![1.0; self.dim()])
    }

    fn line_restriction(&self, p: &CVector, xi: &CVector) -> Option<BiPoly> {
        Some(self.poly.restrict_to_line(p, xi))
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }
}

/// Domain given by a user polynomial; the bounding box is supplied or found by
/// probing coordinate rays from the origin.
#[derive(Debug, Clone)]
pub struct PolynomialDomain {
    name: String,
    poly: Polynomial,
    bbox: BoundingBox,
}

impl PolynomialDomain {
    pub fn new(name: impl Into<String>, poly: Polynomial, bbox: BoundingBox) -> Self {
        Self { name: name.into(), poly, bbox }
    }

    /// Bounding box estimated by scanning directions in each coordinate plane
    /// from the origin (which must be interior), with 10% padding.
    pub fn with_probed_box(name: impl Into<String>, poly: Polynomial) -> Result<Self> {
        let n = poly.dim();
        let origin = CVector::zeros(n);
        let v0 = poly.eval(&origin);
        if v0 >= 0.0 {
            return Err(MetricError::ConfigInvalid(
                "origin must lie inside a polynomial domain without an explicit box".into(),
            ));
        }
        let mut half = vec![0.0f64; n];
        for (j, h) in half.iter_mut().enumerate() {
            for k in 0..64 {
                let phase = C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 64.0);
                let dir = cvec::basis(n, j) * phase;
                let mut t = 1e-3;
                while poly.eval(&(&dir * C64::new(t, 0.0))) < 0.0 {
                    t *= 2.0;
                    if t > 1e6 {
                        return Err(MetricError::ConfigInvalid("polynomial domain is unbounded".into()));
                    }
                }
                *h = h.max(t);
            }
        }
        let bbox = BoundingBox::centered(&origin, &half.iter().map(|h| 1.1 * h).collect::<Vec<_>>());
        Ok(Self { name: name.into(), poly, bbox })
    }
}

impl DefiningFunction for PolynomialDomain {
    fn dim(&self) -> usize {
        self.poly.dim()
    }

    fn name(&self) -> String {
        self.name.clone()
    }

    fn value(&self, z: &CVector) -> f64 {
        self.poly.eval(z)
    }

    fn wirtinger_grad(&self, z: &CVector) -> CVector {
        self.poly.wirtinger_grad(z)
    }

    fn bounding_box(&self) -> BoundingBox {
        self.bbox.clone()
    }

    fn line_restriction(&self, p: &CVector, xi: &CVector) -> Option<BiPoly> {
        Some(self.poly.restrict_to_line(p, xi))
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }
}

/// `rho(z) = inner(z - offset)`.
#[derive(Debug, Clone)]
pub struct Shifted {
    inner: Arc<dyn DefiningFunction>,
    offset: CVector,
}

impl Shifted {
    pub fn new(inner: Arc<dyn DefiningFunction>, offset: CVector) -> Result<Self> {
        if offset.len() != inner.dim() {
            return Err(MetricError::DimensionMismatch { expected: inner.dim(), got: offset.len() });
        }
        Ok(Self { inner, offset })
    }
}

impl DefiningFunction for Shifted {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn name(&self) -> String {
        let parts: Vec<String> = cvec::to_real(&self.offset).iter().map(|x| x.to_string()).collect();
        format!("shifted:{}:{}", self.inner.name(), parts.join(","))
    }

    fn value(&self, z: &CVector) -> f64 {
        self.inner.value(&(z - &self.offset))
    }

    fn wirtinger_grad(&self, z: &CVector) -> CVector {
        self.inner.wirtinger_grad(&(z - &self.offset))
    }

    fn bounding_box(&self) -> BoundingBox {
        let mut b = self.inner.bounding_box();
        let shift = cvec::to_real(&self.offset);
        for (iv, s) in b.intervals.iter_mut().zip(shift) {
            iv[0] += s;
            iv[1] += s;
        }
        b
    }

    fn line_restriction(&self, p: &CVector, xi: &CVector) -> Option<BiPoly> {
        self.inner.line_restriction(&(p - &self.offset), xi)
    }

    fn exact_metric(&self, z: &CVector, xi: &CVector) -> Option<f64> {
        self.inner.exact_metric(&(z - &self.offset), xi)
    }

    fn has_analytic_gradient(&self) -> bool {
        self.inner.has_analytic_gradient()
    }
}

/// Image `U Omega` of a domain under a unitary map: `rho(z) = inner(U^* z)`.
#[derive(Debug, Clone)]
pub struct Rotated {
    inner: Arc<dyn DefiningFunction>,
    unitary: CMatrix,
    adjoint: CMatrix,
    label: String,
}

impl Rotated {
    pub fn new(inner: Arc<dyn DefiningFunction>, unitary: CMatrix, label: impl Into<String>) -> Result<Self> {
        let n = inner.dim();
        if unitary.nrows() != n || unitary.ncols() != n {
            return Err(MetricError::DimensionMismatch { expected: n, got: unitary.nrows() });
        }
        if cvec::unitarity_defect(&unitary) > 1e-10 {
            return Err(MetricError::ConfigInvalid("rotation matrix is not unitary".into()));
        }
        let adjoint = unitary.adjoint();
        Ok(Self { inner, unitary, adjoint, label: label.into() })
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }
}

impl DefiningFunction for Rotated {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn name(&self) -> String {
        format!("rotated:{}:{}", self.inner.name(), self.label)
    }

    fn value(&self, z: &CVector) -> f64 {
        self.inner.value(&(&self.adjoint * z))
    }

    fn wirtinger_grad(&self, z: &CVector) -> CVector {
        // d/dz_j = sum_k (U^*)_{kj} d/dw_k, i.e. conj(U) applied to the inner gradient
        let gw = self.inner.wirtinger_grad(&(&self.adjoint * z));
        self.unitary.map(|c| c.conj()) * gw
    }

    fn bounding_box(&self) -> BoundingBox {
        let b = self.inner.bounding_box();
        let c = b.center();
        let half_diag = 0.5 * b.diameter();
        BoundingBox::centered(&(&self.unitary * c), &vec![half_diag; self.dim()])
    }

    fn line_restriction(&self, p: &CVector, xi: &CVector) -> Option<BiPoly> {
        self.inner.line_restriction(&(&self.adjoint * p), &(&self.adjoint * xi))
    }

    fn exact_metric(&self, z: &CVector, xi: &CVector) -> Option<f64> {
        self.inner.exact_metric(&(&self.adjoint * z), &(&self.adjoint * xi))
    }

    fn has_analytic_gradient(&self) -> bool {
        self.inner.has_analytic_gradient()
    }
}

type RhoFn = dyn Fn(&CVector) -> f64 + Send + Sync;

/// A defining function given as a closure; gradients by finite differences.
#[derive(Clone)]
pub struct FnDomain {
    name: String,
    n: usize,
    rho: Arc<RhoFn>,
    bbox: BoundingBox,
}

impl FnDomain {
    pub fn new<F>(name: impl Into<String>, n: usize, bbox: BoundingBox, rho: F) -> Self
    where
        F: Fn(&CVector) -> f64 + Send + Sync + 'static,
    {
        Self { name: name.into(), n, rho: Arc::new(rho), bbox }
    }
}

impl fmt::Debug for FnDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnDomain").field("name", &self.name).field("n", &self.n).finish()
    }
}

impl DefiningFunction for FnDomain {
    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> String {
        self.name.clone()
    }

    fn value(&self, z: &CVector) -> f64 {
        (self.rho)(z)
    }

    fn bounding_box(&self) -> BoundingBox {
        self.bbox.clone()
    }
}

/// Default sample counts used by the sampled verifications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBudget {
    pub convexity_pairs: usize,
    pub interior: usize,
}

impl Default for SampleBudget {
    fn default() -> Self {
        Self { convexity_pairs: 10_000, interior: 10_000 }
    }
}

#[derive(Debug, Clone)]
pub struct ConvexDomain {
    pub rho: Arc<dyn DefiningFunction>,
    pub bounding_box: BoundingBox,
    pub sample_budget: SampleBudget,
}

/// Outcome of the sampled midpoint-convexity test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub pairs: usize,
    pub violations: usize,
    pub worst_midpoint_value: f64,
}

impl ConvexDomain {
    pub fn new(rho: Arc<dyn DefiningFunction>) -> Self {
        let bounding_box = rho.bounding_box();
        Self { rho, bounding_box, sample_budget: SampleBudget::default() }
    }

    pub fn from_fn<D: DefiningFunction + 'static>(rho: D) -> Self {
        Self::new(Arc::new(rho))
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn name(&self) -> String {
        self.rho.name()
    }

    pub fn evaluate(&self, z: &CVector) -> f64 {
        self.rho.value(z)
    }

    pub fn contains(&self, z: &CVector) -> bool {
        self.rho.value(z) < 0.0
    }

    pub fn gradient(&self, z: &CVector) -> CVector {
        self.rho.wirtinger_grad(z)
    }

    /// Midpoint convexity on random pairs of interior points: counts pairs
    /// with `rho((z + w) / 2) >= 1e-12`.
    pub fn check_midpoint_convexity<R: Rng + ?Sized>(&self, pairs: usize, rng: &mut R) -> ConvexityReport {
        let pts = crate::sampling::sample_interior(self, 2 * pairs, rng);
        let mut violations = 0;
        let mut worst = f64::NEG_INFINITY;
        for pair in pts.chunks_exact(2) {
            let mid = (&pair[0] + &pair[1]) * C64::new(0.5, 0.0);
            let v = self.evaluate(&mid);
            worst = worst.max(v);
            if v >= 1e-12 {
                violations += 1;
            }
        }
        ConvexityReport { pairs: pts.len() / 2, violations, worst_midpoint_value: worst }
    }

    /// `rho > 0` at every face center of the bounding box scaled by 2.
    pub fn check_bounded(&self) -> bool {
        self.bounding_box.scaled(2.0).face_centers().iter().all(|z| self.evaluate(z) > 0.0)
    }

    /// Single Newton correction along the outward normal so that `rho(P) = 0`.
    pub fn snap_to_boundary(&self, p: &CVector) -> Result<CVector> {
        let rho = self.evaluate(p);
        if rho.abs() > BOUNDARY_TOL {
            return Err(MetricError::NotOnBoundary { rho });
        }
        let g = self.gradient(p);
        let gn = cvec::norm(&g);
        if 2.0 * gn < GRADIENT_FLOOR {
            return Err(MetricError::GradientVanishes { norm: 2.0 * gn });
        }
        // d/dt rho(P + t nu) = 2 Re <d rho, nu> = 2 |d rho|
        let nu = g.map(|c| c.conj()) / C64::new(gn, 0.0);
        Ok(p - nu * C64::new(rho / (2.0 * gn), 0.0))
    }

    /// Boundary point where the ray from `from` along `dir` leaves the domain.
    pub fn ray_exit(&self, from: &CVector, dir: &CVector) -> Result<CVector> {
        let t = crate::line::ray_crossing(self, from, dir, 1e-14)?;
        let p = from + dir * C64::new(t, 0.0);
        self.snap_to_boundary(&p)
    }
}

/// A complex tangent vector `xi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexDirection {
    pub xi: CVector,
}

impl ComplexDirection {
    pub fn new(xi: CVector) -> Self {
        Self { xi }
    }

    /// Normalized copy; fails on (near) zero vectors.
    pub fn unit(xi: CVector) -> Result<Self> {
        let n = cvec::norm(&xi);
        if n < PROJECTION_FLOOR {
            return Err(MetricError::ZeroProjection);
        }
        Ok(Self { xi: xi / C64::new(n, 0.0) })
    }

    pub fn norm(&self) -> f64 {
        cvec::norm(&self.xi)
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    pub fn normalized(&self) -> Result<Self> {
        Self::unit(self.xi.clone())
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }
}

/// Outward unit normal `nu = grad rho / |grad rho|`, in its `C^n` form
/// `conj(d rho) / |d rho|`.
pub fn outward_normal(domain: &ConvexDomain, p: &CVector) -> Result<ComplexDirection> {
    let rho = domain.evaluate(p);
    if rho.abs() > BOUNDARY_TOL {
        return Err(MetricError::NotOnBoundary { rho });
    }
    let g = domain.gradient(p);
    let gn = cvec::norm(&g);
    // real gradient norm is twice the Wirtinger norm
    if 2.0 * gn < GRADIENT_FLOOR {
        return Err(MetricError::GradientVanishes { norm: 2.0 * gn });
    }
    Ok(ComplexDirection::new(g.map(|c| c.conj()) / C64::new(gn, 0.0)))
}

/// `P_delta = P - delta nu`.
pub fn base_point(domain: &ConvexDomain, p: &CVector, nu: &ComplexDirection, delta: f64) -> Result<CVector> {
    if !(delta > 0.0) {
        return Err(MetricError::ConfigInvalid(format!("delta must be positive, got {delta}")));
    }
    let q = p - &nu.xi * C64::new(delta, 0.0);
    let rho = domain.evaluate(&q);
    if rho >= 0.0 {
        return Err(MetricError::OutsideDomain { rho });
    }
    Ok(q)
}

/// Hermitian projection `xi - <xi, nu> nu` onto the complex tangent space.
pub fn complex_tangent_project(nu: &ComplexDirection, xi: &ComplexDirection) -> Result<ComplexDirection> {
    let c = cvec::hermitian(&xi.xi, &nu.xi);
    let proj = &xi.xi - &nu.xi * c;
    if cvec::norm(&proj) < PROJECTION_FLOOR {
        return Err(MetricError::ZeroProjection);
    }
    Ok(ComplexDirection::new(proj))
}

/// Affine unitary chart `w = U (z - P)` with `U nu = e_n`, so that `P` maps to
/// the origin and the domain lies in `{Re w_n < 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFrame {
    pub p: CVector,
    pub nu: ComplexDirection,
    pub u: CMatrix,
}

impl BoundaryFrame {
    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn to_frame(&self, z: &CVector) -> CVector {
        &self.u * (z - &self.p)
    }

    pub fn from_frame(&self, w: &CVector) -> CVector {
        self.u.adjoint() * w + &self.p
    }

    /// Frame vector of a tangent vector (linear part only).
    pub fn vector_to_frame(&self, v: &CVector) -> CVector {
        &self.u * v
    }

    /// Re-chooses the tangential basis so that `dir` (complex tangential)
    /// becomes the first frame axis. Requires `n >= 2`.
    pub fn align_first_axis(&self, dir: &ComplexDirection) -> Result<BoundaryFrame> {
        let n = self.dim();
        if n < 2 {
            return Err(MetricError::ConfigInvalid("alignment needs n >= 2".into()));
        }
        let t = complex_tangent_project(&self.nu, dir)?.normalized()?;
        let mut leading = vec![t.xi.clone()];
        let mut rest = cvec::complete_basis(&[t.xi.clone(), self.nu.xi.clone()], n);
        rest.drain(0..2);
        leading.extend(rest);
        leading.push(self.nu.xi.clone());
        Ok(BoundaryFrame { p: self.p.clone(), nu: self.nu.clone(), u: rows_as_adjoint(&leading) })
    }
}

fn rows_as_adjoint(basis: &[CVector]) -> CMatrix {
    let n = basis.len();
    CMatrix::from_fn(n, n, |i, j| basis[i][j].conj())
}

/// Normalized frame at a boundary point.
pub fn normalize_frame(domain: &ConvexDomain, p: &CVector) -> Result<BoundaryFrame> {
    let p = domain.snap_to_boundary(p)?;
    let nu = outward_normal(domain, &p)?;
    let n = p.len();
    let mut tangential = cvec::complete_basis(std::slice::from_ref(&nu.xi), n);
    tangential.remove(0);
    tangential.push(nu.xi.clone());
    Ok(BoundaryFrame { p, nu, u: rows_as_adjoint(&tangential) })
}

//! Sampled verification of plurisubharmonicity and of the admissibility
//! conditions used by the lower bounds: Levi forms by finite differences,
//! the candidate check, the BNW constant and the unit-disc conditions.

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cvec::{self, CMatrix, CVector, C64};
use crate::disc::affine_disc_bound;
use crate::domain::{base_point, normalize_frame, ComplexDirection, ConvexDomain, Rotated, Shifted};
use crate::error::{MetricError, Result};
use crate::line::RayOptions;
use crate::sampling;
use crate::sibony::{normal_candidate, sibony_lower_bound, tangential_candidate, CandidateOptions, ScalarCandidate};

pub const LOG_FLOOR: f64 = 1e-300;
/// Samples closer than this to the base point are left out of the log test.
pub const BASE_EXCLUSION: f64 = 1e-3;
pub const CIRCLE_POINTS: usize = 64;
/// Initial circle radius of the log test as a fraction of the domain diameter.
pub const LOG_CIRCLE_FRACTION: f64 = 0.05;

/// Finite-difference apparatus for Levi forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeviProbe {
    /// Five-point stencil step, relative to `1 + |z|`.
    pub h: f64,
    pub directions: Vec<CVector>,
    pub tol: f64,
}

impl LeviProbe {
    /// Coordinate directions plus eight random unit directions.
    pub fn standard<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut directions: Vec<CVector> = (0..n).map(|j| cvec::basis(n, j)).collect();
        for _ in 0..8 {
            let v = CVector::from_fn(n, |_, _| {
                C64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng))
            });
            let len = cvec::norm(&v);
            directions.push(v / C64::new(len, 0.0));
        }
        Self { h: 1e-4, directions, tol: 1e-8 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) {
            return Err(MetricError::ConfigInvalid("probe step must be positive".into()));
        }
        if self.directions.len() < 3 {
            return Err(MetricError::ConfigInvalid("probe needs at least three directions".into()));
        }
        Ok(())
    }
}

/// Five-point complex-line stencil
/// `(u(z+h xi) + u(z-h xi) + u(z+ih xi) + u(z-ih xi) - 4u(z)) / (4h^2)`.
pub fn levi_form<F: Fn(&CVector) -> f64>(u: F, z: &CVector, xi: &CVector, h: f64) -> f64 {
    let step = |c: C64| u(&(z + xi * c));
    let s = step(C64::new(h, 0.0)) + step(C64::new(-h, 0.0)) + step(C64::new(0.0, h)) + step(C64::new(0.0, -h));
    (s - 4.0 * u(z)) / (4.0 * h * h)
}

/// Scale-free Levi form of `g` along `xi` at `z`: `(4r)^2` times the Levi
/// form, read off the mean of `g` over a 32-point circle of radius `r` in the
/// complex line through `z`. Returns the value and the radius used, or `None`
/// when no radius down to `r0 / 2^48` resolves `g` (roundoff-dominated rings).
///
/// Starting from `r0`, the radius is halved until the Fourier modes 8 to 16 of
/// `g` on the circle have decayed to `1e-12 (1 + |g(z)|)`. Log singularities
/// then lie well outside the circle and the aliasing error of the mean, which
/// comes from mode 32, is below roundoff.
pub fn normalized_circle_levi<F: Fn(&CVector) -> f64>(g: F, z: &CVector, xi: &CVector, r0: f64) -> Option<(f64, f64)> {
    const POINTS: usize = 32;
    let center = g(z);
    let floor = 1e-12 * (1.0 + center.abs());
    let roots: [C64; POINTS] = std::array::from_fn(|k| C64::from_polar(1.0, TAU * k as f64 / POINTS as f64));
    let mut point = z.clone();
    let mut r = r0;
    for _ in 0..48 {
        let ring: Vec<f64> = roots
            .iter()
            .map(|w| {
                point.copy_from(z);
                point.axpy(w * r, xi, C64::new(1.0, 0.0));
                g(&point)
            })
            .collect();
        let tail = (8..=16)
            .map(|mode| {
                ring.iter()
                    .enumerate()
                    .map(|(j, v)| roots[(mode * j) % POINTS].conj() * *v)
                    .sum::<C64>()
                    .norm()
                    / POINTS as f64
            })
            .fold(0.0f64, f64::max);
        if tail <= floor {
            let mean = ring.iter().sum::<f64>() / POINTS as f64;
            return Some((16.0 * (mean - center), r));
        }
        r *= 0.5;
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub base_value: f64,
    pub base_ok: bool,
    pub range_min: f64,
    pub range_max: f64,
    pub range_ok: bool,
    /// Smallest normalized Levi form of `log u` over samples and directions.
    pub log_levi_min: f64,
    pub log_psh_ok: bool,
    pub worst_point: Option<CVector>,
    pub worst_direction: Option<usize>,
    pub samples: usize,
    pub excluded: usize,
    /// Sample/direction pairs whose log test stayed at roundoff level.
    pub unresolved: usize,
    pub passed: bool,
}

/// Checks `u(base) = 0`, `0 <= u <= 1` and plurisubharmonicity of `log u` on
/// interior samples, part of them clustered around the base point.
///
/// The log test compares [`normalized_circle_levi`] of `log(u + 1e-300)` with
/// `-tol`; a plain five-point stencil cannot resolve `1e-8` on `log u`, whose
/// magnitude and curvature vary by many orders across the domain.
pub fn verify_candidate<R: Rng + ?Sized>(
    candidate: &ScalarCandidate,
    domain: &ConvexDomain,
    sample_count: usize,
    probe: &LeviProbe,
    rng: &mut R,
) -> Result<VerifyReport> {
    probe.validate()?;
    let tol = probe.tol;
    let base = &candidate.base_point;
    let base_value = candidate.evaluate(base);
    // a fifth of the budget goes to the neighbourhood of the base point
    let near = sample_count / 10;
    let mut pts = sampling::sample_interior(domain, sample_count - 2 * near, rng);
    pts.extend(sampling::sample_near(domain, base, &[1e-2, 1e-1], near, rng));
    let values: Vec<f64> = pts.par_iter().map(|z| candidate.evaluate(z)).collect();
    let range_min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let range_max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let log_u = |z: &CVector| (candidate.evaluate(z).max(0.0) + LOG_FLOOR).ln();
    let r0 = LOG_CIRCLE_FRACTION * domain.bounding_box.diameter();
    let per_point: Vec<Option<(Option<(f64, usize)>, usize)>> = pts
        .par_iter()
        .map(|z| {
            if cvec::norm(&(z - base)) < BASE_EXCLUSION {
                return None;
            }
            let mut unresolved = 0;
            let worst = probe
                .directions
                .iter()
                .enumerate()
                .filter_map(|(k, xi)| match normalized_circle_levi(log_u, z, xi, r0) {
                    Some((v, _)) => Some((v, k)),
                    None => {
                        unresolved += 1;
                        None
                    }
                })
                .min_by(|a, b| a.0.total_cmp(&b.0));
            Some((worst, unresolved))
        })
        .collect();
    let excluded = per_point.iter().filter(|p| p.is_none()).count();
    let unresolved = per_point.iter().flatten().map(|p| p.1).sum();
    let worst = per_point
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.as_ref().and_then(|p| p.0).map(|(v, k)| (v, k, i)))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    let log_levi_min = worst.map(|w| w.0).unwrap_or(0.0);

    let base_ok = base_value.abs() <= tol;
    let range_ok = range_min >= -tol && range_max <= 1.0 + tol;
    let log_psh_ok = log_levi_min >= -tol;
    Ok(VerifyReport {
        base_value,
        base_ok,
        range_min,
        range_max,
        range_ok,
        log_levi_min,
        log_psh_ok,
        worst_point: worst.map(|w| pts[w.2].clone()),
        worst_direction: worst.map(|w| w.1),
        samples: pts.len(),
        excluded,
        unresolved,
        passed: base_ok && range_ok && log_psh_ok,
    })
}

/// `f(x) = sum_{k=2}^m a_k x^k` on `[0, r]`, the class of the BNW lemma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BNWSample {
    /// `a_2, ..., a_m`.
    pub coeffs: Vec<f64>,
    pub r: f64,
    pub grid: usize,
}

impl BNWSample {
    pub fn new(coeffs: Vec<f64>, r: f64, grid: usize) -> Result<Self> {
        if !(r > 0.0) || grid == 0 || coeffs.iter().any(|a| !a.is_finite()) {
            return Err(MetricError::ConfigInvalid("BNW sample needs r > 0, a grid and finite coefficients".into()));
        }
        Ok(Self { coeffs, r, grid })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() + 1
    }

    fn grid_points(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.grid).map(move |i| self.r * i as f64 / self.grid as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().enumerate().map(|(i, a)| a * x.powi(i as i32 + 2)).sum()
    }

    pub fn majorant(&self, x: f64) -> f64 {
        self.coeffs.iter().enumerate().map(|(i, a)| a.abs() * x.powi(i as i32 + 2)).sum()
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let k = (i + 2) as f64;
                k * (k - 1.0) * a * x.powi(i as i32)
            })
            .sum()
    }

    /// First grid point (including `x = 0`) where `f'' < -1e-12`.
    pub fn admissibility_violation(&self) -> Option<(f64, f64)> {
        std::iter::once(0.0)
            .chain(self.grid_points())
            .map(|x| (x, self.second_derivative(x)))
            .find(|&(_, v)| v < -1e-12)
    }
}

/// `min_{x in grid} f(x) / sum_k |a_k| x^k`; `+inf` when all coefficients vanish.
pub fn bnw_constant(sample: &BNWSample) -> Result<f64> {
    if let Some((x, value)) = sample.admissibility_violation() {
        return Err(MetricError::NotAdmissible { x, value });
    }
    if sample.coeffs.iter().all(|&a| a == 0.0) {
        return Ok(f64::INFINITY);
    }
    Ok(sample
        .grid_points()
        .map(|x| {
            let den = sample.majorant(x);
            if den > 0.0 {
                sample.eval(x) / den
            } else {
                f64::INFINITY
            }
        })
        .fold(f64::INFINITY, f64::min))
}

/// Rejection sampler for `C(m, r)`: Gaussian coefficients with `a_2 >= 0`,
/// kept when `f'' >= 0` on the grid.
pub fn random_admissible<R: Rng + ?Sized>(m: usize, r: f64, grid: usize, rng: &mut R) -> Result<BNWSample> {
    if m < 2 {
        return Err(MetricError::ConfigInvalid("BNW degree must be at least 2".into()));
    }
    for _ in 0..100_000 {
        let mut coeffs: Vec<f64> = (2..=m).map(|_| StandardNormal.sample(&mut *rng)).collect();
        coeffs[0] = coeffs[0].abs();
        let s = BNWSample::new(coeffs, r, grid)?;
        if s.admissibility_violation().is_none() {
            return Ok(s);
        }
    }
    Err(MetricError::PreconditionFailed(format!("no admissible degree-{m} sample found")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BNWFamilyReport {
    pub m: usize,
    pub r: f64,
    pub count: usize,
    pub min_constant: f64,
    pub max_constant: f64,
    pub all_positive: bool,
}

pub fn bnw_family(m: usize, r: f64, count: usize, grid: usize, seed: u64) -> Result<BNWFamilyReport> {
    let mut rng = sampling::rng_for(seed, m as u64);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for _ in 0..count {
        let c = bnw_constant(&random_admissible(m, r, grid, &mut rng)?)?;
        lo = lo.min(c);
        hi = hi.max(c);
    }
    Ok(BNWFamilyReport { m, r, count, min_constant: lo, max_constant: hi, all_positive: lo > 0.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubharmonicReport {
    /// Smallest `mean over circle - g(center)`.
    pub min_margin: f64,
    pub checked: usize,
    pub skipped: usize,
    pub passed: bool,
}

/// Sub-mean-value test for `g` on circles whose closure lies in the unit disc.
pub fn subharmonic_check<G: Fn(C64) -> f64>(g: G, centers: &[C64], radii: &[f64], tol: f64) -> SubharmonicReport {
    let mut min_margin = f64::INFINITY;
    let mut checked = 0;
    let mut skipped = 0;
    for &c in centers {
        for &r in radii {
            if c.norm() + r >= 1.0 || r <= 0.0 {
                skipped += 1;
                continue;
            }
            let mean = (0..CIRCLE_POINTS)
                .map(|k| g(c + C64::from_polar(r, TAU * k as f64 / CIRCLE_POINTS as f64)))
                .sum::<f64>()
                / CIRCLE_POINTS as f64;
            min_margin = min_margin.min(mean - g(c));
            checked += 1;
        }
    }
    SubharmonicReport { min_margin, checked, skipped, passed: checked > 0 && min_margin >= -tol }
}

/// Checks the hypotheses of the unit-disc lemma on grids (`u(0) = 0`,
/// `0 <= u <= 1`, `u / |z|^2` subharmonic) and returns `d^2 u / dz dz̄ (0)`,
/// which the lemma bounds by 1.
pub fn disc_hessian_bound_check<U: Fn(C64) -> f64>(u: U) -> Result<f64> {
    let u0 = u(C64::new(0.0, 0.0));
    if u0.abs() > 1e-12 {
        return Err(MetricError::PreconditionFailed(format!("u(0) = {u0}, expected 0")));
    }
    for i in 1..=32 {
        let s = 0.999 * i as f64 / 32.0;
        for j in 0..64 {
            let v = u(C64::from_polar(s, TAU * j as f64 / 64.0));
            if !(-1e-9..=1.0 + 1e-9).contains(&v) {
                return Err(MetricError::PreconditionFailed(format!("u = {v} leaves [0, 1] at radius {s}")));
            }
        }
    }
    // u / |z|^2 continued to the origin by its mean on a tiny circle
    let tiny = 1e-4;
    let g0 = (0..CIRCLE_POINTS)
        .map(|k| u(C64::from_polar(tiny, TAU * k as f64 / CIRCLE_POINTS as f64)) / (tiny * tiny))
        .sum::<f64>()
        / CIRCLE_POINTS as f64;
    let g = |z: C64| if z.norm() < 1e-12 { g0 } else { u(z) / z.norm_sqr() };
    let mut centers = vec![C64::new(0.0, 0.0)];
    for s in [0.25, 0.5, 0.75] {
        for k in 0..8 {
            centers.push(C64::from_polar(s, TAU * k as f64 / 8.0));
        }
    }
    let report = subharmonic_check(g, &centers, &[0.05, 0.1, 0.2], 1e-8);
    if !report.passed {
        return Err(MetricError::PreconditionFailed(format!(
            "u/|z|^2 fails the sub-mean-value test (margin {})",
            report.min_margin
        )));
    }
    let z0 = CVector::zeros(1);
    let xi = cvec::basis(1, 0);
    Ok(levi_form(|z: &CVector| u(z[0]), &z0, &xi, 1e-5))
}

/// The plurisubharmonic metric of the unit disc at the origin: `|xi|`.
pub fn psh_metric_unit_disc(xi: C64) -> f64 {
    xi.norm()
}

/// `u(z) = |z|^2 h(z)` with `h` a harmonic polynomial rescaled into `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSquare {
    /// `h(z) = (Re sum_k c_k z^k - lo) / (hi - lo)`.
    pub coeffs: Vec<C64>,
    pub lo: f64,
    pub hi: f64,
}

impl WeightedSquare {
    pub fn random<R: Rng + ?Sized>(degree: usize, rng: &mut R) -> Self {
        let coeffs: Vec<C64> = (0..=degree)
            .map(|_| C64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng)))
            .collect();
        let raw = |z: C64| Self::harmonic(&coeffs, z);
        let boundary: Vec<f64> = (0..4096).map(|k| raw(C64::from_polar(1.0, TAU * k as f64 / 4096.0))).collect();
        let min = boundary.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = boundary.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // a little room for the extremes falling between boundary samples
        let pad = 1e-3 * (max - min).max(1e-12);
        Self { coeffs, lo: min - pad, hi: max + pad }
    }

    fn harmonic(coeffs: &[C64], z: C64) -> f64 {
        coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c).re
    }

    pub fn weight(&self, z: C64) -> f64 {
        (Self::harmonic(&self.coeffs, z) - self.lo) / (self.hi - self.lo)
    }

    pub fn eval(&self, z: C64) -> f64 {
        z.norm_sqr() * self.weight(z)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    pub rel_lower: f64,
    pub rel_upper: f64,
    pub passed: bool,
}

fn bounds_at(domain: &ConvexDomain, p: &CVector, xi: &CVector, delta: f64) -> Result<(f64, f64)> {
    let frame = normalize_frame(domain, p)?;
    let dir = ComplexDirection::new(xi.clone());
    let along_normal = cvec::hermitian(xi, &frame.nu.xi).norm();
    let lower = if along_normal < 1e-8 {
        let c = tangential_candidate(domain, &frame, &dir, delta, true, &CandidateOptions::default())?;
        sibony_lower_bound(&c, xi)?
    } else {
        sibony_lower_bound(&normal_candidate(&frame, delta)?, xi)?
    };
    let p_delta = base_point(domain, &frame.p, &frame.nu, delta)?;
    let ray = RayOptions { initial_step: Some(delta), ..RayOptions::default() };
    let upper = affine_disc_bound(domain, &p_delta, &dir, &ray)?.value;
    Ok((lower, upper))
}

/// Compares both bounds on `(Omega, P, xi)` with those on
/// `(U Omega + c, U P + c, U xi)`.
pub fn unitary_invariance_check(
    domain: &ConvexDomain,
    p: &CVector,
    xi: &CVector,
    delta: f64,
    unitary: &CMatrix,
    shift: &CVector,
    tol: f64,
) -> Result<InvarianceReport> {
    if cvec::unitarity_defect(unitary) > 1e-10 {
        return Err(MetricError::ConfigInvalid("map is not unitary".into()));
    }
    let (l0, u0) = bounds_at(domain, p, xi, delta)?;
    let rotated = Rotated::new(domain.rho.clone(), unitary.clone(), "u")?;
    let moved = ConvexDomain::new(Arc::new(Shifted::new(Arc::new(rotated), shift.clone())?));
    let (l1, u1) = bounds_at(&moved, &(unitary * p + shift), &(unitary * xi), delta)?;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    let (rel_lower, rel_upper) = (rel(l0, l1), rel(u0, u1));
    Ok(InvarianceReport {
        lower: [l0, l1],
        upper: [u0, u1],
        rel_lower,
        rel_upper,
        passed: rel_lower <= tol && rel_upper <= tol,
    })
}

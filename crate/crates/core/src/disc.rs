//! Upper bounds from explicit analytic discs, and closed-form oracles.
//!
//! Any holomorphic `phi: D -> Omega` with `phi(0) = P` and `phi'(0) = r xi / |xi|`
//! certifies `F_K(P, xi) <= |xi| / r`. Two families are searched: affine discs
//! `P + r zeta xi` and discs curved along the normal, `P + r zeta xi + d zeta^2 nu`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::cvec::{self, CVector, C64};
use crate::domain::{ComplexDirection, ConvexDomain};
use crate::error::{MetricError, Result};
use crate::line::{inscribed_radius, RayOptions};

/// Containment grid used while searching.
pub const SEARCH_ANGLES: usize = 64;
pub const SEARCH_RADII: usize = 8;
/// Denser grid used to certify the final disc.
pub const CERTIFY_ANGLES: usize = 2048;
pub const CERTIFY_RADII: usize = 16;
pub const CONTAINMENT_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscKind {
    Affine,
    Recentered,
}

/// `phi(zeta) = center + radius * zeta * direction + normal_shift * zeta^2 * normal`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscFamily {
    pub kind: DiscKind,
    pub center: CVector,
    pub direction: CVector,
    pub radius: f64,
    pub normal_shift: C64,
    pub normal: CVector,
}

impl DiscFamily {
    pub fn eval(&self, zeta: C64) -> CVector {
        &self.center + &self.direction * (zeta * self.radius) + &self.normal * (self.normal_shift * zeta * zeta)
    }

    /// Sampled containment: `rho(phi(zeta)) < slack` on `angles x radii` points.
    pub fn contained_in(&self, domain: &ConvexDomain, angles: usize, radii: usize) -> bool {
        for k in 1..=radii {
            let s = k as f64 / radii as f64;
            for j in 0..angles {
                let zeta = C64::from_polar(s, TAU * j as f64 / angles as f64);
                if domain.evaluate(&self.eval(zeta)) >= CONTAINMENT_SLACK {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscBound {
    /// `|xi| / radius`.
    pub value: f64,
    pub disc: DiscFamily,
    /// Radius searches spent (recentered family only).
    pub evaluations: usize,
}

/// Largest round disc in the complex line `P_delta + C xi`: `F <= |xi| / r`.
pub fn affine_disc_bound(domain: &ConvexDomain, p_delta: &CVector, xi: &ComplexDirection, opts: &RayOptions) -> Result<DiscBound> {
    let len = xi.norm();
    let unit = xi.normalized()?;
    let contact = inscribed_radius(domain, p_delta, &unit, opts)?;
    let n = p_delta.len();
    Ok(DiscBound {
        value: len / contact.radius,
        disc: DiscFamily {
            kind: DiscKind::Affine,
            center: p_delta.clone(),
            direction: unit.xi,
            radius: contact.radius,
            normal_shift: C64::new(0.0, 0.0),
            normal: CVector::zeros(n),
        },
        evaluations: 0,
    })
}

/// Coordinate-descent search over `(r, d)` for discs curved along `nu`. Never
/// returns a value above the affine bound.
pub fn recentered_disc_bound(
    domain: &ConvexDomain,
    p_delta: &CVector,
    xi: &ComplexDirection,
    nu: &ComplexDirection,
    search_budget: usize,
    opts: &RayOptions,
) -> Result<DiscBound> {
    let affine = affine_disc_bound(domain, p_delta, xi, opts)?;
    let template = DiscFamily {
        kind: DiscKind::Recentered,
        normal: nu.normalized()?.xi,
        ..affine.disc.clone()
    };
    let r_aff = affine.disc.radius;
    let mut evaluations = 0usize;
    let radius_for = |d: C64, evaluations: &mut usize| -> f64 {
        *evaluations += 1;
        max_contained_radius(domain, &template, d, r_aff, SEARCH_ANGLES, SEARCH_RADII)
    };

    let mut best_d = C64::new(0.0, 0.0);
    let mut best_r = r_aff;
    let mut step = r_aff;
    let axes = [C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
    while evaluations < search_budget && step > 1e-6 * r_aff {
        let mut improved = false;
        for axis in axes {
            for sign in [1.0, -1.0] {
                if evaluations >= search_budget {
                    break;
                }
                let trial = best_d + axis * (sign * step);
                let r = radius_for(trial, &mut evaluations);
                if r > best_r * (1.0 + 1e-12) {
                    best_r = r;
                    best_d = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }

    if best_d == C64::new(0.0, 0.0) {
        return Ok(DiscBound { disc: DiscFamily { kind: DiscKind::Recentered, ..template }, evaluations, ..affine });
    }
    // certify on the dense grid, shrinking the radius if needed
    let certified = max_contained_radius(domain, &template, best_d, best_r, CERTIFY_ANGLES, CERTIFY_RADII).min(best_r);
    if certified <= r_aff {
        return Ok(DiscBound { disc: DiscFamily { kind: DiscKind::Recentered, ..template }, evaluations, ..affine });
    }
    let disc = DiscFamily { radius: certified, normal_shift: best_d, ..template };
    Ok(DiscBound { value: xi.norm() / certified, disc, evaluations })
}

/// Largest `r` (by bracketing and bisection) with the disc `(r, d)` contained
/// on the given grid; 0 if even tiny discs leave the domain.
fn max_contained_radius(
    domain: &ConvexDomain,
    template: &DiscFamily,
    d: C64,
    r_guess: f64,
    angles: usize,
    radii: usize,
) -> f64 {
    let ok = |r: f64| {
        DiscFamily { radius: r, normal_shift: d, ..template.clone() }.contained_in(domain, angles, radii)
    };
    let mut lo = 0.0;
    let mut hi = r_guess;
    let mut grow = 0;
    while ok(hi) {
        lo = hi;
        hi *= 1.5;
        grow += 1;
        if grow > 60 {
            return lo;
        }
    }
    if lo == 0.0 && !ok(1e-6 * r_guess) {
        return 0.0;
    }
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    lo
}

/// Poincare metric of the unit disc, `|xi| / (1 - |z|^2)`.
pub fn poincare(z: C64, xi: C64) -> Result<f64> {
    let m = z.norm();
    if m >= 1.0 {
        return Err(MetricError::OutsideDisc { modulus: m });
    }
    Ok(xi.norm() / (1.0 - z.norm_sqr()))
}

/// Invariant metric of the unit ball in `C^n`:
/// `sqrt(|xi|^2 (1 - |z|^2) + |<z, xi>|^2) / (1 - |z|^2)`.
pub fn ball_metric_oracle(z: &CVector, xi: &CVector) -> Result<f64> {
    let s = z.iter().map(|c| c.norm_sqr()).sum::<f64>();
    if s >= 1.0 {
        return Err(MetricError::OutsideDomain { rho: s - 1.0 });
    }
    let x2 = xi.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let zx = cvec::hermitian(xi, z).norm_sqr();
    Ok((x2 * (1.0 - s) + zx).sqrt() / (1.0 - s))
}

//! Domain identifiers, boundary-point anchors and direction specifications as
//! accepted on the command line.
//!
//! Identifiers:
//!
//! * `ball:<n>`: the unit ball in `C^n`;
//! * `cxellipsoid:<m1>,...,<mn>`: `sum |z_j|^(2 m_j) < 1`;
//! * `shifted:<id>:<offset>`: translate of `<id>` by `offset`, written as
//!   interleaved real and imaginary parts;
//! * `rotated:<id>:<seed>`: image of `<id>` under a random unitary map drawn
//!   from `seed`;
//! * a path to a JSON polynomial `{"n": .., "rho": [{"coeff": .., "powers": [[p, q], ..]}, ..]}`.

use std::path::Path;
use std::sync::Arc;

use crate::cvec::{self, CVector, C64};
use crate::domain::{
    complex_tangent_project, Ball, BoundaryFrame, ComplexDirection, ComplexEllipsoid, ConvexDomain, DefiningFunction,
    PolynomialDomain, Rotated, Shifted,
};
use crate::error::{MetricError, Result};
use crate::polynomial::{Polynomial, PolynomialSpec};
use crate::sampling;

/// The three domains every property suite runs on.
pub const STANDARD_CORPUS: [&str; 3] = ["ball:2", "cxellipsoid:2,1", "cxellipsoid:3,1"];

fn invalid(msg: impl Into<String>) -> MetricError {
    MetricError::ConfigInvalid(msg.into())
}

fn parse_reals(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| invalid(format!("not a number: {t:?}"))))
        .collect()
}

fn split_last(rest: &str) -> Result<(&str, &str)> {
    rest.rsplit_once(':').ok_or_else(|| invalid(format!("missing trailing parameter in {rest:?}")))
}

pub fn parse_defining_function(id: &str) -> Result<Arc<dyn DefiningFunction>> {
    let id = id.trim();
    if let Some(rest) = id.strip_prefix("ball:") {
        let n: usize = rest.parse().map_err(|_| invalid(format!("bad ball dimension {rest:?}")))?;
        return Ok(Arc::new(Ball::new(n, 1.0)?));
    }
    if let Some(rest) = id.strip_prefix("cxellipsoid:") {
        let exps = rest
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| invalid(format!("bad exponent {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Arc::new(ComplexEllipsoid::new(exps)?));
    }
    if let Some(rest) = id.strip_prefix("shifted:") {
        let (inner, offset) = split_last(rest)?;
        let inner = parse_defining_function(inner)?;
        let reals = parse_reals(offset)?;
        if reals.len() != 2 * inner.dim() {
            return Err(MetricError::DimensionMismatch { expected: 2 * inner.dim(), got: reals.len() });
        }
        return Ok(Arc::new(Shifted::new(inner, cvec::from_real(&reals))?));
    }
    if let Some(rest) = id.strip_prefix("rotated:") {
        let (inner, seed) = split_last(rest)?;
        let seed: u64 = seed.parse().map_err(|_| invalid(format!("bad rotation seed {seed:?}")))?;
        let inner = parse_defining_function(inner)?;
        let u = cvec::random_unitary(inner.dim(), &mut sampling::rng_for(seed, 0x726f74));
        return Ok(Arc::new(Rotated::new(inner, u, seed.to_string())?));
    }
    if id.ends_with(".json") || Path::new(id).is_file() {
        return load_polynomial_file(Path::new(id));
    }
    Err(invalid(format!("unknown domain identifier {id:?}")))
}

fn load_polynomial_file(path: &Path) -> Result<Arc<dyn DefiningFunction>> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let spec: PolynomialSpec =
        serde_json::from_str(&text).map_err(|e| invalid(format!("bad domain file {}: {e}", path.display())))?;
    let poly = Polynomial::from_spec(&spec)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("polynomial").to_string();
    Ok(Arc::new(PolynomialDomain::with_probed_box(name, poly)?))
}

/// Loads a domain and checks that it is bounded.
pub fn load_domain(id: &str) -> Result<ConvexDomain> {
    let domain = ConvexDomain::new(parse_defining_function(id)?);
    if !domain.check_bounded() {
        return Err(invalid(format!("domain {id:?} does not look bounded")));
    }
    Ok(domain)
}

/// `"north"` is where the ray from the bounding-box center along `+Re z_n`
/// leaves the domain; anything else is a comma-separated vector of `n` real
/// parts or `2n` interleaved real and imaginary parts, which must lie on the
/// boundary to within `1e-8` and is then snapped onto it.
pub fn resolve_point(domain: &ConvexDomain, spec: &str) -> Result<CVector> {
    let n = domain.dim();
    let spec = spec.trim();
    if spec == "north" {
        let center = domain.bounding_box.center();
        if !domain.contains(&center) {
            return Err(MetricError::CenterOutside { rho: domain.evaluate(&center) });
        }
        return domain.ray_exit(&center, &cvec::basis(n, n - 1));
    }
    let reals = parse_reals(spec)?;
    let p = if reals.len() == n {
        cvec::from_reals(&reals)
    } else if reals.len() == 2 * n {
        cvec::from_real(&reals)
    } else {
        return Err(MetricError::DimensionMismatch { expected: n, got: reals.len() });
    };
    domain.snap_to_boundary(&p)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Direction {
    Normal,
    Tangential(ComplexDirection),
}

impl Direction {
    pub fn vector(&self, frame: &BoundaryFrame) -> ComplexDirection {
        match self {
            Direction::Normal => frame.nu.clone(),
            Direction::Tangential(xi) => xi.clone(),
        }
    }

    pub fn is_normal(&self) -> bool {
        matches!(self, Direction::Normal)
    }
}

/// `"normal"`, `"tangent:j"` (the `j`-th tangential frame axis, `1 <= j < n`)
/// or an explicit vector, projected onto the complex tangent space.
pub fn resolve_direction(frame: &BoundaryFrame, spec: &str) -> Result<Direction> {
    let n = frame.dim();
    let spec = spec.trim();
    if spec == "normal" {
        return Ok(Direction::Normal);
    }
    if let Some(j) = spec.strip_prefix("tangent:") {
        let j: usize = j.parse().map_err(|_| invalid(format!("bad tangent index {j:?}")))?;
        if j == 0 || j >= n {
            return Err(invalid(format!("tangent index must lie in 1..{}", n - 1)));
        }
        let axis = CVector::from_fn(n, |k, _| frame.u[(j - 1, k)].conj());
        return Ok(Direction::Tangential(ComplexDirection::new(axis)));
    }
    let reals = parse_reals(spec)?;
    let v = if reals.len() == n {
        cvec::from_reals(&reals)
    } else if reals.len() == 2 * n {
        cvec::from_real(&reals)
    } else {
        return Err(MetricError::DimensionMismatch { expected: n, got: reals.len() });
    };
    let t = complex_tangent_project(&frame.nu, &ComplexDirection::new(v))?;
    Ok(Direction::Tangential(t.normalized()?))
}

/// `a nu + b T` for a unit tangential `T`.
pub fn mixed_vector(frame: &BoundaryFrame, tangent: &ComplexDirection, a: f64, b: f64) -> CVector {
    &frame.nu.xi * C64::new(a, 0.0) + &tangent.xi * C64::new(b, 0.0)
}

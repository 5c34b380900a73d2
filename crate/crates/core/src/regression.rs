//! Ordinary least squares on a single regressor.

use serde::{Deserialize, Serialize};

use crate::error::{MetricError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn ols(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(MetricError::DegenerateFit(format!("length mismatch {} vs {}", x.len(), y.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(MetricError::DegenerateFit("non-finite sample".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if x.len() < 2 || sxx <= f64::EPSILON * (1.0 + mx * mx) * n {
        return Err(MetricError::DegenerateFit("fewer than two distinct abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(LinearFit { slope, intercept, r2 })
}

/// Fit of `log y` against `log x`.
pub fn log_log(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(MetricError::DegenerateFit("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    ols(&lx, &ly)
}

/// `count` log-spaced points from `min` to `max` inclusive.
pub fn log_spaced(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    let (a, b) = (min.ln(), max.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let d = log_spaced(1e-4, 1e-1, 16);
        let fit = log_log(&d, &d).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12 && (fit.r2 - 1.0).abs() < 1e-12);
        let y: Vec<f64> = d.iter().map(|x| 3.0 * x.sqrt()).collect();
        let fit = log_log(&d, &y).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12 && (fit.r2 - 1.0).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(ols(&[1.0, 1.0], &[2.0, 3.0]), Err(MetricError::DegenerateFit(_))));
        assert!(matches!(ols(&[1.0], &[2.0]), Err(MetricError::DegenerateFit(_))));
        assert!(log_log(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = log_spaced(1e-4, 1e-1, 4);
        assert_eq!(g.len(), 4);
        assert!((g[0] - 1e-4).abs() < 1e-18 && (g[3] - 1e-1).abs() < 1e-15);
        assert!((g[1] - 1e-3).abs() < 1e-15);
    }
}

//! Real-valued polynomials in `z` and `conj(z)`.
//!
//! A polynomial is a list of terms `coeff * prod_j z_j^{p_j} conj(z_j)^{q_j}`.
//! Real-valuedness is enforced by requiring the term list to be closed under
//! conjugation: the aggregated coefficient of `(p, q)` must equal the one of
//! `(q, p)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cvec::{CVector, C64};
use crate::error::{MetricError, Result};

/// One monomial; `powers[j] = [p_j, q_j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub powers: Vec<[u32; 2]>,
}

/// JSON document describing a custom domain `{rho < 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSpec {
    pub n: usize,
    pub rho: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: Vec<Term>,
}

impl Polynomial {
    /// Builds the polynomial, padding missing power entries with zeros and
    /// checking the conjugation symmetry.
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self> {
        let mut merged: BTreeMap<Vec<[u32; 2]>, f64> = BTreeMap::new();
        for t in terms {
            if t.powers.len() > n {
                return Err(MetricError::DimensionMismatch { expected: n, got: t.powers.len() });
            }
            if !t.coeff.is_finite() {
                return Err(MetricError::ConfigInvalid("non-finite coefficient".into()));
            }
            let mut powers = t.powers.clone();
            powers.resize(n, [0, 0]);
            *merged.entry(powers).or_insert(0.0) += t.coeff;
        }
        let scale = merged.values().fold(1.0f64, |a, c| a.max(c.abs()));
        for (powers, &c) in &merged {
            let swapped: Vec<[u32; 2]> = powers.iter().map(|&[p, q]| [q, p]).collect();
            let partner = merged.get(&swapped).copied().unwrap_or(0.0);
            if (partner - c).abs() > 1e-12 * scale {
                return Err(MetricError::ConfigInvalid(format!(
                    "polynomial is not real: term {powers:?} has coefficient {c} but its conjugate has {partner}"
                )));
            }
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(powers, coeff)| Term { coeff, powers })
            .collect();
        Ok(Self { n, terms })
    }

    pub fn from_spec(spec: &PolynomialSpec) -> Result<Self> {
        if spec.n == 0 {
            return Err(MetricError::ConfigInvalid("dimension must be positive".into()));
        }
        Self::new(spec.n, spec.rho.clone())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.powers.iter().map(|[p, q]| p + q).sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, z: &CVector) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for t in &self.terms {
            let mut m = C64::new(t.coeff, 0.0);
            for (j, &[p, q]) in t.powers.iter().enumerate() {
                if p > 0 {
                    m *= z[j].powu(p);
                }
                if q > 0 {
                    m *= z[j].conj().powu(q);
                }
            }
            acc += m;
        }
        acc.re
    }

    /// Wirtinger derivatives `d rho / d z_j`.
    pub fn wirtinger_grad(&self, z: &CVector) -> CVector {
        let mut g = CVector::zeros(self.n);
        for t in &self.terms {
            for j in 0..self.n {
                let [pj, _] = t.powers[j];
                if pj == 0 {
                    continue;
                }
                let mut m = C64::new(t.coeff * pj as f64, 0.0);
                for (k, &[p, q]) in t.powers.iter().enumerate() {
                    let p_eff = if k == j { p - 1 } else { p };
                    if p_eff > 0 {
                        m *= z[k].powu(p_eff);
                    }
                    if q > 0 {
                        m *= z[k].conj().powu(q);
                    }
                }
                g[j] += m;
            }
        }
        g
    }

    /// Expands `zeta -> rho(p + zeta * xi)` as a polynomial in `zeta` and
    /// `conj(zeta)`.
    pub fn restrict_to_line(&self, p: &CVector, xi: &CVector) -> BiPoly {
        let mut out = BiPoly::zero(self.degree() as usize);
        for t in &self.terms {
            let mut acc = BiPoly::constant(C64::new(t.coeff, 0.0));
            for (j, &[pj, qj]) in t.powers.iter().enumerate() {
                if pj > 0 {
                    acc = acc.mul(&BiPoly::binomial_holo(p[j], xi[j], pj as usize));
                }
                if qj > 0 {
                    acc = acc.mul(&BiPoly::binomial_anti(p[j].conj(), xi[j].conj(), qj as usize));
                }
            }
            out.add_assign(&acc);
        }
        out
    }
}

/// Dense polynomial `sum c[a][b] zeta^a conj(zeta)^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiPoly {
    coeffs: Vec<Vec<C64>>,
}

impl BiPoly {
    pub fn zero(degree: usize) -> Self {
        Self { coeffs: vec![vec![C64::new(0.0, 0.0); degree + 1]; degree + 1] }
    }

    pub fn constant(c: C64) -> Self {
        Self { coeffs: vec![vec![c]] }
    }

    fn size(&self) -> usize {
        self.coeffs.len()
    }

    /// `(a + b zeta)^k`
    fn binomial_holo(a: C64, b: C64, k: usize) -> Self {
        let mut out = Self::zero(k);
        for i in 0..=k {
            out.coeffs[i][0] = binom(k, i) * b.powu(i as u32) * a.powu((k - i) as u32);
        }
        out
    }

    /// `(a + b conj(zeta))^k`
    fn binomial_anti(a: C64, b: C64, k: usize) -> Self {
        let mut out = Self::zero(k);
        for i in 0..=k {
            out.coeffs[0][i] = binom(k, i) * b.powu(i as u32) * a.powu((k - i) as u32);
        }
        out
    }

    fn mul(&self, other: &Self) -> Self {
        let d = self.size() + other.size() - 2;
        let mut out = Self::zero(d);
        for (a1, row1) in self.coeffs.iter().enumerate() {
            for (b1, c1) in row1.iter().enumerate() {
                if *c1 == C64::new(0.0, 0.0) {
                    continue;
                }
                for (a2, row2) in other.coeffs.iter().enumerate() {
                    for (b2, c2) in row2.iter().enumerate() {
                        out.coeffs[a1 + a2][b1 + b2] += c1 * c2;
                    }
                }
            }
        }
        out
    }

    fn add_assign(&mut self, other: &Self) {
        if other.size() > self.size() {
            let d = other.size() - 1;
            let mut grown = Self::zero(d);
            for (a, row) in self.coeffs.iter().enumerate() {
                for (b, c) in row.iter().enumerate() {
                    grown.coeffs[a][b] = *c;
                }
            }
            *self = grown;
        }
        for (a, row) in other.coeffs.iter().enumerate() {
            for (b, c) in row.iter().enumerate() {
                self.coeffs[a][b] += c;
            }
        }
    }

    pub fn coeff(&self, a: usize, b: usize) -> C64 {
        self.coeffs.get(a).and_then(|r| r.get(b)).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    /// Euclidean magnitude of the homogeneous part of total order `k`.
    pub fn order_magnitude(&self, k: usize) -> f64 {
        (0..=k).map(|a| self.coeff(a, k - a).norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_order(&self) -> usize {
        2 * (self.size() - 1)
    }

    pub fn eval(&self, zeta: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (a, row) in self.coeffs.iter().enumerate() {
            for (b, c) in row.iter().enumerate() {
                acc += c * zeta.powu(a as u32) * zeta.conj().powu(b as u32);
            }
        }
        acc
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

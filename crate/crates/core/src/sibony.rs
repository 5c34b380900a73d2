//! Explicit Sibony candidates and the lower bounds they certify.
//!
//! A candidate `u` is `C^2` near the base point, vanishes there, takes values in
//! `[0, 1]` on the domain and has `log u` plurisubharmonic. For any such `u`
//! the square root of its Levi form at the base point bounds the Sibony metric,
//! hence the invariant metric of a convex domain, from below.
//!
//! Two constructions are provided:
//!
//! * normal direction: `u = |(w_n + delta) / (w_n - delta)|^2 / 9` in frame
//!   coordinates, whose Levi form along `nu` is exactly `1 / (36 delta^2)`;
//! * complex-tangential direction: `u = |e^f - 1|^2 / M` (or the truncated
//!   series `F_N = f + ... + f^N / N!` in place of `e^f - 1`), where `f` is the
//!   holomorphic linear function whose real part defines the supporting
//!   hyperplane at the farthest contact point `Q`, scaled by `1 / delta`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cvec::{self, CVector, C64};
use crate::domain::{base_point, BoundaryFrame, ComplexDirection, ConvexDomain};
use crate::error::{MetricError, Result};
use crate::line::{max_radius, ContactPoint, RayOptions};
use crate::sampling;

/// Headroom applied to the supremum bound of `|F|^2`.
pub const NORMALIZATION_HEADROOM: f64 = 1.05;
pub const MAX_TRUNCATION: usize = 512;
/// Two independent estimates of `sup |f|` may differ by at most this fraction.
pub const SUP_STABILITY: f64 = 0.20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "normal_eq416")]
    NormalMobius,
    #[serde(rename = "tangential_GN")]
    TangentialTruncated,
    #[serde(rename = "tangential_exp_limit")]
    TangentialExpLimit,
    #[serde(rename = "user")]
    User,
}

/// `f(z) = sum_j coeffs_j (z - base)_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFunctional {
    pub coeffs: CVector,
    pub base: CVector,
    /// The same coefficients in the frame whose first axis is the contact line.
    pub frame_coeffs: Option<CVector>,
}

impl LinearFunctional {
    pub fn eval(&self, z: &CVector) -> C64 {
        self.coeffs.iter().zip(z.iter().zip(self.base.iter())).map(|(c, (a, b))| c * (a - b)).sum()
    }

    /// Holomorphic derivative applied to `xi`.
    pub fn apply(&self, xi: &CVector) -> C64 {
        cvec::pairing(&self.coeffs, xi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentialCandidateParams {
    pub frame_point: CVector,
    pub normal: CVector,
    pub contact: ContactPoint,
    pub delta: f64,
    /// Truncation order; 0 selects the closed form `e^f - 1`.
    pub n: usize,
    /// Normalization `M` with `u = |F|^2 / M`.
    pub m: f64,
    pub f: LinearFunctional,
    pub re_f_at_contact: f64,
    pub sup_f: Option<f64>,
    pub truncation_capped: bool,
}

type UserFn = dyn Fn(&CVector) -> f64 + Send + Sync;

#[derive(Clone)]
enum CandidateKind {
    Normal { p: CVector, nu: CVector, delta: f64 },
    Tangential(Box<TangentialCandidateParams>),
    User { label: String, u: Arc<UserFn> },
}

/// A real function `u` with a designated base point, offered to the Sibony
/// supremum.
#[derive(Clone)]
pub struct ScalarCandidate {
    pub base_point: CVector,
    pub provenance: Provenance,
    kind: CandidateKind,
}

impl fmt::Debug for ScalarCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarCandidate")
            .field("base_point", &self.base_point)
            .field("provenance", &self.provenance)
            .finish()
    }
}

/// JSON replay record of a candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateExport {
    pub provenance: Provenance,
    pub base_point: CVector,
    pub parameters: serde_json::Value,
}

impl ScalarCandidate {
    /// Wraps an arbitrary function; its Levi form is taken by finite differences.
    pub fn user<F>(label: impl Into<String>, base_point: CVector, u: F) -> Self
    where
        F: Fn(&CVector) -> f64 + Send + Sync + 'static,
    {
        Self {
            base_point,
            provenance: Provenance::User,
            kind: CandidateKind::User { label: label.into(), u: Arc::new(u) },
        }
    }

    pub fn evaluate(&self, z: &CVector) -> f64 {
        match &self.kind {
            CandidateKind::Normal { p, nu, delta } => {
                let w: C64 = z.iter().zip(p.iter()).zip(nu.iter()).map(|((a, b), v)| (a - b) * v.conj()).sum();
                ((w + delta) / (w - delta)).norm_sqr() / 9.0
            }
            CandidateKind::Tangential(t) => {
                if !t.m.is_finite() {
                    // capped truncation whose tail bound overflows: u = 0
                    return 0.0;
                }
                let fz = t.f.eval(z);
                truncated_exp_m1(fz, t.n).norm_sqr() / t.m
            }
            CandidateKind::User { u, .. } => u(z),
        }
    }

    /// `sum_ij d^2 u / dz_i d conj(z_j) (base) xi_i conj(xi_j)`.
    pub fn levi_at_base(&self, xi: &CVector) -> f64 {
        match &self.kind {
            CandidateKind::Normal { nu, delta, .. } => {
                cvec::hermitian(xi, nu).norm_sqr() / (36.0 * delta * delta)
            }
            CandidateKind::Tangential(t) => t.f.apply(xi).norm_sqr() / t.m,
            CandidateKind::User { u, .. } => {
                let h = 1e-4 * (1.0 + cvec::norm(&self.base_point));
                crate::psh::levi_form(|z| u(z), &self.base_point, xi, h)
            }
        }
    }

    pub fn tangential_params(&self) -> Option<&TangentialCandidateParams> {
        match &self.kind {
            CandidateKind::Tangential(t) => Some(t),
            _ => None,
        }
    }

    pub fn export(&self) -> CandidateExport {
        let parameters = match &self.kind {
            CandidateKind::Normal { p, nu, delta } => serde_json::json!({
                "boundary_point": p,
                "normal": nu,
                "delta": delta,
            }),
            CandidateKind::Tangential(t) => serde_json::to_value(t).unwrap_or(serde_json::Value::Null),
            CandidateKind::User { label, .. } => serde_json::json!({ "label": label }),
        };
        CandidateExport { provenance: self.provenance, base_point: self.base_point.clone(), parameters }
    }
}

/// `e^f - 1` without cancellation near `f = 0`.
pub fn exp_m1(f: C64) -> C64 {
    let (s, c) = f.im.sin_cos();
    let em1 = f.re.exp_m1();
    let half = (0.5 * f.im).sin();
    C64::new(em1 * c - 2.0 * half * half, f.re.exp() * s)
}

/// `F_N(f) = f + f^2/2! + ... + f^N/N!`; `N = 0` is the closed form `e^f - 1`.
pub fn truncated_exp_m1(f: C64, n: usize) -> C64 {
    if n == 0 {
        return exp_m1(f);
    }
    if f.norm() < (n + 1) as f64 {
        // tail terms decrease from the first one on
        let closed = exp_m1(f);
        let lead = (n + 1) as f64 * f.norm().ln() - log_factorial(n + 1);
        if lead < closed.norm().ln() - 45.0 {
            return closed;
        }
        closed - exp_tail(f, n)
    } else {
        let mut term = C64::new(1.0, 0.0);
        let mut acc = C64::new(0.0, 0.0);
        for k in 1..=n {
            term *= f / k as f64;
            acc += term;
        }
        acc
    }
}

fn log_factorial(k: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut acc = 0.0;
        let mut out = vec![0.0];
        for j in 1..=MAX_TRUNCATION + 1 {
            acc += (j as f64).ln();
            out.push(acc);
        }
        out
    });
    match table.get(k) {
        Some(&v) => v,
        None => table[MAX_TRUNCATION + 1] + (MAX_TRUNCATION + 2..=k).map(|j| (j as f64).ln()).sum::<f64>(),
    }
}

/// `sum_{k > n} f^k / k!` for `|f| < n + 1`.
fn exp_tail(f: C64, n: usize) -> C64 {
    if f.norm() == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let k0 = (n + 1) as f64;
    let mut term = (f.ln() * k0 - log_factorial(n + 1)).exp();
    let mut acc = C64::new(0.0, 0.0);
    let mut k = n + 1;
    loop {
        acc += term;
        k += 1;
        term *= f / k as f64;
        if term.norm() <= 1e-18 * acc.norm().max(f64::MIN_POSITIVE) || k > n + 2000 {
            break;
        }
    }
    acc
}

/// `sum_{k > n} s^k / k!` for every `n` in `0..=max_n`, summed from the top.
fn real_tails(s: f64, max_n: usize) -> Vec<f64> {
    let top = max_n.max((2.0 * s) as usize) + 60;
    let mut log_terms = Vec::with_capacity(top + 1);
    let mut lf = 0.0;
    for k in 0..=top {
        if k > 0 {
            lf += (k as f64).ln();
        }
        log_terms.push(k as f64 * s.ln() - lf);
    }
    let mut suffix = vec![0.0; top + 2];
    for k in (0..=top).rev() {
        suffix[k] = suffix[k + 1] + log_terms[k].exp();
    }
    (0..=max_n).map(|n| suffix[n + 1]).collect()
}

/// Smallest `N` with `sum_{k > N} S^k / k! < 1`, capped at [`MAX_TRUNCATION`].
/// Returns `(N, capped)`; `S = 0` gives the sentinel `N = 0`.
pub fn truncation_order(sup_f: f64) -> (usize, bool) {
    if !(sup_f > 0.0) {
        return (0, false);
    }
    let tails = real_tails(sup_f, MAX_TRUNCATION);
    match tails.iter().position(|&t| t < 1.0) {
        Some(n) => (n, false),
        None => (MAX_TRUNCATION, true),
    }
}

/// Tail bound `sum_{k > n} S^k / k!`.
pub fn truncation_tail(sup_f: f64, n: usize) -> f64 {
    if !(sup_f > 0.0) {
        return 0.0;
    }
    real_tails(sup_f, n)[n]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationChoice {
    pub n: usize,
    pub sup_f: f64,
    pub capped: bool,
}

/// Estimates `S = sup |f|` on two independent interior sample sets and picks
/// the truncation order for that `S`.
pub fn choose_truncation_n<R: Rng + ?Sized>(
    f: &LinearFunctional,
    domain: &ConvexDomain,
    samples: usize,
    rng: &mut R,
) -> Result<TruncationChoice> {
    let sup = |rng: &mut R| {
        sampling::sample_interior(domain, samples, rng)
            .iter()
            .map(|z| f.eval(z).norm())
            .fold(0.0f64, f64::max)
    };
    let first = sup(rng);
    let second = sup(rng);
    let hi = first.max(second);
    if hi > 0.0 && (first - second).abs() > SUP_STABILITY * hi {
        return Err(MetricError::NormalizationUnstable { first, second });
    }
    let (n, capped) = truncation_order(hi);
    if capped {
        log::warn!("truncation order capped at {MAX_TRUNCATION} for sup|f| = {hi}");
    }
    Ok(TruncationChoice { n, sup_f: hi, capped })
}

/// Candidate for the normal direction, built from the frame at `P`.
pub fn normal_candidate(frame: &BoundaryFrame, delta: f64) -> Result<ScalarCandidate> {
    if !(delta > 0.0) {
        return Err(MetricError::ConfigInvalid(format!("delta must be positive, got {delta}")));
    }
    let base = &frame.p - &frame.nu.xi * C64::new(delta, 0.0);
    Ok(ScalarCandidate {
        base_point: base,
        provenance: Provenance::NormalMobius,
        kind: CandidateKind::Normal { p: frame.p.clone(), nu: frame.nu.xi.clone(), delta },
    })
}

/// `f = (1/delta) sum_j d rho/dz_j (Q) (z - P_delta)_j`, i.e. in the frame with
/// `Q = (R, 0, ..., -delta)` the function
/// `(1/delta)(sum_{j<n} d_j rho(Q) z_j + d_n rho(Q)(z_n + delta))`.
pub fn linear_functional(
    domain: &ConvexDomain,
    frame: &BoundaryFrame,
    contact: &ContactPoint,
    delta: f64,
) -> Result<LinearFunctional> {
    let base = &frame.p - &frame.nu.xi * C64::new(delta, 0.0);
    let scale = 1.0 + cvec::norm(&base);
    let expected_q = &contact.center + &contact.line_direction * C64::new(contact.radius, 0.0);
    if cvec::norm(&(&contact.center - &base)) > 1e-10 * scale
        || cvec::norm(&(&expected_q - &contact.q)) > 1e-10 * scale
        || cvec::hermitian(&contact.line_direction, &frame.nu.xi).norm() > 1e-8
    {
        return Err(MetricError::FrameMisaligned);
    }
    let coeffs = domain.gradient(&contact.q) / C64::new(delta, 0.0);
    let frame_coeffs = if frame.dim() >= 2 {
        let aligned = frame.align_first_axis(&ComplexDirection::new(contact.line_direction.clone()))?;
        Some(aligned.u.map(|c| c.conj()) * &coeffs)
    } else {
        None
    };
    Ok(LinearFunctional { coeffs, base, frame_coeffs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateOptions {
    pub ray: RayOptions,
    /// Samples per set for the `sup |f|` estimate (truncated form only).
    pub samples: usize,
    pub seed: u64,
}

impl Default for CandidateOptions {
    fn default() -> Self {
        Self { ray: RayOptions::default(), samples: 10_000, seed: 0 }
    }
}

/// Tangential candidate `u = |F|^2 / M` with `F = e^f - 1` (closed form) or
/// `F = F_N`.
///
/// `M = 1.05 (e^{Re f(Q)} + 1 + max(1, tail))^2`: convexity puts the domain
/// below the supporting hyperplane at `Q`, so `Re f < Re f(Q)` on it and
/// `|e^f - 1| <= e^{Re f(Q)} + 1`, while the truncation adds at most `tail`,
/// which is `< 1` unless the order was capped.
pub fn tangential_candidate(
    domain: &ConvexDomain,
    frame: &BoundaryFrame,
    xi: &ComplexDirection,
    delta: f64,
    use_closed_form: bool,
    opts: &CandidateOptions,
) -> Result<ScalarCandidate> {
    let xi = xi.normalized()?;
    if cvec::hermitian(&xi.xi, &frame.nu.xi).norm() > 1e-8 {
        return Err(MetricError::ConfigInvalid("tangential candidate needs a complex-tangential direction".into()));
    }
    let p_delta = base_point(domain, &frame.p, &frame.nu, delta)?;
    let ray = RayOptions { initial_step: Some(delta), ..opts.ray };
    let contact = max_radius(domain, &p_delta, &xi, &ray)?;
    let f = linear_functional(domain, frame, &contact, delta)?;
    let re_fq = f.eval(&contact.q).re;

    let (n, tail, sup_f, capped) = if use_closed_form {
        (0, 0.0, None, false)
    } else {
        let mut rng = sampling::rng_for(opts.seed, 0x7461_6e67);
        let choice = choose_truncation_n(&f, domain, opts.samples, &mut rng)?;
        // N = 0 only for f = 0, where F_N and e^f - 1 coincide
        (choice.n, truncation_tail(choice.sup_f, choice.n), Some(choice.sup_f), choice.capped)
    };
    let sup_bound = re_fq.exp() + 1.0 + tail.max(1.0);
    let m = NORMALIZATION_HEADROOM * sup_bound * sup_bound;
    let provenance = if use_closed_form { Provenance::TangentialExpLimit } else { Provenance::TangentialTruncated };
    let params = TangentialCandidateParams {
        frame_point: frame.p.clone(),
        normal: frame.nu.xi.clone(),
        contact,
        delta,
        n,
        m,
        f,
        re_f_at_contact: re_fq,
        sup_f,
        truncation_capped: capped,
    };
    Ok(ScalarCandidate { base_point: p_delta, provenance, kind: CandidateKind::Tangential(Box::new(params)) })
}

/// `sqrt(levi_at_base(xi))`, a lower bound for the Sibony metric at the base
/// point.
pub fn sibony_lower_bound(candidate: &ScalarCandidate, xi: &CVector) -> Result<f64> {
    let levi = candidate.levi_at_base(xi);
    if levi < -1e-10 {
        return Err(MetricError::NegativeLevi { value: levi });
    }
    Ok(levi.max(0.0).sqrt())
}

/// Lower bound `|a| / (6 delta)` for `X = a nu + b T` with `T` complex
/// tangential; only the normal component registers in the normal candidate's
/// Levi form. Any real `a` is accepted.
pub fn mixed_lower_bound(a: f64, delta: f64) -> f64 {
    a.abs() / (6.0 * delta)
}

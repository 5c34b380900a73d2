use proptest::prelude::*;

use cxmetric::corpus::{self, Direction, STANDARD_CORPUS};
use cxmetric::cvec::{self, CVector, C64};
use cxmetric::disc::affine_disc_bound;
use cxmetric::domain::{base_point, normalize_frame};
use cxmetric::line::RayOptions;
use cxmetric::psh::{bnw_constant, random_admissible, unitary_invariance_check, BNWSample};
use cxmetric::regression::log_spaced;
use cxmetric::sampling::rng_for;
use cxmetric::scaling::{fit_exponent, BoundRecord, Field};
use cxmetric::sibony::{
    normal_candidate, sibony_lower_bound, tangential_candidate, truncation_order, truncation_tail, CandidateOptions,
};
use cxmetric::{BoundaryFrame, ComplexDirection, ConvexDomain};

fn north(id: &str) -> (ConvexDomain, BoundaryFrame, ComplexDirection) {
    let domain = corpus::load_domain(id).unwrap();
    let p = corpus::resolve_point(&domain, "north").unwrap();
    let frame = normalize_frame(&domain, &p).unwrap();
    let t = match corpus::resolve_direction(&frame, "tangent:1").unwrap() {
        Direction::Tangential(t) => t,
        Direction::Normal => unreachable!(),
    };
    (domain, frame, t)
}

fn ray(delta: f64) -> RayOptions {
    RayOptions { theta_samples: 64, initial_step: Some(delta), ..RayOptions::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lower_bound_is_homogeneous(which in 0usize..3, log_delta in -4.0f64..-1.0, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        prop_assume!(re.hypot(im) > 1e-3);
        let (domain, frame, t) = north(STANDARD_CORPUS[which]);
        let delta = 10f64.powf(log_delta);
        let opts = CandidateOptions { ray: ray(delta), ..CandidateOptions::default() };
        let c = tangential_candidate(&domain, &frame, &t, delta, true, &opts).unwrap();
        let scale = C64::new(re, im);
        let base = sibony_lower_bound(&c, &t.xi).unwrap();
        let scaled = sibony_lower_bound(&c, &(&t.xi * scale)).unwrap();
        prop_assert!((scaled - scale.norm() * base).abs() <= 1e-12 * scaled.max(1.0));
        let n = normal_candidate(&frame, delta).unwrap();
        let nb = sibony_lower_bound(&n, &frame.nu.xi).unwrap();
        let ns = sibony_lower_bound(&n, &(&frame.nu.xi * scale)).unwrap();
        prop_assert!((ns - scale.norm() * nb).abs() <= 1e-12 * ns.max(1.0));
    }

    #[test]
    fn lower_never_exceeds_upper(which in 0usize..3, log_delta in -4.0f64..-1.0, normal in any::<bool>()) {
        let (domain, frame, t) = north(STANDARD_CORPUS[which]);
        let delta = 10f64.powf(log_delta);
        let p_delta = base_point(&domain, &frame.p, &frame.nu, delta).unwrap();
        let (lower, xi) = if normal {
            (sibony_lower_bound(&normal_candidate(&frame, delta).unwrap(), &frame.nu.xi).unwrap(), frame.nu.clone())
        } else {
            let opts = CandidateOptions { ray: ray(delta), ..CandidateOptions::default() };
            let c = tangential_candidate(&domain, &frame, &t, delta, true, &opts).unwrap();
            (sibony_lower_bound(&c, &t.xi).unwrap(), t.clone())
        };
        let upper = affine_disc_bound(&domain, &p_delta, &xi, &ray(delta)).unwrap().value;
        prop_assert!(lower <= upper * (1.0 + 1e-9), "lower {} upper {}", lower, upper);
    }

    #[test]
    fn bnw_constant_is_scale_invariant(m in 3usize..7, seed in any::<u64>(), lambda in 1e-3f64..1e3) {
        let sample = random_admissible(m, 1.0, 200, &mut rng_for(seed, 0)).unwrap();
        let scaled = BNWSample::new(sample.coeffs.iter().map(|a| a * lambda).collect(), sample.r, sample.grid).unwrap();
        let a = bnw_constant(&sample).unwrap();
        let b = bnw_constant(&scaled).unwrap();
        prop_assert!(a > 0.0);
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn truncation_order_is_minimal(s in 1e-3f64..150.0) {
        let (n, capped) = truncation_order(s);
        prop_assert!(!capped);
        prop_assert!(truncation_tail(s, n) < 1.0);
        if n > 0 {
            prop_assert!(truncation_tail(s, n - 1) >= 1.0);
        }
    }

    #[test]
    fn bounds_are_unitarily_invariant(which in 0usize..3, seed in any::<u64>(), log_delta in -3.0f64..-1.0, shift in prop::collection::vec(-2.0f64..2.0, 4)) {
        let (domain, frame, t) = north(STANDARD_CORPUS[which]);
        let u = cvec::random_unitary(2, &mut rng_for(seed, 5));
        let shift: CVector = cvec::from_real(&shift);
        let delta = 10f64.powf(log_delta);
        for xi in [&t.xi, &frame.nu.xi] {
            let r = unitary_invariance_check(&domain, &frame.p, xi, delta, &u, &shift, 1e-6).unwrap();
            prop_assert!(r.passed, "{:?}", r);
        }
    }

    #[test]
    fn exponent_fit_recovers_power_laws(slope in -2.0f64..2.0, scale in 1e-3f64..1e3) {
        let records: Vec<BoundRecord> = log_spaced(1e-4, 1e-1, 12)
            .into_iter()
            .map(|delta| BoundRecord {
                delta,
                lower: Some(scale * delta.powf(slope)),
                upper: None,
                oracle: None,
                m_used: 2,
                theta_star: None,
                r_xi: None,
                grad_ratio: None,
            })
            .collect();
        let fit = fit_exponent(&records, Field::Lower).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
        prop_assert!(fit.r2 > 1.0 - 1e-9 || slope.abs() < 1e-9);
    }
}

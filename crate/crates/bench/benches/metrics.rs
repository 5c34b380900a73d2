use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use cxmetric::corpus;
use cxmetric::disc::{affine_disc_bound, recentered_disc_bound};
use cxmetric::domain::{base_point, normalize_frame};
use cxmetric::line::{line_type, max_radius, RayOptions};
use cxmetric::psh::{bnw_family, verify_candidate, LeviProbe};
use cxmetric::sampling::rng_for;
use cxmetric::scaling::{sweep, Method, SweepConfig};
use cxmetric::sibony::{tangential_candidate, CandidateOptions};
use cxmetric::ComplexDirection;

fn setup(id: &str) -> (cxmetric::ConvexDomain, cxmetric::BoundaryFrame, ComplexDirection) {
    let domain = corpus::load_domain(id).unwrap();
    let p = corpus::resolve_point(&domain, "north").unwrap();
    let frame = normalize_frame(&domain, &p).unwrap();
    let xi = match corpus::resolve_direction(&frame, "tangent:1").unwrap() {
        corpus::Direction::Tangential(t) => t,
        corpus::Direction::Normal => unreachable!(),
    };
    (domain, frame, xi)
}

fn radii(c: &mut Criterion) {
    let (domain, frame, xi) = setup("cxellipsoid:3,1");
    let p_delta = base_point(&domain, &frame.p, &frame.nu, 1e-3).unwrap();
    let ray = RayOptions { initial_step: Some(1e-3), ..RayOptions::default() };
    c.bench_function("max_radius cxellipsoid:3,1", |b| {
        b.iter(|| max_radius(&domain, black_box(&p_delta), &xi, &ray).unwrap())
    });
    c.bench_function("line_type cxellipsoid:3,1", |b| b.iter(|| line_type(&domain, black_box(&frame.p), &xi, 8).unwrap()));
}

fn bounds(c: &mut Criterion) {
    let (domain, frame, xi) = setup("cxellipsoid:2,1");
    let delta = 1e-3;
    let p_delta = base_point(&domain, &frame.p, &frame.nu, delta).unwrap();
    let ray = RayOptions { initial_step: Some(delta), ..RayOptions::default() };
    let opts = CandidateOptions { ray, ..CandidateOptions::default() };
    c.bench_function("closed-form candidate", |b| {
        b.iter(|| tangential_candidate(&domain, &frame, &xi, black_box(delta), true, &opts).unwrap())
    });
    c.bench_function("affine disc", |b| b.iter(|| affine_disc_bound(&domain, black_box(&p_delta), &xi, &ray).unwrap()));
    let mut group = c.benchmark_group("slow");
    group.sample_size(10);
    group.bench_function("recentered disc", |b| {
        b.iter(|| recentered_disc_bound(&domain, black_box(&p_delta), &xi, &frame.nu, 200, &ray).unwrap())
    });
    let candidate = tangential_candidate(&domain, &frame, &xi, delta, true, &opts).unwrap();
    let probe = LeviProbe::standard(2, &mut rng_for(1, 2));
    group.bench_function("verify 1000 samples", |b| {
        b.iter(|| verify_candidate(&candidate, &domain, 1000, &probe, &mut rng_for(1, 1)).unwrap())
    });
    group.bench_function("ball sweep", |b| {
        let mut config = SweepConfig::new("ball:2", "tangent:1");
        config.methods = vec![Method::Sibony, Method::Disc, Method::Oracle];
        b.iter(|| sweep(black_box(&config)).unwrap())
    });
    group.bench_function("bnw m=4", |b| b.iter(|| bnw_family(4, 1.0, 50, 400, black_box(7)).unwrap()));
    group.finish();
}

criterion_group!(benches, radii, bounds);
criterion_main!(benches);

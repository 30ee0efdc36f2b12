//! Benchmarks for the hot paths of `genlab-core`. Inputs are deterministic
//! closed-form sequences so timings do not depend on a random stream.

use std::hint::black_box;
use std::time::Duration;

use criterion::{BenchmarkId, Criterion};
use genlab_core::bounds::{default_validation_space, monte_carlo_bound_validation};
use genlab_core::capacity::{rademacher_exact, uniform_square, vc_dimension, FiniteHypothesisClass, Halfplanes2D};
use genlab_core::compression::{bound_pipeline, linear_task, quantize, serialize_and_compress, LinearThreshold};
use genlab_core::double_descent::min_norm_least_squares;
use genlab_core::evidence::gp_log_marginal_likelihood;
use genlab_core::softbias::{PolynomialProblem, Precision, RegularizerSpec};
use genlab_core::{KernelSpec, RiskSpec};
use nalgebra::{DMatrix, DVector};

fn inputs(n: usize) -> Vec<f64> {
    (0..n).map(|i| 3.0 * ((i as f64 + 0.5) * 1.618_033_988_75).sin()).collect()
}

fn targets(x: &[f64]) -> Vec<f64> {
    x.iter().enumerate().map(|(i, v)| v + (std::f64::consts::PI * v).cos() + 0.1 * (i as f64 * 7.1).sin()).collect()
}

fn softbias(c: &mut Criterion) {
    let mut g = c.benchmark_group("softbias");
    let x = inputs(50);
    let y = targets(&x);
    let p = PolynomialProblem::new(&x, &y, 15, RegularizerSpec::ORDERED_POWER).unwrap();
    g.bench_function("fit_deg15_n50_double", |b| b.iter(|| p.fit(black_box(0.5), Precision::Double).unwrap()));
    let x = inputs(30);
    let y = targets(&x);
    let p = PolynomialProblem::new(&x, &y, 150, RegularizerSpec::GEOMETRIC_TWO).unwrap();
    g.bench_function("fit_deg150_n30_double", |b| b.iter(|| p.fit(black_box(1e-4), Precision::Double).unwrap()));
    // The dual system is factored lazily on first use; warm it up once.
    p.fit(1e-30, Precision::Extended).unwrap();
    g.bench_function("fit_deg150_n30_extended", |b| b.iter(|| p.fit(black_box(1e-30), Precision::Extended).unwrap()));
    g.finish();
}

fn min_norm(c: &mut Criterion) {
    let mut g = c.benchmark_group("min_norm_least_squares");
    for &(n, d) in &[(100, 50), (100, 100), (100, 800)] {
        let x = DMatrix::from_fn(n, d, |i, j| ((i * 31 + j * 17) as f64 * 0.37).sin());
        let y = DVector::from_fn(n, |i, _| (i as f64 * 0.9).cos());
        g.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{d}")), &(x, y), |b, (x, y)| {
            b.iter(|| min_norm_least_squares(x, y))
        });
    }
    g.finish();
}

fn evidence(c: &mut Criterion) {
    let mut g = c.benchmark_group("gp_log_marginal_likelihood");
    let kernel = KernelSpec::default();
    for n in [60, 240] {
        let x = inputs(n);
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &(x, y), |b, (x, y)| {
            b.iter(|| gp_log_marginal_likelihood(x, y, &kernel).unwrap())
        });
    }
    g.finish();
}

fn capacity(c: &mut Criterion) {
    let mut g = c.benchmark_group("capacity");
    let class = FiniteHypothesisClass::complete_sign_class(10).unwrap();
    let points: Vec<usize> = (0..10).collect();
    g.bench_function("rademacher_exact_complete_n10", |b| b.iter(|| rademacher_exact(&class, &points).unwrap()));
    g.bench_function("vc_halfplanes", |b| {
        b.iter(|| vc_dimension(&Halfplanes2D, uniform_square, 5, 20, black_box(1)).unwrap())
    });
    g.finish();
}

fn bounds(c: &mut Criterion) {
    let mut g = c.benchmark_group("bounds");
    let space = default_validation_space();
    let spec = RiskSpec::zero_one(100, 0.05).unwrap();
    g.bench_function("validation_1000_trials", |b| {
        b.iter(|| monte_carlo_bound_validation(&space, spec, 1000, black_box(0)).unwrap())
    });
    g.finish();
}

fn compression(c: &mut Criterion) {
    let mut g = c.benchmark_group("compression");
    let data = linear_task(10_000, 0.1, 0);
    let model = LinearThreshold::fit(&data);
    let spec = RiskSpec::zero_one(10_000, 0.05).unwrap();
    let params: Vec<f64> = (0..4096).map(|i| (i as f64 * 0.01).sin()).collect();
    let q = quantize(&params, 8).unwrap();
    g.bench_function("deflate_4096_params_8bit", |b| b.iter(|| serialize_and_compress(&q, "deflate").unwrap()));
    g.bench_function("bound_pipeline_n10000", |b| {
        b.iter(|| bound_pipeline(&model, &data, spec, 16, "deflate").unwrap())
    });
    g.finish();
}

pub fn benchmarks(c: &mut Criterion) {
    softbias(c);
    min_norm(c);
    evidence(c);
    capacity(c);
    bounds(c);
    compression(c);
}

/// Shorter runs than the criterion defaults; the slowest cases take
/// tens of milliseconds per iteration.
pub fn config() -> Criterion {
    Criterion::default().sample_size(20).measurement_time(Duration::from_secs(3)).warm_up_time(Duration::from_secs(1))
}

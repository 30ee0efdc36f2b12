mod common;

use genlab_core::bounds::{
    countable_hypothesis_bound, monte_carlo_bound_validation, HypothesisSpace, RiskModel, RiskSpec,
    ThresholdClassifiers,
};
use genlab_core::capacity::{rademacher_exact, rademacher_generalization_bound, FiniteHypothesisClass};
use genlab_core::compression::{
    balanced_task, bound_pipeline, linear_task, quantize, serialize_and_compress, ConstantClassifier, LinearThreshold,
};
use genlab_core::double_descent::{double_descent_sweep, generate_ensemble, DoubleDescentConfig};
use genlab_core::rng::StreamRng;
use genlab_core::softbias::{
    allsizes_experiment, benign_overfitting_experiment, rmse, AllsizesConfig, AllsizesModel, AllsizesProblem,
    BenignConfig, BenignTarget, PolynomialProblem, Precision, RegularizerSpec,
};
use rand::Rng;

#[test]
fn line_data_prefers_the_line() {
    let mut rng = common::Lcg(8);
    let x: Vec<f64> = (0..40).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let p = PolynomialProblem::new(&x, &x, 150, RegularizerSpec::GEOMETRIC_TWO).unwrap();
    let m = p.fit(1e-6, Precision::Auto).unwrap();
    let held: Vec<f64> = (0..101).map(|i| -1.0 + i as f64 / 50.0).collect();
    assert!(rmse(&m.predict(&held), &held) < 0.05);
    let w = m.coefficients();
    let total: f64 = w.iter().map(|v| v * v).sum();
    let high: f64 = w[2..].iter().map(|v| v * v).sum();
    assert!(high < 0.01 * total, "high-order share {}", high / total);
}

#[test]
fn benign_noise_is_interpolated() {
    let r = benign_overfitting_experiment(&BenignConfig::new(BenignTarget::Noise, 30), 0).unwrap();
    assert!(r.reached_goal && r.train_rmse <= 1e-2);
    assert!(r.test_rmse.is_none());
}

#[test]
fn benign_structured_beats_constant_predictor() {
    let r = benign_overfitting_experiment(&BenignConfig::new(BenignTarget::Structured, 50), 2).unwrap();
    let (lo, hi) = r.train_inputs.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    let grid: Vec<f64> = (0..200).map(|i| lo + (hi - lo) * i as f64 / 199.0).collect();
    let truth: Vec<f64> = grid.iter().map(|&x| BenignTarget::Structured.function(x).unwrap()).collect();
    let mean = r.train_targets.iter().sum::<f64>() / r.train_targets.len() as f64;
    let constant = rmse(&vec![mean; grid.len()], &truth);
    assert!(r.test_rmse.unwrap() < constant);
}

#[test]
fn benign_is_deterministic() {
    let c = BenignConfig::new(BenignTarget::Simple, 20);
    assert_eq!(benign_overfitting_experiment(&c, 42).unwrap(), benign_overfitting_experiment(&c, 42).unwrap());
}

#[test]
fn allsizes_examples() {
    let config = AllsizesConfig { n_grid: vec![10, 100], ..AllsizesConfig::default() };
    let t = allsizes_experiment(&config, 1).unwrap();
    let d2 = t.cell(AllsizesProblem::Degree2, 100, AllsizesModel::Deg2).unwrap();
    let ord = t.cell(AllsizesProblem::Degree2, 100, AllsizesModel::Deg15Ordered).unwrap();
    let pooled = (0.5 * (d2.std * d2.std + ord.std * ord.std)).sqrt();
    assert!((d2.mean - ord.mean).abs() <= pooled);
    let unreg = t.cell(AllsizesProblem::Cosine, 10, AllsizesModel::Deg15Unregularized).unwrap();
    let ord = t.cell(AllsizesProblem::Cosine, 10, AllsizesModel::Deg15Ordered).unwrap();
    assert!(unreg.mean >= ord.mean);
}

#[test]
fn feature_noise_has_zero_mean() {
    let y: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
    let e = generate_ensemble(&y, &y[..1], 100, 1.0, 5).unwrap();
    let mut total = 0.0;
    for c in 0..100 {
        for i in 0..100 {
            total += e.train_features[(i, c)] - y[i];
        }
    }
    let mean = total / 1e4;
    assert!(mean.abs() < 3.0 / 100.0, "mean noise {mean}");
}

#[test]
fn train_mse_falls_with_width() {
    let config = DoubleDescentConfig {
        n: 30,
        test_n: 50,
        d_grid: vec![3, 6, 10, 15, 20, 25, 30, 40, 60, 120],
        seeds: (0..10).collect(),
        alpha: 10.0,
        noise_std: 1.0,
    };
    let a = double_descent_sweep(&config).unwrap();
    for w in a.curve.windows(2) {
        if w[1].d <= 30 {
            assert!(w[1].train_mse <= w[0].train_mse + 1e-6);
        } else {
            assert!(w[1].train_mse <= 1e-8);
        }
    }
    assert_eq!(a, double_descent_sweep(&config).unwrap());
}

#[test]
fn constant_classifier_complexity_is_small() {
    let data = balanced_task(100_000, 3);
    let spec = RiskSpec::zero_one(100_000, 0.05).unwrap();
    let r = bound_pipeline(&ConstantClassifier { value: 1.0 }, &data, spec, 8, "deflate").unwrap();
    assert!(r.bound.complexity_term < 0.03, "{}", r.bound);
}

#[test]
fn linear_threshold_bound_is_nonvacuous() {
    let data = linear_task(100_000, 0.1, 4);
    let model = LinearThreshold::fit(&data);
    let spec = RiskSpec::zero_one(100_000, 0.05).unwrap();
    let r = bound_pipeline(&model, &data, spec, 16, "deflate").unwrap();
    assert!(r.artifact.bits <= 1600);
    assert!(r.bound.total < 0.5);
}

#[test]
fn more_quantization_bits_never_shrink_the_artifact() {
    let data = linear_task(1000, 0.1, 1);
    let m = LinearThreshold::fit(&data);
    let mut last = 0;
    for bits in [4, 8, 16, 32] {
        let a =
            serialize_and_compress(&quantize(&[m.bias, m.weights[0], m.weights[1]], bits).unwrap(), "deflate").unwrap();
        assert!(a.bits >= last);
        last = a.bits;
    }
}

#[test]
fn complete_class_vacuous_while_compression_bound_is_not() {
    let full = FiniteHypothesisClass::complete_sign_class(10).unwrap();
    let pts: Vec<usize> = (0..10).collect();
    let rad = rademacher_exact(&full, &pts).unwrap().value;
    let r = rademacher_generalization_bound(0.0, rad, RiskSpec::zero_one(10, 0.05).unwrap()).unwrap();
    assert!(r.complexity_term >= 1.0 && r.is_vacuous());
    let prior = genlab_core::bounds::prior_bits_from_complexity(64).unwrap();
    let c = countable_hypothesis_bound(0.1, RiskSpec::zero_one(100_000, 0.05).unwrap(), prior).unwrap();
    assert!(!c.is_vacuous());
}

/// Uniform risk in `[0, 1]` whose mean depends on the hypothesis.
struct UniformRisks(Vec<f64>);

impl RiskModel for UniformRisks {
    type Datum = f64;

    fn hypothesis_count(&self) -> usize {
        self.0.len()
    }

    fn sample(&self, rng: &mut StreamRng) -> f64 {
        rng.gen::<f64>()
    }

    fn risk(&self, h: usize, u: &f64) -> f64 {
        f64::from(u8::from(*u < self.0[h]))
    }

    fn expected_risk(&self, h: usize) -> f64 {
        self.0[h]
    }
}

#[test]
fn coverage_holds_across_corpus() {
    let trials = 4000;
    let delta = 0.1;
    let slack = 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt();
    let spec = RiskSpec::zero_one(50, delta).unwrap();

    let thresholds = ThresholdClassifiers::uniform_grid(8);
    let space = HypothesisSpace::new(thresholds, vec![1.0 / 8.0; 8]).unwrap();
    let r = monte_carlo_bound_validation(&space, spec, trials, 1).unwrap();
    assert!(r.violation_rate <= delta + slack, "uniform thresholds {}", r.violation_rate);

    let risks = UniformRisks((0..30).map(|k| 0.2 + 0.01 * k as f64).collect());
    let prior: Vec<f64> = {
        let w: Vec<f64> = (1..=30).map(|k| 1.0 / (k * k) as f64).collect();
        let s: f64 = w.iter().sum();
        w.iter().map(|v| v / s).collect()
    };
    let space = HypothesisSpace::new(risks, prior).unwrap();
    let r = monte_carlo_bound_validation(&space, spec, trials, 2).unwrap();
    assert!(r.violation_rate <= delta + slack, "bernoulli risks {}", r.violation_rate);
}

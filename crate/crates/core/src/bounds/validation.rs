//! Monte-Carlo check of the countable-hypothesis bound.
//!
//! Each trial draws a fresh training set, picks the empirical-risk minimizer
//! `h*` (lowest index on ties), and compares its exact expected risk with
//! `R̂(h*) + t(h*)`. The union-bound argument promises a violation rate of
//! at most δ even though `h*` depends on the data.

use rand::Rng;
use rayon::prelude::*;

use super::{threshold_from_log_inv_prior, RiskSpec};
use crate::error::{domain, Error, Result};
use crate::rng::{stream, StreamRng};

/// A finite hypothesis family together with the data law it is scored on.
pub trait RiskModel: Sync {
    type Datum: Send;

    fn hypothesis_count(&self) -> usize;

    fn sample(&self, rng: &mut StreamRng) -> Self::Datum;

    fn risk(&self, hypothesis: usize, datum: &Self::Datum) -> f64;

    /// Exact expected risk under the data law.
    fn expected_risk(&self, hypothesis: usize) -> f64;
}

/// A risk model plus a normalized prior over its hypotheses.
#[derive(Debug, Clone)]
pub struct HypothesisSpace<M> {
    model: M,
    prior: Vec<f64>,
    log_inv_prior: Vec<f64>,
}

impl<M: RiskModel> HypothesisSpace<M> {
    pub fn new(model: M, prior: Vec<f64>) -> Result<Self> {
        if prior.len() != model.hypothesis_count() {
            return Err(Error::Shape(format!(
                "{} prior weights for {} hypotheses",
                prior.len(),
                model.hypothesis_count()
            )));
        }
        if prior.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return domain("prior weights must be positive and finite");
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return domain(format!("prior weights sum to {total}, not 1"));
        }
        let log_inv_prior = prior.iter().map(|p| -p.ln()).collect();
        Ok(Self { model, prior, log_inv_prior })
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }
}

/// A labelled scalar input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Labelled {
    pub x: f64,
    pub label: bool,
}

/// Threshold classifiers `x >= b` on `[0, 1]` scored by zero-one loss.
///
/// Labels are Bernoulli(`positive_rate`); inputs are uniform on
/// `negative_support` or `positive_support` given the label. Overlapping
/// supports keep the Bayes risk away from zero.
#[derive(Debug, Clone)]
pub struct ThresholdClassifiers {
    pub thresholds: Vec<f64>,
    pub positive_rate: f64,
    pub negative_support: (f64, f64),
    pub positive_support: (f64, f64),
}

impl ThresholdClassifiers {
    /// `count` thresholds at the midpoints of a uniform grid on `[0, 1]`.
    pub fn uniform_grid(count: usize) -> Self {
        let thresholds = (0..count).map(|k| (k as f64 + 0.5) / count as f64).collect();
        Self { thresholds, positive_rate: 0.5, negative_support: (0.0, 0.7), positive_support: (0.3, 1.0) }
    }
}

fn uniform_cdf(x: f64, (lo, hi): (f64, f64)) -> f64 {
    ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
}

impl RiskModel for ThresholdClassifiers {
    type Datum = Labelled;

    fn hypothesis_count(&self) -> usize {
        self.thresholds.len()
    }

    fn sample(&self, rng: &mut StreamRng) -> Labelled {
        let label = rng.gen::<f64>() < self.positive_rate;
        let (lo, hi) = if label { self.positive_support } else { self.negative_support };
        Labelled { x: lo + (hi - lo) * rng.gen::<f64>(), label }
    }

    fn risk(&self, hypothesis: usize, datum: &Labelled) -> f64 {
        let predicted = datum.x >= self.thresholds[hypothesis];
        if predicted == datum.label {
            0.0
        } else {
            1.0
        }
    }

    fn expected_risk(&self, hypothesis: usize) -> f64 {
        let b = self.thresholds[hypothesis];
        let false_negative = uniform_cdf(b, self.positive_support);
        let false_positive = 1.0 - uniform_cdf(b, self.negative_support);
        self.positive_rate * false_negative + (1.0 - self.positive_rate) * false_positive
    }
}

/// 20 thresholds with a geometric prior of ratio 1/2, renormalized.
pub fn default_validation_space() -> HypothesisSpace<ThresholdClassifiers> {
    let model = ThresholdClassifiers::uniform_grid(20);
    let raw: Vec<f64> = (0..20).map(|k| 0.5f64.powi(k)).collect();
    let total: f64 = raw.iter().sum();
    let prior = raw.iter().map(|w| w / total).collect();
    HypothesisSpace::new(model, prior).expect("default prior is normalized")
}

/// What happened in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub selected: usize,
    pub empirical_risk: f64,
    pub expected_risk: f64,
    pub threshold: f64,
    /// `R̂(h*) + t(h*) - R(h*)`; negative means the bound was violated.
    pub margin: f64,
    /// Smallest margin over every hypothesis in the space.
    pub worst_margin: f64,
}

impl TrialOutcome {
    pub fn violated(&self) -> bool {
        self.margin < 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViolationReport {
    pub trials: usize,
    pub violations: usize,
    pub violation_rate: f64,
    pub delta: f64,
    pub seed: u64,
    pub outcomes: Vec<TrialOutcome>,
}

impl ViolationReport {
    pub const CSV_HEADER: &'static str =
        "trial,selected,empirical_risk,expected_risk,threshold,margin,worst_margin,violated";

    pub fn csv_rows(&self) -> impl Iterator<Item = String> + '_ {
        self.outcomes.iter().enumerate().map(|(i, o)| {
            format!(
                "{},{},{},{},{},{},{},{}",
                i,
                o.selected,
                o.empirical_risk,
                o.expected_risk,
                o.threshold,
                o.margin,
                o.worst_margin,
                u8::from(o.violated())
            )
        })
    }

    /// One-sided binomial allowance `δ + 3 sqrt(δ(1-δ)/trials)`.
    pub fn three_sigma_limit(&self) -> f64 {
        self.delta + 3.0 * (self.delta * (1.0 - self.delta) / self.trials as f64).sqrt()
    }

    pub fn summary(&self) -> String {
        format!(
            "trials={} violations={} rate={:.5} delta={} limit={:.5} seed={}",
            self.trials,
            self.violations,
            self.violation_rate,
            self.delta,
            self.three_sigma_limit(),
            self.seed
        )
    }
}

/// Run `trials` independent draws of `spec.n()` samples and count how often
/// the bound fails for the data-selected hypothesis.
pub fn monte_carlo_bound_validation<M: RiskModel>(
    space: &HypothesisSpace<M>,
    spec: RiskSpec,
    trials: usize,
    seed: u64,
) -> Result<ViolationReport> {
    if trials == 0 {
        return domain("at least one trial is required");
    }
    let model = &space.model;
    let count = model.hypothesis_count();
    let thresholds: Vec<f64> = space.log_inv_prior.iter().map(|&lip| threshold_from_log_inv_prior(lip, spec)).collect();
    let expected: Vec<f64> = (0..count).map(|h| model.expected_risk(h)).collect();
    let (lo, hi) = (spec.range_low(), spec.range_high());
    let n = spec.n() as usize;

    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(seed, "bounds/validation", trial as u64);
            let mut sums = vec![0.0; count];
            for _ in 0..n {
                let datum = model.sample(&mut rng);
                for (h, sum) in sums.iter_mut().enumerate() {
                    let r = model.risk(h, &datum);
                    if !(lo..=hi).contains(&r) {
                        return domain(format!("hypothesis {h} produced risk {r} outside [{lo}, {hi}]"));
                    }
                    *sum += r;
                }
            }
            let empirical: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
            let mut selected = 0;
            for h in 1..count {
                if empirical[h] < empirical[selected] {
                    selected = h;
                }
            }
            let margin_of = |h: usize| empirical[h] + thresholds[h] - expected[h];
            let worst_margin = (0..count).map(margin_of).fold(f64::INFINITY, f64::min);
            Ok(TrialOutcome {
                selected,
                empirical_risk: empirical[selected],
                expected_risk: expected[selected],
                threshold: thresholds[selected],
                margin: margin_of(selected),
                worst_margin,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let violations = outcomes.iter().filter(|o| o.violated()).count();
    Ok(ViolationReport {
        trials,
        violations,
        violation_rate: violations as f64 / trials as f64,
        delta: spec.delta(),
        seed,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Constant(f64);

    impl RiskModel for Constant {
        type Datum = ();

        fn hypothesis_count(&self) -> usize {
            1
        }

        fn sample(&self, _rng: &mut StreamRng) {}

        fn risk(&self, _h: usize, _d: &()) -> f64 {
            self.0
        }

        fn expected_risk(&self, _h: usize) -> f64 {
            self.0
        }
    }

    #[test]
    fn deterministic_data_never_violates() {
        let space = HypothesisSpace::new(Constant(0.3), vec![1.0]).unwrap();
        let spec = RiskSpec::zero_one(25, 0.05).unwrap();
        let report = monte_carlo_bound_validation(&space, spec, 200, 1).unwrap();
        assert_eq!(report.violations, 0);
        assert_eq!(report.violation_rate, 0.0);
    }

    #[test]
    fn rejects_unnormalized_prior() {
        let model = ThresholdClassifiers::uniform_grid(3);
        assert!(HypothesisSpace::new(model.clone(), vec![0.5, 0.5, 0.5]).is_err());
        assert!(HypothesisSpace::new(model, vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn out_of_range_risk_is_an_error() {
        let space = HypothesisSpace::new(Constant(2.0), vec![1.0]).unwrap();
        let spec = RiskSpec::zero_one(5, 0.05).unwrap();
        assert!(monte_carlo_bound_validation(&space, spec, 3, 1).is_err());
    }

    #[test]
    fn expected_risk_matches_simulation() {
        let model = ThresholdClassifiers::uniform_grid(5);
        let mut rng = stream(3, "test", 0);
        let draws: Vec<Labelled> = (0..200_000).map(|_| model.sample(&mut rng)).collect();
        for h in 0..5 {
            let mc = draws.iter().map(|d| model.risk(h, d)).sum::<f64>() / draws.len() as f64;
            let exact = model.expected_risk(h);
            // 4 sigma for a Bernoulli mean over 2e5 draws.
            assert!((mc - exact).abs() < 4.0 * (0.25f64 / 2e5).sqrt(), "h={h} mc={mc} exact={exact}");
        }
    }

    #[test]
    fn ties_pick_lowest_index_and_runs_replay() {
        let space = default_validation_space();
        let spec = RiskSpec::zero_one(10, 0.05).unwrap();
        let a = monte_carlo_bound_validation(&space, spec, 50, 42).unwrap();
        let b = monte_carlo_bound_validation(&space, spec, 50, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seed, 42);
        assert_eq!(a.outcomes.len(), 50);
    }

    #[test]
    fn loose_confidence_run() {
        let space = default_validation_space();
        let spec = RiskSpec::zero_one(100, 0.5).unwrap();
        let report = monte_carlo_bound_validation(&space, spec, 2000, 9).unwrap();
        assert!(report.violation_rate <= report.three_sigma_limit(), "{}", report.summary());
    }
}

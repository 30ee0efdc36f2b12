//! Countable-hypothesis, compression and PAC-Bayes generalization bounds.
//!
//! All logarithms are natural. Quantities measured in bits are converted
//! with `ln 2` at the boundary, and priors are carried as `ln 1/P(h)` so
//! that hypotheses with thousands of bits of complexity never underflow.
//!
//! The Kraft normalizer of a prefix-free code prior (`Z <= 1`) only
//! loosens the chain `ln 1/P(h) <= K(h|A) ln 2`, so it has no runtime
//! representation here.

mod validation;

pub use validation::{
    default_validation_space, monte_carlo_bound_validation, HypothesisSpace, Labelled, RiskModel, ThresholdClassifiers,
    TrialOutcome, ViolationReport,
};

use std::f64::consts::LN_2;
use std::fmt;

use crate::error::{domain, Result};

/// Sample count, confidence and loss range shared by every bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskSpec {
    n: u64,
    delta: f64,
    range_low: f64,
    range_width: f64,
}

impl RiskSpec {
    pub fn new(n: u64, delta: f64, range_low: f64, range_width: f64) -> Result<Self> {
        if n == 0 {
            return domain("sample count n must be at least 1");
        }
        if !(delta > 0.0 && delta < 1.0) {
            return domain(format!("delta must lie in (0, 1), got {delta}"));
        }
        if !range_low.is_finite() || !range_width.is_finite() || range_width < 0.0 {
            return domain(format!(
                "loss range must be finite with nonnegative width, got low={range_low} width={range_width}"
            ));
        }
        Ok(Self { n, delta, range_low, range_width })
    }

    /// Zero-one loss: range `[0, 1]`.
    pub fn zero_one(n: u64, delta: f64) -> Result<Self> {
        Self::new(n, delta, 0.0, 1.0)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn range_low(&self) -> f64 {
        self.range_low
    }

    pub fn range_width(&self) -> f64 {
        self.range_width
    }

    pub fn range_high(&self) -> f64 {
        self.range_low + self.range_width
    }

    pub fn with_n(self, n: u64) -> Result<Self> {
        Self::new(n, self.delta, self.range_low, self.range_width)
    }

    pub fn with_delta(self, delta: f64) -> Result<Self> {
        Self::new(self.n, delta, self.range_low, self.range_width)
    }
}

/// Where a prior mass came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorSource {
    ExplicitProbability,
    ComplexityBits,
    KlDivergence,
}

impl PriorSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            PriorSource::ExplicitProbability => "explicit-probability",
            PriorSource::ComplexityBits => "complexity-bits",
            PriorSource::KlDivergence => "kl-divergence",
        }
    }
}

/// `ln 1/P(h)` in nats, or a KL divergence standing in for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorMass {
    log_inv_prior: f64,
    source: PriorSource,
}

impl PriorMass {
    pub fn new(log_inv_prior: f64, source: PriorSource) -> Result<Self> {
        if !log_inv_prior.is_finite() || log_inv_prior < 0.0 {
            return domain(format!("log 1/P(h) must be finite and nonnegative, got {log_inv_prior}"));
        }
        Ok(Self { log_inv_prior, source })
    }

    pub fn from_probability(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return domain(format!("prior probability must lie in (0, 1], got {p}"));
        }
        Self::new(-p.ln(), PriorSource::ExplicitProbability)
    }

    pub fn from_kl(kl: f64) -> Result<Self> {
        Self::new(kl, PriorSource::KlDivergence)
    }

    pub fn log_inv_prior(&self) -> f64 {
        self.log_inv_prior
    }

    pub fn source(&self) -> PriorSource {
        self.source
    }

    /// The same mass expressed in bits.
    pub fn bits(&self) -> f64 {
        self.log_inv_prior / LN_2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    CountableHypothesis,
    PacBayes,
    Rademacher,
    VcDimension,
    FatShattering,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::CountableHypothesis => "countable-hypothesis",
            BoundKind::PacBayes => "pac-bayes",
            BoundKind::Rademacher => "rademacher",
            BoundKind::VcDimension => "vc-dimension",
            BoundKind::FatShattering => "fat-shattering",
        }
    }
}

/// A bound split into its empirical and complexity parts.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub empirical_risk: f64,
    pub complexity_term: f64,
    pub total: f64,
    pub spec: RiskSpec,
    /// Prior used by prior-based bounds; `None` for capacity bounds.
    pub prior: Option<PriorMass>,
    /// Byte classes left out of the complexity count (conditioning set).
    pub excluded_classes: Vec<String>,
}

impl BoundReport {
    pub(crate) fn new(
        kind: BoundKind,
        empirical_risk: f64,
        complexity_term: f64,
        spec: RiskSpec,
        prior: Option<PriorMass>,
    ) -> Self {
        Self {
            kind,
            empirical_risk,
            complexity_term,
            total: empirical_risk + complexity_term,
            spec,
            prior,
            excluded_classes: Vec::new(),
        }
    }

    /// True when the total reaches the top of the loss range, so the bound says nothing.
    pub fn is_vacuous(&self) -> bool {
        self.total >= self.spec.range_high()
    }

    pub const CSV_HEADER: &'static str =
        "kind,n,delta,range_low,range_width,empirical_risk,complexity_term,total,log_inv_prior,prior_source,excluded";

    pub fn csv_row(&self) -> String {
        let (lip, src) = match &self.prior {
            Some(p) => (p.log_inv_prior().to_string(), p.source().as_str()),
            None => (String::new(), ""),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.kind.as_str(),
            self.spec.n(),
            self.spec.delta(),
            self.spec.range_low(),
            self.spec.range_width(),
            self.empirical_risk,
            self.complexity_term,
            self.total,
            lip,
            src,
            self.excluded_classes.join(";")
        )
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} bound", self.kind.as_str())?;
        writeln!(
            f,
            "  n = {}, delta = {}, loss range = [{}, {}]",
            self.spec.n(),
            self.spec.delta(),
            self.spec.range_low(),
            self.spec.range_high()
        )?;
        writeln!(f, "  empirical risk   {:.6}", self.empirical_risk)?;
        writeln!(f, "  complexity term  {:.6}", self.complexity_term)?;
        writeln!(f, "  total            {:.6}", self.total)?;
        if let Some(p) = &self.prior {
            writeln!(
                f,
                "  log 1/P(h)       {:.4} nats ({:.1} bits, {})",
                p.log_inv_prior(),
                p.bits(),
                p.source().as_str()
            )?;
        }
        if !self.excluded_classes.is_empty() {
            writeln!(f, "  excluded from C(h): {}", self.excluded_classes.join(", "))?;
        }
        if self.is_vacuous() {
            writeln!(f, "  (vacuous)")?;
        }
        Ok(())
    }
}

pub(crate) fn check_risk(empirical_risk: f64) -> Result<()> {
    if !empirical_risk.is_finite() {
        return domain(format!("empirical risk must be finite, got {empirical_risk}"));
    }
    Ok(())
}

/// `R(h) <= R̂(h) + Δ sqrt((ln 1/P(h) + ln 1/δ) / 2n)`.
pub fn countable_hypothesis_bound(empirical_risk: f64, spec: RiskSpec, prior: PriorMass) -> Result<BoundReport> {
    check_risk(empirical_risk)?;
    let complexity = threshold_from_log_inv_prior(prior.log_inv_prior(), spec);
    Ok(BoundReport::new(BoundKind::CountableHypothesis, empirical_risk, complexity, spec, Some(prior)))
}

/// Prior mass implied by a description of `compressed_bits` bits:
/// `ln 1/P(h) <= C ln 2 + 2 ln C`.
pub fn prior_bits_from_complexity(compressed_bits: u64) -> Result<PriorMass> {
    if compressed_bits == 0 {
        return domain("compressed size must be at least one bit");
    }
    let c = compressed_bits as f64;
    PriorMass::new(c * LN_2 + 2.0 * c.ln(), PriorSource::ComplexityBits)
}

/// `R(h) <= R̂(h) + sqrt((KL(Q||P) + ln(n/δ) + 2) / (2n - 1))`.
pub fn pac_bayes_bound(empirical_risk: f64, kl: f64, spec: RiskSpec) -> Result<BoundReport> {
    check_risk(empirical_risk)?;
    let prior = PriorMass::from_kl(kl)?;
    let n = spec.n() as f64;
    let complexity = ((kl + (n / spec.delta()).ln() + 2.0) / (2.0 * n - 1.0)).sqrt();
    Ok(BoundReport::new(BoundKind::PacBayes, empirical_risk, complexity, spec, Some(prior)))
}

/// KL divergence of a point-mass posterior at `h` from a discrete prior.
///
/// The point mass has zero entropy, so this is exactly `ln 1/P(h)`.
pub fn point_mass_kl(prior: PriorMass) -> Result<f64> {
    match prior.source() {
        PriorSource::ExplicitProbability | PriorSource::ComplexityBits => Ok(prior.log_inv_prior()),
        PriorSource::KlDivergence => domain("point-mass KL needs a prior mass, not an existing KL divergence"),
    }
}

/// Hoeffding tail `exp(-2 n t² / Δ²)` for a loss of width Δ.
pub fn hoeffding_tail(t: f64, spec: RiskSpec) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return domain(format!("deviation t must be finite and nonnegative, got {t}"));
    }
    let width = spec.range_width();
    if width == 0.0 {
        return Ok(if t > 0.0 { 0.0 } else { 1.0 });
    }
    let n = spec.n() as f64;
    Ok((-2.0 * n * t * t / (width * width)).exp().clamp(0.0, 1.0))
}

/// Deviation `t(h)` at which the Hoeffding tail equals `P(h)·δ`.
pub fn per_hypothesis_threshold(prior_mass: f64, spec: RiskSpec) -> Result<f64> {
    if !(prior_mass > 0.0 && prior_mass <= 1.0) {
        return domain(format!("prior mass must lie in (0, 1], got {prior_mass}"));
    }
    Ok(threshold_from_log_inv_prior(-prior_mass.ln(), spec))
}

/// Log-scale form of [`per_hypothesis_threshold`].
pub fn threshold_from_log_inv_prior(log_inv_prior: f64, spec: RiskSpec) -> f64 {
    let n = spec.n() as f64;
    spec.range_width() * ((log_inv_prior - spec.delta().ln()) / (2.0 * n)).sqrt()
}

//! Rademacher complexity, VC and fat-shattering dimension of small classes,
//! and the capacity-based bounds built on them.

mod shattering;

use std::fmt;

use rand::Rng;
use rayon::prelude::*;

use crate::bounds::{check_risk, BoundKind, BoundReport, RiskSpec};
use crate::error::{domain, Error, Result};
use crate::rng::stream;

pub use shattering::{
    fat_shattering, uniform_line, uniform_square, vc_dimension, ConstantFunctions, Halfplanes2D, Intervals1D,
    MarginFamily, ShatteringFamily, SignAsReal, Thresholds1D,
};

/// Largest sample for which [`rademacher_exact`] enumerates sign vectors.
pub const MAX_ENUMERATION: usize = 20;

/// Constant in front of the `sqrt(d ln n / n)` rates, which are only
/// stated up to an unspecified factor.
pub const TABLE_CONSTANT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    /// Outputs exactly ±1.
    Sign,
    Real,
}

type Evaluator<P> = Box<dyn Fn(usize, &P) -> f64 + Send + Sync>;

/// Hypotheses indexed `0..count`, evaluated pointwise.
pub struct FiniteHypothesisClass<P> {
    count: usize,
    output_kind: OutputKind,
    evaluate: Evaluator<P>,
}

impl<P> fmt::Debug for FiniteHypothesisClass<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteHypothesisClass")
            .field("count", &self.count)
            .field("output_kind", &self.output_kind)
            .finish_non_exhaustive()
    }
}

impl<P: 'static> FiniteHypothesisClass<P> {
    pub fn new(
        count: usize,
        output_kind: OutputKind,
        evaluate: impl Fn(usize, &P) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if count == 0 {
            return domain("hypothesis class must contain at least one hypothesis");
        }
        Ok(Self { count, output_kind, evaluate: Box::new(evaluate) })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn output_kind(&self) -> OutputKind {
        self.output_kind
    }

    pub fn evaluate(&self, h: usize, x: &P) -> f64 {
        (self.evaluate)(h, x)
    }

    /// Adds `−h` for every `h`. Index `count + h` is the negation of `h`.
    pub fn negation_closure(self) -> Self {
        let count = self.count;
        let inner = self.evaluate;
        Self {
            count: 2 * count,
            output_kind: self.output_kind,
            evaluate: Box::new(move |h, x| if h < count { inner(h, x) } else { -inner(h - count, x) }),
        }
    }

    /// `table[h][i] = h(x_i)`, validated against the declared output kind.
    pub fn output_table(&self, sample: &[P]) -> Result<Vec<Vec<f64>>> {
        let table: Vec<Vec<f64>> =
            (0..self.count).map(|h| sample.iter().map(|x| self.evaluate(h, x)).collect()).collect();
        for (h, row) in table.iter().enumerate() {
            for &v in row {
                let ok = match self.output_kind {
                    OutputKind::Sign => v == 1.0 || v == -1.0,
                    OutputKind::Real => v.is_finite(),
                };
                if !ok {
                    return domain(format!("hypothesis {h} produced {v} for a {:?} class", self.output_kind));
                }
            }
        }
        Ok(table)
    }
}

impl FiniteHypothesisClass<usize> {
    /// Every ±1 labelling of the points `0..n`: hypothesis `h` gives point
    /// `i` the sign of bit `i` of `h`.
    pub fn complete_sign_class(n: usize) -> Result<Self> {
        if n >= usize::BITS as usize - 1 {
            return domain(format!("complete sign class on {n} points is too large"));
        }
        Self::new(1 << n, OutputKind::Sign, |h, &i| if (h >> i) & 1 == 1 { 1.0 } else { -1.0 })
    }
}

impl<P: 'static> FiniteHypothesisClass<P> {
    pub fn constant(value: f64) -> Result<Self> {
        let kind = if value == 1.0 || value == -1.0 { OutputKind::Sign } else { OutputKind::Real };
        Self::new(1, kind, move |_, _| value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Rademacher,
    Vc,
    FatShattering,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rademacher => "rademacher",
            Self::Vc => "vc",
            Self::FatShattering => "fat-shattering",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ExactEnumeration,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ExactEnumeration => "exact-enumeration",
            Self::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityEstimate {
    pub value: f64,
    pub measure: Measure,
    pub method: Method,
    /// Margin `γ` for fat-shattering.
    pub margin: Option<f64>,
    /// Sign vectors, Monte-Carlo draws, or point sets examined.
    pub sample_count_used: usize,
    pub standard_error: Option<f64>,
    /// The search hit `d_max` while still shattering, so `value` is only a
    /// lower bound.
    pub lower_bound_only: bool,
}

impl CapacityEstimate {
    pub const CSV_HEADER: &'static str =
        "measure,method,value,margin,standard_error,sample_count_used,lower_bound_only";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.measure.as_str(),
            self.method.as_str(),
            self.value,
            self.margin.map(|m| m.to_string()).unwrap_or_default(),
            self.standard_error.map(|s| s.to_string()).unwrap_or_default(),
            self.sample_count_used,
            self.lower_bound_only
        )
    }
}

fn sup_correlation(table: &[Vec<f64>], sigma: impl Fn(usize) -> f64, n: usize) -> f64 {
    table
        .iter()
        .map(|row| row.iter().enumerate().map(|(i, v)| sigma(i) * v).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
        / n as f64
}

/// `E_σ sup_h (1/n) Σ σ_i h(x_i)` by enumerating all `2^n` sign vectors.
pub fn rademacher_exact<P: 'static>(class: &FiniteHypothesisClass<P>, sample: &[P]) -> Result<CapacityEstimate> {
    let n = sample.len();
    if n == 0 {
        return domain("Rademacher complexity needs a nonempty sample");
    }
    if n > MAX_ENUMERATION {
        return Err(Error::TooLargeForEnumeration { n, max: MAX_ENUMERATION });
    }
    let table = class.output_table(sample)?;
    let total = 1usize << n;
    let sups: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|s| sup_correlation(&table, |i| if (s >> i) & 1 == 1 { 1.0 } else { -1.0 }, n))
        .collect();
    Ok(CapacityEstimate {
        value: sups.iter().sum::<f64>() / total as f64,
        measure: Measure::Rademacher,
        method: Method::ExactEnumeration,
        margin: None,
        sample_count_used: total,
        standard_error: Some(0.0),
        lower_bound_only: false,
    })
}

/// Monte-Carlo estimate over `draws` independent sign vectors, with the
/// standard error of the mean.
pub fn rademacher_mc<P: 'static>(
    class: &FiniteHypothesisClass<P>,
    sample: &[P],
    draws: usize,
    seed: u64,
) -> Result<CapacityEstimate> {
    let n = sample.len();
    if n == 0 {
        return domain("Rademacher complexity needs a nonempty sample");
    }
    if draws == 0 {
        return domain("Monte-Carlo Rademacher needs at least one draw");
    }
    let table = class.output_table(sample)?;
    let sups: Vec<f64> = (0..draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, "capacity/rademacher", k as u64);
            let sigma: Vec<f64> = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
            sup_correlation(&table, |i| sigma[i], n)
        })
        .collect();
    let m = draws as f64;
    let mean = sups.iter().sum::<f64>() / m;
    let var = if draws > 1 { sups.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0) } else { 0.0 };
    Ok(CapacityEstimate {
        value: mean,
        measure: Measure::Rademacher,
        method: Method::MonteCarlo,
        margin: None,
        sample_count_used: draws,
        standard_error: Some((var / m).sqrt()),
        lower_bound_only: false,
    })
}

/// `R̂ + 2ℛ + 3 sqrt(ln(2/δ) / 2n)`.
pub fn rademacher_generalization_bound(
    empirical_risk: f64,
    rademacher_value: f64,
    spec: RiskSpec,
) -> Result<BoundReport> {
    check_risk(empirical_risk)?;
    if !(rademacher_value >= 0.0 && rademacher_value.is_finite()) {
        return domain(format!("Rademacher complexity must be nonnegative, got {rademacher_value}"));
    }
    let n = spec.n() as f64;
    let complexity = 2.0 * rademacher_value + 3.0 * ((2.0 / spec.delta()).ln() / (2.0 * n)).sqrt();
    Ok(BoundReport::new(BoundKind::Rademacher, empirical_risk, complexity, spec, None))
}

fn dimension_term(d: f64, spec: RiskSpec, constant: f64) -> Result<f64> {
    if spec.n() < 2 {
        return domain("dimension-based bounds need n >= 2 so that ln n > 0");
    }
    if !(d >= 0.0 && d.is_finite()) {
        return domain(format!("dimension must be nonnegative, got {d}"));
    }
    if !(constant >= 0.0 && constant.is_finite()) {
        return domain(format!("rate constant must be nonnegative, got {constant}"));
    }
    let n = spec.n() as f64;
    Ok(constant * (d * n.ln() / n).sqrt())
}

/// `R̂ + C sqrt(d ln n / n)`.
pub fn vc_generalization_bound_with_constant(
    empirical_risk: f64,
    d: f64,
    spec: RiskSpec,
    constant: f64,
) -> Result<BoundReport> {
    check_risk(empirical_risk)?;
    let c = dimension_term(d, spec, constant)?;
    Ok(BoundReport::new(BoundKind::VcDimension, empirical_risk, c, spec, None))
}

pub fn vc_generalization_bound(empirical_risk: f64, d: f64, spec: RiskSpec) -> Result<BoundReport> {
    vc_generalization_bound_with_constant(empirical_risk, d, spec, TABLE_CONSTANT)
}

/// `R̂ + C sqrt(fat_γ ln n / n)`.
pub fn fat_generalization_bound_with_constant(
    empirical_risk: f64,
    fat_value: f64,
    spec: RiskSpec,
    constant: f64,
) -> Result<BoundReport> {
    check_risk(empirical_risk)?;
    let c = dimension_term(fat_value, spec, constant)?;
    Ok(BoundReport::new(BoundKind::FatShattering, empirical_risk, c, spec, None))
}

pub fn fat_generalization_bound(empirical_risk: f64, fat_value: f64, spec: RiskSpec) -> Result<BoundReport> {
    fat_generalization_bound_with_constant(empirical_risk, fat_value, spec, TABLE_CONSTANT)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rademacher_examples() {
        let single = FiniteHypothesisClass::<usize>::constant(1.0).unwrap();
        assert_eq!(rademacher_exact(&single, &[0, 1]).unwrap().value, 0.0);
        let pm = FiniteHypothesisClass::<usize>::constant(1.0).unwrap().negation_closure();
        assert_eq!(rademacher_exact(&pm, &[0, 1]).unwrap().value, 0.5);
        let full = FiniteHypothesisClass::complete_sign_class(5).unwrap();
        let pts: Vec<usize> = (0..5).collect();
        assert_eq!(rademacher_exact(&full, &pts).unwrap().value, 1.0);
        let mc = rademacher_mc(&full, &pts, 50, 1).unwrap();
        assert_eq!(mc.value, 1.0);
        assert_eq!(mc.standard_error, Some(0.0));
    }

    #[test]
    fn enumeration_limit() {
        let c = FiniteHypothesisClass::<usize>::constant(1.0).unwrap();
        let pts: Vec<usize> = (0..21).collect();
        assert!(matches!(rademacher_exact(&c, &pts), Err(Error::TooLargeForEnumeration { n: 21, max: 20 })));
    }

    #[test]
    fn sign_outputs_validated() {
        let c = FiniteHypothesisClass::<usize>::new(1, OutputKind::Sign, |_, _| 0.5).unwrap();
        assert!(rademacher_exact(&c, &[0]).is_err());
    }

    #[test]
    fn table_bounds() {
        let spec = RiskSpec::zero_one(1, 2.0 * (-2.0f64).exp()).unwrap();
        let r = rademacher_generalization_bound(0.1, 0.0, spec).unwrap();
        assert!((r.total - 3.1).abs() < 1e-12);
        let spec = RiskSpec::zero_one(1000, 0.05).unwrap();
        let v = vc_generalization_bound(0.0, 3.0, spec).unwrap();
        assert!((v.complexity_term - 0.143_955_777_365_642_44).abs() < 1e-12);
        assert_eq!(vc_generalization_bound(0.2, 0.0, spec).unwrap().total, 0.2);
        let four = vc_generalization_bound(0.0, 12.0, spec).unwrap();
        assert!((four.complexity_term - 2.0 * v.complexity_term).abs() < 1e-12);
        assert!(vc_generalization_bound(0.0, 1.0, RiskSpec::zero_one(1, 0.05).unwrap()).is_err());
        assert!(fat_generalization_bound(0.0, 1.0, spec).is_ok());
    }

    #[test]
    fn complete_class_bound_is_vacuous() {
        let spec = RiskSpec::zero_one(10, 0.05).unwrap();
        let r = rademacher_generalization_bound(0.0, 1.0, spec).unwrap();
        assert!(r.complexity_term >= 2.0 && r.is_vacuous());
    }
}

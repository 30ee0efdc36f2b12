//! Polynomial regression with per-order penalties.
//!
//! The model is `f(x, w) = Σ_j w_j u^j` where `u` is the input after an
//! affine map fitted to the training inputs. Fitting minimizes
//! `(1/(2σ²)) Σ_i (y_i − f(x_i, w))² + Σ_j λ_j w_j²`.

mod experiments;
mod extended;
mod regularizer;

use std::fmt;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use twofloat::TwoFloat;

use crate::error::{domain, Error, Result};
use crate::linalg::min_norm_lstsq;
use extended::DualSystem;

pub use experiments::{
    allsizes_experiment, benign_overfitting_experiment, oracle_ridge, AllsizesCell, AllsizesComparison, AllsizesConfig,
    AllsizesModel, AllsizesProblem, AllsizesTable, BenignConfig, BenignRecord, BenignTarget, ExperimentRecord,
    OracleRidge,
};
pub use regularizer::{RegularizerSpec, PENALTY_CAP};

/// Noise variances below this switch [`Precision::Auto`] to the 320-bit
/// kernel solver when every active penalty is positive.
pub const EXTENDED_BELOW: f64 = 1e-10;

/// Affine map `u = (x − center) / half_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputScale {
    pub center: f64,
    pub half_width: f64,
}

impl InputScale {
    pub const IDENTITY: Self = Self { center: 0.0, half_width: 1.0 };

    /// Maps `[min, max]` of the inputs onto `[−1, 1]`.
    pub fn from_inputs(inputs: &[f64]) -> Self {
        let (lo, hi) = inputs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if !lo.is_finite() || !hi.is_finite() {
            return Self::IDENTITY;
        }
        let half_width = 0.5 * (hi - lo);
        Self { center: 0.5 * (hi + lo), half_width: if half_width > 0.0 { half_width } else { 1.0 } }
    }

    pub fn from_range(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return domain(format!("input range [{lo}, {hi}] is empty or not finite"));
        }
        Ok(Self { center: 0.5 * (hi + lo), half_width: 0.5 * (hi - lo) })
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.center) / self.half_width
    }
}

/// Monomial design matrices past this degree are badly conditioned unless
/// every input lies in `[−1, 1]`.
pub const CONDITIONING_DEGREE: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditioningWarning {
    pub max_abs_input: f64,
    pub degree: usize,
}

impl fmt::Display for ConditioningWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "degree {} basis on inputs up to |x| = {}: monomials grow like |x|^{} and the \
             design matrix is ill-conditioned; rescale inputs to [-1, 1]",
            self.degree, self.max_abs_input, self.degree
        )
    }
}

#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub matrix: DMatrix<f64>,
    pub warning: Option<ConditioningWarning>,
}

/// Column `j` holds `x^j`. Inputs are expected to be scaled already.
pub fn design_matrix(inputs: &[f64], degree: usize) -> DesignMatrix {
    let matrix = DMatrix::from_fn(inputs.len(), degree + 1, |i, j| inputs[i].powi(j as i32));
    let max_abs_input = inputs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let warning =
        (max_abs_input > 1.0 && degree > CONDITIONING_DEGREE).then_some(ConditioningWarning { max_abs_input, degree });
    DesignMatrix { matrix, warning }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Auto,
    /// SVD of the penalty-augmented design matrix in f64.
    Double,
    /// 320-bit kernel-form solve; needs every active penalty positive.
    Extended,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialModel {
    degree: usize,
    coefficients: Vec<f64>,
    /// Low-order parts; the coefficient is `coefficients[j] + tails[j]`.
    tails: Vec<f64>,
    regularizer: RegularizerSpec,
    noise_variance: f64,
    input_scale: InputScale,
    solver: Precision,
}

impl PolynomialModel {
    pub fn from_coefficients(coefficients: Vec<f64>, input_scale: InputScale) -> Self {
        let degree = coefficients.len().saturating_sub(1);
        let tails = vec![0.0; coefficients.len()];
        Self {
            degree,
            coefficients,
            tails,
            regularizer: RegularizerSpec::None,
            noise_variance: 1.0,
            input_scale,
            solver: Precision::Double,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Leading f64 part of each coefficient in scaled coordinates.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient_tails(&self) -> &[f64] {
        &self.tails
    }

    pub fn regularizer(&self) -> RegularizerSpec {
        self.regularizer
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn input_scale(&self) -> InputScale {
        self.input_scale
    }

    /// Solver that produced the coefficients (never `Auto`).
    pub fn solver(&self) -> Precision {
        self.solver
    }

    /// `Σ_j λ_j w_j²` using the stored regularizer.
    pub fn penalty_value(&self) -> f64 {
        self.regularizer
            .penalties(self.degree)
            .iter()
            .zip(&self.coefficients)
            .filter(|(l, _)| **l < PENALTY_CAP)
            .map(|(l, w)| l * w * w)
            .sum()
    }

    /// Horner evaluation in double-double arithmetic on scaled inputs.
    pub fn predict(&self, inputs: &[f64]) -> Vec<f64> {
        inputs
            .iter()
            .map(|&x| {
                let u = TwoFloat::from(self.input_scale.apply(x));
                let mut acc = TwoFloat::from(0.0);
                for (hi, lo) in self.coefficients.iter().zip(&self.tails).rev() {
                    acc = acc * u + TwoFloat::new_add(*hi, *lo);
                }
                acc.hi() + acc.lo()
            })
            .collect()
    }
}

/// Root mean squared difference; 0 for empty input.
pub fn rmse(predictions: &[f64], targets: &[f64]) -> f64 {
    assert_eq!(predictions.len(), targets.len(), "rmse needs equal lengths");
    if predictions.is_empty() {
        return 0.0;
    }
    let ss: f64 = predictions.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum();
    (ss / predictions.len() as f64).sqrt()
}

/// Training data, basis and penalties prepared once for fits at several
/// noise variances.
#[derive(Debug)]
pub struct PolynomialProblem {
    degree: usize,
    regularizer: RegularizerSpec,
    scale: InputScale,
    scaled: Vec<f64>,
    targets: Vec<f64>,
    penalties: Vec<f64>,
    active: Vec<usize>,
    design: DMatrix<f64>,
    warning: Option<ConditioningWarning>,
    dual: OnceLock<DualSystem>,
}

impl PolynomialProblem {
    /// Input scale fitted to the training inputs.
    pub fn new(inputs: &[f64], targets: &[f64], degree: usize, regularizer: RegularizerSpec) -> Result<Self> {
        Self::with_scale(inputs, targets, degree, regularizer, InputScale::from_inputs(inputs))
    }

    pub fn with_scale(
        inputs: &[f64],
        targets: &[f64],
        degree: usize,
        regularizer: RegularizerSpec,
        scale: InputScale,
    ) -> Result<Self> {
        regularizer.validate()?;
        if inputs.is_empty() {
            return domain("polynomial fit needs at least one sample");
        }
        if inputs.len() != targets.len() {
            return Err(Error::Shape(format!("{} inputs but {} targets", inputs.len(), targets.len())));
        }
        if inputs.iter().chain(targets).any(|v| !v.is_finite()) {
            return domain("inputs and targets must be finite");
        }
        let scaled: Vec<f64> = inputs.iter().map(|&x| scale.apply(x)).collect();
        let penalties = regularizer.penalties(degree);
        let active: Vec<usize> = (0..=degree).filter(|&j| penalties[j] < PENALTY_CAP).collect();
        let DesignMatrix { matrix, warning } = design_matrix(&scaled, degree);
        Ok(Self {
            degree,
            regularizer,
            scale,
            scaled,
            targets: targets.to_vec(),
            penalties,
            active,
            design: matrix,
            warning,
            dual: OnceLock::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn scale(&self) -> InputScale {
        self.scale
    }

    pub fn conditioning_warning(&self) -> Option<ConditioningWarning> {
        self.warning
    }

    fn all_active_penalized(&self) -> bool {
        self.active.iter().all(|&j| self.penalties[j] > 0.0)
    }

    pub fn fit(&self, noise_variance: f64, precision: Precision) -> Result<PolynomialModel> {
        if !(noise_variance > 0.0 && noise_variance.is_finite()) {
            return domain(format!("noise variance must be positive, got {noise_variance}"));
        }
        let use_extended = match precision {
            Precision::Double => false,
            Precision::Extended => {
                if !self.all_active_penalized() {
                    return domain("extended solver needs a positive penalty on every active coefficient");
                }
                true
            }
            Precision::Auto => noise_variance < EXTENDED_BELOW && self.all_active_penalized(),
        };
        let (coefficients, tails, solver) = if use_extended {
            let dual = self
                .dual
                .get_or_init(|| DualSystem::new(&self.scaled, &self.targets, &self.penalties, self.active.clone()));
            let (w, _) = dual.solve(noise_variance)?;
            (w.hi, w.lo, Precision::Extended)
        } else {
            let w = self.solve_double(noise_variance);
            let tails = vec![0.0; w.len()];
            (w, tails, Precision::Double)
        };
        Ok(PolynomialModel {
            degree: self.degree,
            coefficients,
            tails,
            regularizer: self.regularizer,
            noise_variance,
            input_scale: self.scale,
            solver,
        })
    }

    /// Substituting `v_j = sqrt(2σ²λ_j) w_j` turns the objective into the
    /// least-squares problem `‖[X D⁻¹; I] v − [y; 0]‖²` over the penalized
    /// columns, which the SVD solves stably. Unpenalized columns get no
    /// identity row, and the min-norm solution resolves any ambiguity.
    fn solve_double(&self, noise_variance: f64) -> Vec<f64> {
        let n = self.len();
        let scales: Vec<f64> = self
            .active
            .iter()
            .map(|&j| {
                let p = self.penalties[j];
                if p > 0.0 {
                    (2.0 * noise_variance * p).sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let penalized: Vec<usize> = (0..self.active.len()).filter(|&c| self.penalties[self.active[c]] > 0.0).collect();
        let mut a = DMatrix::zeros(n + penalized.len(), self.active.len());
        for (c, (&j, &d)) in self.active.iter().zip(&scales).enumerate() {
            for i in 0..n {
                a[(i, c)] = self.design[(i, j)] / d;
            }
        }
        for (r, &c) in penalized.iter().enumerate() {
            a[(n + r, c)] = 1.0;
        }
        let mut b = DVector::zeros(n + penalized.len());
        b.rows_mut(0, n).copy_from_slice(&self.targets);
        let v = min_norm_lstsq(&a, &b).weights;
        let mut w = vec![0.0; self.degree + 1];
        for (c, &j) in self.active.iter().enumerate() {
            w[j] = v[c] / scales[c];
        }
        w
    }
}

/// One-shot fit with automatic solver selection.
pub fn fit(
    inputs: &[f64],
    targets: &[f64],
    degree: usize,
    regularizer: RegularizerSpec,
    noise_variance: f64,
) -> Result<PolynomialModel> {
    PolynomialProblem::new(inputs, targets, degree, regularizer)?.fit(noise_variance, Precision::Auto)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn design_rows() {
        let d = design_matrix(&[0.0], 2);
        assert_eq!(d.matrix.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0, 0.0]);
        let d = design_matrix(&[1.0], 3);
        assert_eq!(d.matrix.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0; 4]);
        let d = design_matrix(&[0.5], 2);
        assert_eq!(d.matrix.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.5, 0.25]);
        assert!(d.warning.is_none());
    }

    #[test]
    fn unscaled_high_degree_warns() {
        assert!(design_matrix(&[2.0], 31).warning.is_some());
        assert!(design_matrix(&[2.0], 30).warning.is_none());
        assert!(design_matrix(&[1.0], 150).warning.is_none());
    }

    #[test]
    fn scalar_ridge() {
        let p = PolynomialProblem::with_scale(
            &[1.0],
            &[1.0],
            0,
            RegularizerSpec::Isotropic { lambda: 0.5 },
            InputScale::IDENTITY,
        )
        .unwrap();
        for precision in [Precision::Double, Precision::Extended] {
            let m = p.fit(0.5, precision).unwrap();
            assert!((m.coefficients()[0] - 2.0 / 3.0).abs() < 1e-15, "{precision:?}");
        }
    }

    #[test]
    fn unregularized_square_system_interpolates() {
        let x = [-1.0, 0.0, 1.0];
        let y = [2.0, -1.0, 0.5];
        let m = fit(&x, &y, 2, RegularizerSpec::None, 1.0).unwrap();
        assert!(rmse(&m.predict(&x), &y) < 1e-14);
        assert_eq!(m.solver(), Precision::Double);
    }

    #[test]
    fn extended_requires_positive_penalties() {
        let p = PolynomialProblem::new(&[0.0, 1.0], &[0.0, 1.0], 3, RegularizerSpec::ORDERED_POWER).unwrap();
        assert!(p.fit(1e-3, Precision::Extended).is_err());
        assert_eq!(p.fit(1e-20, Precision::Auto).unwrap().solver(), Precision::Double);
    }

    #[test]
    fn solvers_agree_at_moderate_noise() {
        let x: Vec<f64> = (0..12).map(|i| -1.0 + i as f64 / 5.5).collect();
        let y: Vec<f64> = x.iter().map(|v| (3.0 * v).sin()).collect();
        let p = PolynomialProblem::new(&x, &y, 20, RegularizerSpec::GEOMETRIC_TWO).unwrap();
        let a = p.fit(1e-3, Precision::Double).unwrap();
        let b = p.fit(1e-3, Precision::Extended).unwrap();
        for (u, v) in a.coefficients().iter().zip(b.coefficients()) {
            assert!((u - v).abs() < 1e-9 * (1.0 + v.abs()), "{u} vs {v}");
        }
    }

    #[test]
    fn zero_model_predicts_zero() {
        let m = PolynomialModel::from_coefficients(vec![0.0; 4], InputScale::IDENTITY);
        assert_eq!(m.predict(&[-3.0, 0.0, 7.0]), vec![0.0; 3]);
    }

    #[test]
    fn rmse_cases() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(rmse(&[0.0, 0.0], &[1.0, 1.0]), 1.0);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(fit(&[], &[], 2, RegularizerSpec::None, 1.0).is_err());
        assert!(fit(&[1.0], &[1.0, 2.0], 2, RegularizerSpec::None, 1.0).is_err());
        assert!(fit(&[1.0], &[1.0], 2, RegularizerSpec::None, 0.0).is_err());
    }
}

use crate::error::{domain, Result};

/// Penalties at or above this value are treated as infinite: the matching
/// coefficient is fixed at zero.
pub const PENALTY_CAP: f64 = 1e300;

/// Per-coefficient penalty weights `λ_j` in `Σ_j λ_j w_j²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegularizerSpec {
    /// `λ_j = γ^j`, `γ > 1`.
    Geometric {
        gamma: f64,
    },
    /// `λ_j = c·j²`.
    Power {
        scale: f64,
    },
    /// `λ_j = λ`.
    Isotropic {
        lambda: f64,
    },
    None,
}

impl RegularizerSpec {
    /// `Σ_j 2^j w_j²`.
    pub const GEOMETRIC_TWO: Self = Self::Geometric { gamma: 2.0 };

    /// `Σ_j 0.01² j² w_j²`.
    pub const ORDERED_POWER: Self = Self::Power { scale: 1e-4 };

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Geometric { gamma } if !(gamma > 1.0 && gamma.is_finite()) => {
                domain(format!("geometric regularizer needs gamma > 1, got {gamma}"))
            }
            Self::Power { scale } if !(scale >= 0.0 && scale.is_finite()) => {
                domain(format!("power regularizer needs scale >= 0, got {scale}"))
            }
            Self::Isotropic { lambda } if !(lambda >= 0.0 && lambda.is_finite()) => {
                domain(format!("isotropic regularizer needs lambda >= 0, got {lambda}"))
            }
            _ => Ok(()),
        }
    }

    /// `λ_0 ..= λ_degree`, capped at [`PENALTY_CAP`].
    pub fn penalties(&self, degree: usize) -> Vec<f64> {
        (0..=degree)
            .map(|j| {
                let raw = match *self {
                    Self::Geometric { gamma } => gamma.powi(j as i32),
                    Self::Power { scale } => scale * (j * j) as f64,
                    Self::Isotropic { lambda } => lambda,
                    Self::None => 0.0,
                };
                if raw.is_finite() {
                    raw.min(PENALTY_CAP)
                } else {
                    PENALTY_CAP
                }
            })
            .collect()
    }

    pub fn label(&self) -> String {
        match *self {
            Self::Geometric { gamma } => format!("geometric({gamma})"),
            Self::Power { scale } => format!("power({scale})"),
            Self::Isotropic { lambda } => format!("isotropic({lambda})"),
            Self::None => "none".to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn penalty_shapes() {
        assert_eq!(RegularizerSpec::GEOMETRIC_TWO.penalties(3), vec![1.0, 2.0, 4.0, 8.0]);
        let p = RegularizerSpec::ORDERED_POWER.penalties(2);
        assert_eq!(p[0], 0.0);
        assert!((p[2] - 4e-4).abs() < 1e-18);
        assert_eq!(RegularizerSpec::None.penalties(1), vec![0.0, 0.0]);
        assert_eq!(RegularizerSpec::Isotropic { lambda: 0.5 }.penalties(1), vec![0.5, 0.5]);
    }

    #[test]
    fn overflowing_penalties_are_capped() {
        let p = RegularizerSpec::Geometric { gamma: 10.0 }.penalties(400);
        assert_eq!(p[400], PENALTY_CAP);
        assert!(p[150] < PENALTY_CAP);
    }

    #[test]
    fn validation() {
        assert!(RegularizerSpec::Geometric { gamma: 1.0 }.validate().is_err());
        assert!(RegularizerSpec::Power { scale: -1.0 }.validate().is_err());
        assert!(RegularizerSpec::Isotropic { lambda: f64::NAN }.validate().is_err());
        assert!(RegularizerSpec::GEOMETRIC_TWO.validate().is_ok());
    }
}

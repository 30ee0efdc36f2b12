//! Random-feature linear regression around the interpolation threshold.
//!
//! Every feature column is a noisy copy of the labels, `x_c = y + ε_c`.
//! Fitting uses the minimum-norm least-squares solution, so for `d ≥ n` the
//! training data are interpolated exactly.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::linalg::min_norm_lstsq;
use crate::rng::stream;

/// Negative eigenvalues larger in magnitude than this fraction of the
/// spectral radius (or of 1, whichever is larger) are rejected.
pub const NEGATIVE_EIGENVALUE_TOLERANCE: f64 = 1e-9;

/// `Σ λ_i / (λ_i + α)`.
pub fn effective_dimensionality(eigenvalues: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    let radius = eigenvalues.iter().fold(1.0f64, |m, l| m.max(l.abs()));
    let mut total = 0.0;
    for &l in eigenvalues {
        if l.is_nan() || l < -NEGATIVE_EIGENVALUE_TOLERANCE * radius {
            return domain(format!("eigenvalue {l} is negative beyond tolerance"));
        }
        if l.is_infinite() {
            total += 1.0;
            continue;
        }
        let l = l.max(0.0);
        total += l / (l + alpha);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSummary {
    /// Nonincreasing.
    pub eigenvalues: Vec<f64>,
    pub alpha: f64,
    pub effective_dimensionality: f64,
}

impl SpectrumSummary {
    pub fn new(mut eigenvalues: Vec<f64>, alpha: f64) -> Result<Self> {
        let effective_dimensionality = effective_dimensionality(&eigenvalues, alpha)?;
        for l in &mut eigenvalues {
            *l = l.max(0.0);
        }
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { eigenvalues, alpha, effective_dimensionality })
    }
}

/// Minimum-norm least-squares weights; see [`crate::linalg::min_norm_lstsq`].
pub fn min_norm_least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    min_norm_lstsq(x, y).weights
}

#[derive(Debug, Clone)]
pub struct RandomFeatureEnsemble {
    pub n: usize,
    pub d: usize,
    pub noise_std: f64,
    pub train_labels: DVector<f64>,
    pub test_labels: DVector<f64>,
    pub train_features: DMatrix<f64>,
    pub test_features: DMatrix<f64>,
    pub weights: DVector<f64>,
    /// Singular values of the training features, nonincreasing.
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

impl RandomFeatureEnsemble {
    pub fn train_mse(&self) -> f64 {
        mse(&(&self.train_features * &self.weights), &self.train_labels)
    }

    pub fn test_mse(&self) -> f64 {
        mse(&(&self.test_features * &self.weights), &self.test_labels)
    }

    /// Nonzero eigenvalues of `XᵀX`, nonincreasing.
    pub fn hessian_spectrum(&self) -> Vec<f64> {
        self.singular_values[..self.rank].iter().map(|s| s * s).collect()
    }

    /// Eigenvalues of `XᵀX` that are numerically zero, including the
    /// `d − n` structural zeros when `d > n`.
    pub fn zero_eigenvalue_count(&self) -> usize {
        self.d - self.rank
    }

    /// `1/λ` over the nonzero spectrum of `XᵀX`, nonincreasing.
    pub fn inverse_spectrum(&self) -> Vec<f64> {
        self.hessian_spectrum().iter().rev().map(|l| 1.0 / l).collect()
    }
}

fn mse(pred: &DVector<f64>, target: &DVector<f64>) -> f64 {
    if target.is_empty() {
        return 0.0;
    }
    (pred - target).norm_squared() / target.len() as f64
}

/// Column `c` of both matrices uses its own random streams keyed by `c`, so
/// ensembles with the same seed and labels are nested in `d`.
pub fn generate_ensemble(
    train_labels: &[f64],
    test_labels: &[f64],
    d: usize,
    noise_std: f64,
    seed: u64,
) -> Result<RandomFeatureEnsemble> {
    if d == 0 {
        return domain("random-feature ensemble needs d >= 1");
    }
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return domain(format!("noise_std must be nonnegative, got {noise_std}"));
    }
    let n = train_labels.len();
    let build = |labels: &[f64], tag: &str| {
        let mut m = DMatrix::zeros(labels.len(), d);
        for c in 0..d {
            let mut rng = stream(seed, tag, c as u64);
            for (i, &y) in labels.iter().enumerate() {
                let e: f64 = StandardNormal.sample(&mut rng);
                m[(i, c)] = y + noise_std * e;
            }
        }
        m
    };
    let train_features = build(train_labels, "double-descent/train-features");
    let test_features = build(test_labels, "double-descent/test-features");
    let train = DVector::from_column_slice(train_labels);
    let sol = min_norm_lstsq(&train_features, &train);
    Ok(RandomFeatureEnsemble {
        n,
        d,
        noise_std,
        train_labels: train,
        test_labels: DVector::from_column_slice(test_labels),
        train_features,
        test_features,
        weights: sol.weights,
        singular_values: sol.singular_values,
        rank: sol.rank,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoubleDescentConfig {
    pub n: usize,
    pub test_n: usize,
    pub d_grid: Vec<usize>,
    pub seeds: Vec<u64>,
    pub alpha: f64,
    pub noise_std: f64,
}

impl DoubleDescentConfig {
    /// Sixteen log-spaced widths from `n/10` to `10n`, plus `n`, `1.2n`
    /// and `8n`.
    pub fn default_grid(n: usize) -> Vec<usize> {
        let lo = (n as f64 / 10.0).max(1.0).ln();
        let hi = (10.0 * n as f64).ln();
        let mut grid: Vec<usize> = (0..16)
            .map(|k| (lo + (hi - lo) * k as f64 / 15.0).exp().round() as usize)
            .chain([n, (1.2 * n as f64).round() as usize, 8 * n])
            .filter(|&d| d >= 1)
            .collect();
        grid.sort_unstable();
        grid.dedup();
        grid
    }

    pub fn new(n: usize, seeds: usize) -> Self {
        Self {
            n,
            test_n: 1000,
            d_grid: Self::default_grid(n),
            seeds: (0..seeds as u64).collect(),
            alpha: 10.0,
            noise_std: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDescentPoint {
    pub d: usize,
    pub seed: u64,
    pub train_mse: f64,
    pub test_mse: f64,
    /// `α` applied to the nonzero eigenvalues of `XᵀX`.
    pub neff_hessian: f64,
    /// `α` applied to their reciprocals.
    pub neff_inverse: f64,
    pub zero_eigenvalues: usize,
}

impl DoubleDescentPoint {
    pub const CSV_HEADER: &'static str = "d,seed,train_mse,test_mse,neff_hessian,neff_inverse";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:e},{:e},{:e},{:e}",
            self.d, self.seed, self.train_mse, self.test_mse, self.neff_hessian, self.neff_inverse
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub d: usize,
    pub train_mse: f64,
    pub test_mse: f64,
    pub test_mse_std_error: f64,
    pub neff_hessian: f64,
    pub neff_inverse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoubleDescentSweep {
    pub n: usize,
    pub points: Vec<DoubleDescentPoint>,
    /// Seed averages, one per grid width in ascending order.
    pub curve: Vec<CurvePoint>,
    pub warning: Option<String>,
}

impl DoubleDescentSweep {
    pub fn peak(&self) -> Option<&CurvePoint> {
        self.curve.iter().max_by(|a, b| a.test_mse.total_cmp(&b.test_mse))
    }

    /// Grid point closest to `d`, ties broken toward the smaller width.
    pub fn nearest(&self, d: usize) -> Option<&CurvePoint> {
        self.curve.iter().min_by_key(|c| c.d.abs_diff(d))
    }
}

pub fn double_descent_sweep(config: &DoubleDescentConfig) -> Result<DoubleDescentSweep> {
    if config.n == 0 || config.d_grid.is_empty() || config.seeds.is_empty() {
        return domain("double descent needs n >= 1, a nonempty d grid and at least one seed");
    }
    let mut grid = config.d_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    let warning = if grid.iter().all(|&d| d < config.n) || grid.iter().all(|&d| d > config.n) {
        Some(format!(
            "d grid [{}, {}] lies on one side of n = {}; the interpolation threshold is not visible",
            grid[0],
            grid[grid.len() - 1],
            config.n
        ))
    } else {
        None
    };

    let labels: Vec<(Vec<f64>, Vec<f64>)> = config
        .seeds
        .iter()
        .map(|&s| {
            let mut rng = stream(s, "double-descent/labels", 0);
            let tr = (0..config.n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let te = (0..config.test_n).map(|_| StandardNormal.sample(&mut rng)).collect();
            (tr, te)
        })
        .collect();

    let pairs: Vec<(usize, usize)> = grid.iter().flat_map(|&d| (0..config.seeds.len()).map(move |k| (d, k))).collect();
    let points: Vec<Result<DoubleDescentPoint>> = pairs
        .par_iter()
        .map(|&(d, k)| {
            let seed = config.seeds[k];
            let (tr, te) = &labels[k];
            let e = generate_ensemble(tr, te, d, config.noise_std, seed)?;
            let hess = e.hessian_spectrum();
            Ok(DoubleDescentPoint {
                d,
                seed,
                train_mse: e.train_mse(),
                test_mse: e.test_mse(),
                neff_hessian: effective_dimensionality(&hess, config.alpha)?,
                neff_inverse: effective_dimensionality(&e.inverse_spectrum(), config.alpha)?,
                zero_eigenvalues: e.zero_eigenvalue_count(),
            })
        })
        .collect();
    let points: Vec<DoubleDescentPoint> = points.into_iter().collect::<Result<_>>()?;

    let k = config.seeds.len() as f64;
    let curve = points
        .chunks(config.seeds.len())
        .map(|chunk| {
            let mean = |f: fn(&DoubleDescentPoint) -> f64| chunk.iter().map(f).sum::<f64>() / k;
            let test = mean(|p| p.test_mse);
            let var = if chunk.len() > 1 {
                chunk.iter().map(|p| (p.test_mse - test).powi(2)).sum::<f64>() / (k - 1.0)
            } else {
                0.0
            };
            CurvePoint {
                d: chunk[0].d,
                train_mse: mean(|p| p.train_mse),
                test_mse: test,
                test_mse_std_error: (var / k).sqrt(),
                neff_hessian: mean(|p| p.neff_hessian),
                neff_inverse: mean(|p| p.neff_inverse),
            }
        })
        .collect();
    Ok(DoubleDescentSweep { n: config.n, points, curve, warning })
}

/// Limiting spectrum of `XᵀX / n` for an `n × d` matrix with i.i.d. entries
/// of variance `σ²`, with ratio `γ = d / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarchenkoPastur {
    ratio: f64,
    variance: f64,
}

/// Simpson panels used by [`MarchenkoPastur::cdf`].
const CDF_PANELS: usize = 2048;

impl MarchenkoPastur {
    pub fn new(ratio: f64, variance: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio.is_finite()) {
            return domain(format!("ratio d/n must be positive, got {ratio}"));
        }
        if !(variance > 0.0 && variance.is_finite()) {
            return domain(format!("variance must be positive, got {variance}"));
        }
        Ok(Self { ratio, variance })
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn lower(&self) -> f64 {
        self.variance * (1.0 - self.ratio.sqrt()).powi(2)
    }

    pub fn upper(&self) -> f64 {
        self.variance * (1.0 + self.ratio.sqrt()).powi(2)
    }

    /// Point mass at zero, `1 − 1/γ` when `γ > 1`.
    pub fn atom(&self) -> f64 {
        if self.ratio > 1.0 {
            1.0 - 1.0 / self.ratio
        } else {
            0.0
        }
    }

    /// Density of the continuous part; zero outside the support.
    pub fn density(&self, x: f64) -> f64 {
        let (a, b) = (self.lower(), self.upper());
        if x <= a || x >= b || x <= 0.0 {
            return 0.0;
        }
        ((b - x) * (x - a)).sqrt() / (2.0 * PI * self.variance * self.ratio * x)
    }

    /// With `x = c − r cos θ` the square-root endpoints disappear and the
    /// integrand `r² sin²θ / (2πσ²γ x)` is smooth on `[0, π]`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let (a, b) = (self.lower(), self.upper());
        if x <= a {
            return self.atom();
        }
        if x >= b {
            return 1.0;
        }
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let theta_max = ((c - x) / r).clamp(-1.0, 1.0).acos();
        let scale = 2.0 * PI * self.variance * self.ratio;
        let f = |t: f64| {
            let s = t.sin();
            let xx = c - r * t.cos();
            if xx <= 0.0 {
                // γ = 1 endpoint where r sin²θ / (1 − cos θ) → 2r.
                return 2.0 * r / scale;
            }
            r * r * s * s / (scale * xx)
        };
        let h = theta_max / CDF_PANELS as f64;
        let mut sum = f(0.0) + f(theta_max);
        for i in 1..CDF_PANELS {
            sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        (self.atom() + sum * h / 3.0).clamp(0.0, 1.0)
    }

    /// `sup_x |F_empirical(x) − F(x)|` over a sample of eigenvalues.
    pub fn ks_distance(&self, eigenvalues: &[f64]) -> f64 {
        let mut sorted = eigenvalues.to_vec();
        sorted.sort_by(f64::total_cmp);
        let m = sorted.len() as f64;
        sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = self.cdf(x);
                (f - i as f64 / m).abs().max((f - (i + 1) as f64 / m).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Eigenvalues of `XᵀX / n` for an `n × d` Gaussian matrix, nonincreasing.
pub fn pure_noise_spectrum(n: usize, d: usize, variance: f64, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, "double-descent/pure-noise", 0);
    let sd = variance.sqrt();
    let x = DMatrix::from_fn(n, d, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        sd * z
    });
    let gram = (x.transpose() * &x) / n as f64;
    let mut ev: Vec<f64> = gram.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

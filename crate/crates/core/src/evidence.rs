//! Gaussian-process evidence and its response to label corruption.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::rng::stream;

/// Diagonal jitter tried, in order, when the Cholesky factorization fails.
pub const JITTER_LADDER: [f64; 5] = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Squared-exponential kernel `s² exp(−(x − x')² / (2ℓ²))` plus
/// observation noise `σ²` on the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub lengthscale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self { lengthscale: 1.0, signal_variance: 1.0, noise_variance: 0.01 }
    }
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lengthscale > 0.0 && self.lengthscale.is_finite()) {
            return domain(format!("lengthscale must be positive, got {}", self.lengthscale));
        }
        if !(self.signal_variance > 0.0 && self.signal_variance.is_finite()) {
            return domain(format!("signal variance must be positive, got {}", self.signal_variance));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return domain(format!("noise variance must be nonnegative, got {}", self.noise_variance));
        }
        Ok(())
    }

    pub fn covariance(&self, a: f64, b: f64) -> f64 {
        let r = (a - b) / self.lengthscale;
        self.signal_variance * (-0.5 * r * r).exp()
    }

    /// `K + σ²I`.
    pub fn gram(&self, inputs: &[f64]) -> DMatrix<f64> {
        let n = inputs.len();
        DMatrix::from_fn(n, n, |i, j| {
            self.covariance(inputs[i], inputs[j]) + if i == j { self.noise_variance } else { 0.0 }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evidence {
    pub log_marginal_likelihood: f64,
    /// `−½ yᵀ(K + σ²I)⁻¹ y`
    pub fit_term: f64,
    /// `−½ log det(K + σ²I)`
    pub log_det_term: f64,
    /// Diagonal jitter that made the factorization succeed (0 if none).
    pub jitter: f64,
}

/// Evidence with its decomposition and the jitter that was needed.
pub fn gp_evidence(inputs: &[f64], targets: &[f64], kernel: &KernelSpec) -> Result<Evidence> {
    kernel.validate()?;
    if inputs.len() != targets.len() {
        return Err(Error::Shape(format!("{} inputs but {} targets", inputs.len(), targets.len())));
    }
    let n = inputs.len();
    let gram = kernel.gram(inputs);
    let y = DVector::from_column_slice(targets);
    let mut last_jitter = 0.0;
    for jitter in std::iter::once(0.0).chain(JITTER_LADDER) {
        last_jitter = jitter;
        let mut m = gram.clone();
        for i in 0..n {
            m[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(m) {
            let alpha = chol.solve(&y);
            let fit_term = -0.5 * y.dot(&alpha);
            let log_det_term = -chol.l_dirty().diagonal().iter().take(n).map(|d| d.ln()).sum::<f64>();
            let constant = -0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
            return Ok(Evidence {
                log_marginal_likelihood: fit_term + log_det_term + constant,
                fit_term,
                log_det_term,
                jitter,
            });
        }
    }
    let diag = gram.diagonal();
    Err(Error::NotPositiveDefinite { jitter: last_jitter, min_diag: diag.min(), max_diag: diag.max() })
}

/// `−½ yᵀ(K + σ²I)⁻¹y − ½ log det(K + σ²I) − (n/2) log 2π`.
pub fn gp_log_marginal_likelihood(inputs: &[f64], targets: &[f64], kernel: &KernelSpec) -> Result<f64> {
    gp_evidence(inputs, targets, kernel).map(|e| e.log_marginal_likelihood)
}

#[derive(Debug, Clone)]
pub struct CorruptionConfig {
    pub n: usize,
    pub x_low: f64,
    pub x_high: f64,
    pub target: fn(f64) -> f64,
    /// Variance of the Gaussian noise on clean targets.
    pub target_noise_variance: f64,
    /// Ascending, inside `[0, 1]`.
    pub fractions: Vec<f64>,
    pub repeats: usize,
    pub kernel: KernelSpec,
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        Self {
            n: 60,
            x_low: -3.0,
            x_high: 3.0,
            target: f64::sin,
            target_noise_variance: 0.01,
            fractions: (0..=5).map(|k| k as f64 / 5.0).collect(),
            repeats: 20,
            kernel: KernelSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvidenceRecord {
    pub corruption_fraction: f64,
    pub repeat: usize,
    pub seed: u64,
    pub log_marginal_likelihood: f64,
    pub jitter: f64,
}

impl EvidenceRecord {
    pub const CSV_HEADER: &'static str = "fraction,repeat,log_ml";

    pub fn csv_row(&self) -> String {
        format!("{},{},{:e}", self.corruption_fraction, self.repeat, self.log_marginal_likelihood)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionSummary {
    pub fraction: f64,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionSweep {
    /// Fraction-major, repeat-minor.
    pub records: Vec<EvidenceRecord>,
    pub summary: Vec<FractionSummary>,
}

impl CorruptionSweep {
    /// Adjacent pairs where the mean rises by more than the larger of the
    /// two standard errors.
    pub fn increases_beyond_std_error(&self) -> Vec<(f64, f64)> {
        self.summary
            .windows(2)
            .filter(|w| w[1].mean - w[0].mean > w[0].std_error.max(w[1].std_error))
            .map(|w| (w[0].fraction, w[1].fraction))
            .collect()
    }
}

/// Each repeat draws one dataset, one permutation of its indices and one
/// standard-normal replacement per point. Fraction `f` replaces the targets
/// at the first `round(f·n)` permuted indices, so corrupted sets are nested
/// across the grid.
pub fn corruption_sweep(config: &CorruptionConfig, seed: u64) -> Result<CorruptionSweep> {
    config.kernel.validate()?;
    if config.n == 0 || config.repeats == 0 || config.fractions.is_empty() {
        return domain("corruption sweep needs n, repeats and fractions nonempty");
    }
    if config.fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return domain("corruption fractions must lie in [0, 1]");
    }
    if config.fractions.windows(2).any(|w| w[0] > w[1]) {
        return domain("corruption fractions must be sorted ascending");
    }
    if !(config.x_low < config.x_high) || !(config.target_noise_variance >= 0.0) {
        return domain("invalid input range or target noise");
    }
    let noise = Normal::new(0.0, config.target_noise_variance.sqrt()).map_err(|e| Error::Domain(e.to_string()))?;

    struct Draw {
        x: Vec<f64>,
        y: Vec<f64>,
        order: Vec<usize>,
        replacement: Vec<f64>,
    }
    let draws: Vec<Draw> = (0..config.repeats)
        .map(|r| {
            let mut rng = stream(seed, "evidence/corruption", r as u64);
            let x: Vec<f64> = (0..config.n).map(|_| rng.gen_range(config.x_low..config.x_high)).collect();
            let y = x.iter().map(|&v| (config.target)(v) + noise.sample(&mut rng)).collect();
            let mut order: Vec<usize> = (0..config.n).collect();
            order.shuffle(&mut rng);
            let replacement = (0..config.n).map(|_| StandardNormal.sample(&mut rng)).collect();
            Draw { x, y, order, replacement }
        })
        .collect();

    let jobs: Vec<(usize, usize)> =
        (0..config.fractions.len()).flat_map(|f| (0..config.repeats).map(move |r| (f, r))).collect();
    let records: Vec<Result<EvidenceRecord>> = jobs
        .par_iter()
        .map(|&(f, r)| {
            let fraction = config.fractions[f];
            let d = &draws[r];
            let k = (fraction * config.n as f64).round() as usize;
            let mut y = d.y.clone();
            for &i in &d.order[..k.min(config.n)] {
                y[i] = d.replacement[i];
            }
            let e = gp_evidence(&d.x, &y, &config.kernel)?;
            Ok(EvidenceRecord {
                corruption_fraction: fraction,
                repeat: r,
                seed,
                log_marginal_likelihood: e.log_marginal_likelihood,
                jitter: e.jitter,
            })
        })
        .collect();
    let records: Vec<EvidenceRecord> = records.into_iter().collect::<Result<_>>()?;

    let k = config.repeats as f64;
    let summary = records
        .chunks(config.repeats)
        .map(|c| {
            let mean = c.iter().map(|r| r.log_marginal_likelihood).sum::<f64>() / k;
            let var = if c.len() > 1 {
                c.iter().map(|r| (r.log_marginal_likelihood - mean).powi(2)).sum::<f64>() / (k - 1.0)
            } else {
                0.0
            };
            FractionSummary { fraction: c[0].corruption_fraction, mean, std_error: (var / k).sqrt() }
        })
        .collect();
    Ok(CorruptionSweep { records, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_standard_normal() {
        let k = KernelSpec { lengthscale: 1.0, signal_variance: 1.0, noise_variance: 0.0 };
        let v = gp_log_marginal_likelihood(&[0.0], &[0.0], &k).unwrap();
        assert!((v + 0.918_938_533_204_672_7).abs() < 1e-15);
    }

    #[test]
    fn doubling_targets_lowers_fit_term() {
        let k = KernelSpec::default();
        let x = [0.0, 0.5, 1.3];
        let y = [0.2, -0.1, 0.4];
        let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        let a = gp_evidence(&x, &y, &k).unwrap();
        let b = gp_evidence(&x, &y2, &k).unwrap();
        assert!(b.fit_term < a.fit_term);
        assert!((b.fit_term - 4.0 * a.fit_term).abs() < 1e-12);
    }

    #[test]
    fn duplicate_inputs_need_jitter() {
        let k = KernelSpec { noise_variance: 0.0, ..KernelSpec::default() };
        let e = gp_evidence(&[1.0, 1.0], &[0.0, 0.0], &k).unwrap();
        assert!(e.jitter > 0.0);
    }

    #[test]
    fn unsorted_fractions_rejected() {
        let c = CorruptionConfig { fractions: vec![0.5, 0.2], ..CorruptionConfig::default() };
        assert!(corruption_sweep(&c, 0).is_err());
    }

    #[test]
    fn single_repeat_is_deterministic() {
        let c = CorruptionConfig { repeats: 1, ..CorruptionConfig::default() };
        assert_eq!(corruption_sweep(&c, 4).unwrap(), corruption_sweep(&c, 4).unwrap());
    }
}

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{rmse, PolynomialModel, PolynomialProblem, Precision, RegularizerSpec};
use crate::error::{domain, Result};
use crate::rng::stream;

/// One fitted model evaluated on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub target: String,
    pub model: String,
    pub n: usize,
    pub repeat: usize,
    pub train_rmse: f64,
    /// Absent when the target has no structure to test against.
    pub test_rmse: Option<f64>,
}

impl ExperimentRecord {
    pub const CSV_HEADER: &'static str = "experiment,target,model,n,repeat,train_rmse,test_rmse";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:e},{}",
            self.experiment,
            self.target,
            self.model,
            self.n,
            self.repeat,
            self.train_rmse,
            self.test_rmse.map(|v| format!("{v:e}")).unwrap_or_default()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenignTarget {
    /// `sin(x)·cos(x²)`
    Simple,
    /// `x + cos(πx)`
    Structured,
    /// i.i.d. standard normal labels
    Noise,
}

impl BenignTarget {
    pub const ALL: [Self; 3] = [Self::Simple, Self::Structured, Self::Noise];

    pub fn label(self) -> &'static str {
        match self {
            Self::Simple => "simple",
            Self::Structured => "structured",
            Self::Noise => "noise",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.label() == s)
    }

    pub fn function(self, x: f64) -> Option<f64> {
        match self {
            Self::Simple => Some(x.sin() * (x * x).cos()),
            Self::Structured => Some(x + (std::f64::consts::PI * x).cos()),
            Self::Noise => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenignConfig {
    pub target: BenignTarget,
    pub n: usize,
    pub degree: usize,
    pub gamma: f64,
    pub x_low: f64,
    pub x_high: f64,
    /// Tried in order until the train RMSE reaches `train_rmse_goal`.
    pub noise_ladder: Vec<f64>,
    pub train_rmse_goal: f64,
    pub test_points: usize,
    pub curve_points: usize,
}

impl BenignConfig {
    /// `1e-2, 1e-4, …, 1e-48`.
    pub fn default_ladder() -> Vec<f64> {
        (1..=24).map(|k| 10f64.powi(-2 * k)).collect()
    }

    pub fn new(target: BenignTarget, n: usize) -> Self {
        Self {
            target,
            n,
            degree: 150,
            gamma: 2.0,
            x_low: -3.0,
            x_high: 3.0,
            noise_ladder: Self::default_ladder(),
            train_rmse_goal: 1e-2,
            test_points: 200,
            curve_points: 301,
        }
    }

    pub fn regularizer(&self) -> RegularizerSpec {
        RegularizerSpec::Geometric { gamma: self.gamma }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenignRecord {
    pub config: BenignConfig,
    pub seed: u64,
    pub train_inputs: Vec<f64>,
    pub train_targets: Vec<f64>,
    /// `(σ², train RMSE)` for every rung tried.
    pub ladder: Vec<(f64, f64)>,
    pub noise_variance: f64,
    pub reached_goal: bool,
    pub train_rmse: f64,
    /// RMSE against the noise-free target on a grid over the training hull.
    pub test_rmse: Option<f64>,
    /// Fitted curve sampled on a grid over the training hull.
    pub curve: Vec<(f64, f64)>,
    pub model: PolynomialModel,
}

impl BenignRecord {
    pub fn record(&self) -> ExperimentRecord {
        ExperimentRecord {
            experiment: "benign-overfit".into(),
            target: self.config.target.label().into(),
            model: format!("poly{}-geometric", self.config.degree),
            n: self.config.n,
            repeat: 0,
            train_rmse: self.train_rmse,
            test_rmse: self.test_rmse,
        }
    }
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

fn hull(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Training inputs uniform on `[x_low, x_high]`; targets noise-free for the
/// structured kinds and standard normal for [`BenignTarget::Noise`].
pub fn benign_overfitting_experiment(config: &BenignConfig, seed: u64) -> Result<BenignRecord> {
    if config.n == 0 {
        return domain("benign overfitting needs n >= 1");
    }
    if config.noise_ladder.is_empty() {
        return domain("noise ladder is empty");
    }
    let mut rng = stream(seed, "softbias/benign", 0);
    let train_inputs: Vec<f64> = (0..config.n).map(|_| rng.gen_range(config.x_low..config.x_high)).collect();
    let train_targets: Vec<f64> = train_inputs
        .iter()
        .map(|&x| config.target.function(x).unwrap_or_else(|| StandardNormal.sample(&mut rng)))
        .collect();

    let problem = PolynomialProblem::new(&train_inputs, &train_targets, config.degree, config.regularizer())?;
    let mut ladder = Vec::new();
    let mut chosen = None;
    for &s2 in &config.noise_ladder {
        let model = problem.fit(s2, Precision::Auto)?;
        let train = rmse(&model.predict(&train_inputs), &train_targets);
        ladder.push((s2, train));
        let done = train <= config.train_rmse_goal;
        chosen = Some((model, train, s2));
        if done {
            break;
        }
    }
    let (model, train_rmse, noise_variance) = chosen.expect("ladder is nonempty");

    let (lo, hi) = hull(&train_inputs);
    let grid = linspace(lo, hi, config.test_points);
    let truth: Option<Vec<f64>> = grid.iter().map(|&x| config.target.function(x)).collect();
    let test_rmse = truth.map(|t| rmse(&model.predict(&grid), &t));
    let curve_x = linspace(lo, hi, config.curve_points);
    let curve = curve_x.iter().copied().zip(model.predict(&curve_x)).collect();

    Ok(BenignRecord {
        config: config.clone(),
        seed,
        train_inputs,
        train_targets,
        ladder,
        noise_variance,
        reached_goal: train_rmse <= config.train_rmse_goal,
        train_rmse,
        test_rmse,
        curve,
        model,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRidge {
    pub lambda: f64,
    pub test_rmse: f64,
}

/// Isotropic ridge on the same basis, with the penalty picked by looking at
/// the test set. The fit uses `σ² = 0.5`, so the objective is
/// `‖y − Xw‖² + λ‖w‖²`.
pub fn oracle_ridge(
    train_inputs: &[f64],
    train_targets: &[f64],
    test_inputs: &[f64],
    test_targets: &[f64],
    degree: usize,
    lambdas: &[f64],
) -> Result<OracleRidge> {
    let mut best: Option<OracleRidge> = None;
    for &lambda in lambdas {
        let problem =
            PolynomialProblem::new(train_inputs, train_targets, degree, RegularizerSpec::Isotropic { lambda })?;
        let model = problem.fit(0.5, Precision::Double)?;
        let test_rmse = rmse(&model.predict(test_inputs), test_targets);
        if best.is_none_or(|b| test_rmse < b.test_rmse) {
            best = Some(OracleRidge { lambda, test_rmse });
        }
    }
    best.ok_or_else(|| crate::error::Error::Domain("no ridge penalties given".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllsizesProblem {
    /// Quadratic with N(0,1) coefficients.
    Degree2,
    /// Degree 15 with coefficient `j` drawn from N(0, 1/j!).
    Degree15,
    /// `cos(1.5πx)`
    Cosine,
}

impl AllsizesProblem {
    pub const ALL: [Self; 3] = [Self::Degree2, Self::Degree15, Self::Cosine];

    pub fn label(self) -> &'static str {
        match self {
            Self::Degree2 => "degree-2",
            Self::Degree15 => "degree-15",
            Self::Cosine => "cosine",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.label() == s)
    }

    fn draw_target<R: Rng>(self, rng: &mut R) -> Vec<f64> {
        match self {
            Self::Degree2 => (0..3).map(|_| StandardNormal.sample(rng)).collect(),
            Self::Degree15 => {
                let mut factorial = 1.0;
                (0..16)
                    .map(|j| {
                        if j > 0 {
                            factorial *= j as f64;
                        }
                        let z: f64 = StandardNormal.sample(rng);
                        z / factorial.sqrt()
                    })
                    .collect()
            }
            Self::Cosine => Vec::new(),
        }
    }

    fn evaluate(self, coefficients: &[f64], x: f64) -> f64 {
        match self {
            Self::Cosine => (1.5 * std::f64::consts::PI * x).cos(),
            _ => coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllsizesModel {
    Deg2,
    Deg15Unregularized,
    Deg15Ordered,
}

impl AllsizesModel {
    pub const ALL: [Self; 3] = [Self::Deg2, Self::Deg15Unregularized, Self::Deg15Ordered];

    pub fn label(self) -> &'static str {
        match self {
            Self::Deg2 => "deg2",
            Self::Deg15Unregularized => "deg15-unreg",
            Self::Deg15Ordered => "deg15-ordered",
        }
    }

    fn degree(self) -> usize {
        match self {
            Self::Deg2 => 2,
            _ => 15,
        }
    }

    fn regularizer(self) -> RegularizerSpec {
        match self {
            Self::Deg15Ordered => RegularizerSpec::ORDERED_POWER,
            _ => RegularizerSpec::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllsizesConfig {
    pub problems: Vec<AllsizesProblem>,
    pub n_grid: Vec<usize>,
    pub repeats: usize,
    pub test_n: usize,
    /// Standard deviation of the Gaussian noise added to training targets.
    pub noise_std: f64,
    /// With `σ² = 0.5` the fitted objective is `Σ r² + Σ λ_j w_j²`.
    pub noise_variance: f64,
}

impl Default for AllsizesConfig {
    fn default() -> Self {
        Self {
            problems: AllsizesProblem::ALL.to_vec(),
            n_grid: (1..=10).map(|k| 10 * k).collect(),
            repeats: 100,
            test_n: 100,
            noise_std: 0.1,
            noise_variance: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllsizesCell {
    pub problem: AllsizesProblem,
    pub n: usize,
    pub model: AllsizesModel,
    pub mean: f64,
    /// Sample standard deviation over repeats.
    pub std: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllsizesComparison {
    pub problem: AllsizesProblem,
    pub n: usize,
    pub ordered_mean: f64,
    pub best_competitor: AllsizesModel,
    pub best_mean: f64,
    /// `sqrt((s_ordered² + s_best²) / 2)`.
    pub pooled_std: f64,
}

impl AllsizesComparison {
    pub fn within_pooled_std(&self) -> bool {
        self.ordered_mean <= self.best_mean + self.pooled_std
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllsizesTable {
    pub records: Vec<ExperimentRecord>,
    pub cells: Vec<AllsizesCell>,
}

impl AllsizesTable {
    pub fn cell(&self, problem: AllsizesProblem, n: usize, model: AllsizesModel) -> Option<&AllsizesCell> {
        self.cells.iter().find(|c| c.problem == problem && c.n == n && c.model == model)
    }

    /// Ordered-penalty model against the better of the two other models for
    /// every `(problem, n)` cell.
    pub fn comparisons(&self) -> Vec<AllsizesComparison> {
        let mut out = Vec::new();
        for c in self.cells.iter().filter(|c| c.model == AllsizesModel::Deg15Ordered) {
            let best = [AllsizesModel::Deg2, AllsizesModel::Deg15Unregularized]
                .iter()
                .filter_map(|&m| self.cell(c.problem, c.n, m))
                .min_by(|a, b| a.mean.total_cmp(&b.mean));
            if let Some(best) = best {
                out.push(AllsizesComparison {
                    problem: c.problem,
                    n: c.n,
                    ordered_mean: c.mean,
                    best_competitor: best.model,
                    best_mean: best.mean,
                    pooled_std: (0.5 * (c.std * c.std + best.std * best.std)).sqrt(),
                });
            }
        }
        out
    }

    pub const SUMMARY_HEADER: &'static str = "problem,n,model,mean_rmse,std_rmse,median_rmse";

    pub fn summary_rows(&self) -> Vec<String> {
        self.cells
            .iter()
            .map(|c| {
                format!("{},{},{},{:e},{:e},{:e}", c.problem.label(), c.n, c.model.label(), c.mean, c.std, c.median)
            })
            .collect()
    }
}

fn job_index(problem: usize, n: usize, repeat: usize) -> u64 {
    ((problem as u64) << 48) | ((n as u64) << 24) | repeat as u64
}

fn mean_std_median(values: &[f64]) -> (f64, f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var =
        if values.len() > 1 { values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0) } else { 0.0 };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 { sorted[mid] } else { 0.5 * (sorted[mid - 1] + sorted[mid]) };
    (mean, var.sqrt(), median)
}

/// Inputs for training and testing are drawn from N(0,1); the input scale
/// is frozen from the training inputs, so test points may fall outside
/// `[−1, 1]` after scaling. RMSE is measured against noise-free targets.
pub fn allsizes_experiment(config: &AllsizesConfig, seed: u64) -> Result<AllsizesTable> {
    if config.repeats == 0 || config.test_n == 0 {
        return domain("allsizes needs repeats >= 1 and test_n >= 1");
    }
    if let Some(&n) = config.n_grid.iter().find(|&&n| n == 0) {
        return domain(format!("training size {n} in n_grid"));
    }
    let jobs: Vec<(usize, usize, usize)> = config
        .problems
        .iter()
        .enumerate()
        .flat_map(|(p, _)| config.n_grid.iter().flat_map(move |&n| (0..config.repeats).map(move |r| (p, n, r))))
        .collect();

    let per_job: Vec<Result<Vec<ExperimentRecord>>> = jobs
        .par_iter()
        .map(|&(p, n, repeat)| {
            let problem = config.problems[p];
            let mut rng = stream(seed, "softbias/allsizes", job_index(p, n, repeat));
            let coefficients = problem.draw_target(&mut rng);
            let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let xt: Vec<f64> = (0..config.test_n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let y: Vec<f64> = x
                .iter()
                .map(|&v| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    problem.evaluate(&coefficients, v) + config.noise_std * e
                })
                .collect();
            let yt: Vec<f64> = xt.iter().map(|&v| problem.evaluate(&coefficients, v)).collect();
            AllsizesModel::ALL
                .iter()
                .map(|&model| {
                    let prob = PolynomialProblem::new(&x, &y, model.degree(), model.regularizer())?;
                    let fitted = prob.fit(config.noise_variance, Precision::Double)?;
                    Ok(ExperimentRecord {
                        experiment: "allsizes".into(),
                        target: problem.label().into(),
                        model: model.label().into(),
                        n,
                        repeat,
                        train_rmse: rmse(&fitted.predict(&x), &y),
                        test_rmse: Some(rmse(&fitted.predict(&xt), &yt)),
                    })
                })
                .collect()
        })
        .collect();
    let mut records = Vec::with_capacity(jobs.len() * AllsizesModel::ALL.len());
    for r in per_job {
        records.extend(r?);
    }

    let mut cells = Vec::new();
    let block = config.repeats * AllsizesModel::ALL.len();
    for (chunk, (p, n)) in
        records.chunks(block).zip(config.problems.iter().flat_map(|&p| config.n_grid.iter().map(move |&n| (p, n))))
    {
        for (m, &model) in AllsizesModel::ALL.iter().enumerate() {
            let values: Vec<f64> = chunk
                .iter()
                .skip(m)
                .step_by(AllsizesModel::ALL.len())
                .map(|r| r.test_rmse.expect("allsizes records carry test rmse"))
                .collect();
            let (mean, std, median) = mean_std_median(&values);
            cells.push(AllsizesCell { problem: p, n, model, mean, std, median });
        }
    }
    Ok(AllsizesTable { records, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_csv_leaves_missing_test_blank() {
        let r = ExperimentRecord {
            experiment: "e".into(),
            target: "noise".into(),
            model: "m".into(),
            n: 3,
            repeat: 0,
            train_rmse: 0.5,
            test_rmse: None,
        };
        assert_eq!(r.csv_row(), "e,noise,m,3,0,5e-1,");
    }

    #[test]
    fn summary_statistics() {
        let (m, s, med) = mean_std_median(&[1.0, 2.0, 3.0, 10.0]);
        assert_eq!(m, 4.0);
        assert!((s - (50.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(med, 2.5);
    }

    #[test]
    fn target_lookup() {
        assert_eq!(BenignTarget::parse("structured"), Some(BenignTarget::Structured));
        assert_eq!(AllsizesProblem::parse("cosine"), Some(AllsizesProblem::Cosine));
        assert_eq!(BenignTarget::Noise.function(1.0), None);
    }

    #[test]
    fn small_allsizes_is_deterministic() {
        let config = AllsizesConfig { n_grid: vec![10], repeats: 1, ..AllsizesConfig::default() };
        let a = allsizes_experiment(&config, 5).unwrap();
        let b = allsizes_experiment(&config, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records.len(), 9);
        assert_eq!(a.cells.len(), 9);
    }
}

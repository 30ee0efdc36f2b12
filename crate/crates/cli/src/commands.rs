//! Subcommands. Each one reads its resolved config, runs the library
//! operation and buffers CSV (and optionally SVG) outputs.
//!
//! Repeated runs inside a subcommand use consecutive seeds starting at the
//! master seed, so repeat 0 of any subcommand reproduces a direct library
//! call with that seed.

use anyhow::Result;
use genlab_core::bounds::{default_validation_space, monte_carlo_bound_validation, ViolationReport};
use genlab_core::capacity::{
    fat_generalization_bound_with_constant, fat_shattering, rademacher_exact, rademacher_generalization_bound,
    rademacher_mc, uniform_line, uniform_square, vc_dimension, vc_generalization_bound_with_constant,
    ConstantFunctions, FiniteHypothesisClass, Halfplanes2D, Intervals1D, SignAsReal, Thresholds1D, TABLE_CONSTANT,
};
use genlab_core::compression::{balanced_task, bound_pipeline, linear_task, ConstantClassifier, LinearThreshold};
use genlab_core::double_descent::{double_descent_sweep, CurvePoint, DoubleDescentConfig, DoubleDescentPoint};
use genlab_core::evidence::{corruption_sweep, CorruptionConfig};
use genlab_core::softbias::{
    allsizes_experiment, benign_overfitting_experiment, oracle_ridge, AllsizesConfig, AllsizesModel, AllsizesProblem,
    AllsizesTable, BenignConfig, BenignTarget, ExperimentRecord,
};
use genlab_core::{BoundReport, CapacityEstimate, EvidenceRecord, KernelSpec, RiskSpec};

use crate::config::{ConfigError, Key, Kind, RunConfig};
use crate::output::Outputs;
use crate::svg::{render, Panel, Series};

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
    pub run: fn(&RunConfig, &mut Outputs) -> Result<()>,
}

pub const COMMANDS: &[Command] = &[
    Command {
        name: "benign-overfit",
        about: "Degree-150 polynomial with a geometric order-dependent penalty fitted down a noise ladder",
        keys: BENIGN_KEYS,
        run: benign_overfit,
    },
    Command {
        name: "allsizes",
        about: "Degree-2, unregularized degree-15 and ordered degree-15 fits across sample sizes",
        keys: ALLSIZES_KEYS,
        run: allsizes,
    },
    Command {
        name: "double-descent",
        about: "Minimum-norm random-feature regression swept over width, with effective dimensionality",
        keys: DOUBLE_DESCENT_KEYS,
        run: double_descent,
    },
    Command {
        name: "evidence-sweep",
        about: "GP log marginal likelihood as training labels are progressively corrupted",
        keys: EVIDENCE_KEYS,
        run: evidence_sweep,
    },
    Command {
        name: "capacity",
        about: "Side-by-side capacity measures and the bounds they induce",
        keys: CAPACITY_KEYS,
        run: capacity,
    },
    Command {
        name: "validate-bounds",
        about: "Monte-Carlo coverage check of the countable-hypothesis bound",
        keys: VALIDATE_KEYS,
        run: validate_bounds,
    },
    Command {
        name: "bound-report",
        about: "Quantize, compress and bound a linear-threshold or constant classifier",
        keys: BOUND_REPORT_KEYS,
        run: bound_report,
    },
];

fn config_error(msg: String) -> anyhow::Error {
    ConfigError(msg).into()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn svg_file(out: &mut Outputs, name: &str, panels: &[Panel]) {
    out.file(name, render(panels).into_bytes());
}

const BENIGN_KEYS: &[Key] = &[
    Key {
        name: "target",
        kind: Kind::Choice(&["noise", "simple", "structured"]),
        default: "noise",
        help: "noise: i.i.d. N(0,1) labels; simple: sin(x); structured: x + cos(πx)",
    },
    Key { name: "n", kind: Kind::Count, default: "30", help: "training points" },
    Key { name: "degree", kind: Kind::Index, default: "150", help: "polynomial degree" },
    Key { name: "gamma", kind: Kind::Positive, default: "2", help: "penalty base: Σ gamma^j w_j²" },
    Key { name: "x_low", kind: Kind::Real, default: "-3", help: "lower end of the input interval" },
    Key { name: "x_high", kind: Kind::Real, default: "3", help: "upper end of the input interval" },
    Key { name: "goal", kind: Kind::Positive, default: "0.01", help: "train RMSE that stops the noise ladder" },
    Key { name: "test_points", kind: Kind::Count, default: "200", help: "grid points for test RMSE" },
    Key { name: "curve_points", kind: Kind::Count, default: "301", help: "grid points for the fitted curve" },
    Key { name: "repeats", kind: Kind::Count, default: "1", help: "independent training sets" },
];

fn benign_overfit(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let target = BenignTarget::parse(cfg.raw("target")).expect("choice checked");
    let mut config = BenignConfig::new(target, cfg.get("n"));
    config.degree = cfg.get("degree");
    config.gamma = cfg.get("gamma");
    config.x_low = cfg.get("x_low");
    config.x_high = cfg.get("x_high");
    config.train_rmse_goal = cfg.get("goal");
    config.test_points = cfg.get("test_points");
    config.curve_points = cfg.get("curve_points");
    if config.x_low >= config.x_high {
        return Err(config_error(format!("x_low = {} must be below x_high = {}", config.x_low, config.x_high)));
    }
    let repeats: u64 = cfg.get("repeats");
    let lambdas: Vec<f64> = (-12..=2).map(|k| 10f64.powi(k)).collect();

    let mut records = Vec::new();
    let mut curves = Vec::new();
    let mut ladders = Vec::new();
    let mut first = None;
    for r in 0..repeats {
        let rec = benign_overfitting_experiment(&config, cfg.seed().wrapping_add(r))?;
        let mut row = rec.record();
        row.repeat = r as usize;
        print!(
            "repeat {r}: σ² = {:e}, train RMSE {:.3e}{}",
            rec.noise_variance,
            rec.train_rmse,
            if rec.reached_goal { "" } else { " (goal not reached)" }
        );
        if let Some(t) = rec.test_rmse {
            print!(", test RMSE {t:.3e}");
        }
        if target == BenignTarget::Structured {
            let (lo, hi) =
                rec.train_inputs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            let grid = linspace(lo, hi, config.test_points);
            let truth: Vec<f64> = grid.iter().filter_map(|&x| target.function(x)).collect();
            let oracle = oracle_ridge(&rec.train_inputs, &rec.train_targets, &grid, &truth, config.degree, &lambdas)?;
            print!(", oracle ridge {:.3e} at λ = {:e}", oracle.test_rmse, oracle.lambda);
        }
        println!();
        for (x, y) in &rec.curve {
            curves.push(format!("{r},{x},{y}"));
        }
        for (s, e) in &rec.ladder {
            ladders.push(format!("{r},{s},{e}"));
        }
        records.push(row);
        first.get_or_insert(rec);
    }
    out.csv("benign_overfit.csv", ExperimentRecord::CSV_HEADER, records.iter().map(ExperimentRecord::csv_row));
    out.csv("benign_overfit_curve.csv", "repeat,x,prediction", curves);
    out.csv("benign_overfit_ladder.csv", "repeat,noise_variance,train_rmse", ladders);

    if cfg.svg() {
        let rec = first.expect("at least one repeat");
        let mut p = Panel::new(format!("degree {} fit, {} target", config.degree, target.label()), "x", "y");
        if target.function(0.0).is_some() {
            let truth = rec.curve.iter().map(|&(x, _)| (x, target.function(x).unwrap_or(f64::NAN))).collect();
            p.series.push(Series::line("target", truth));
        }
        p.series.push(Series::line("fit", rec.curve.clone()));
        p.series.push(Series::markers(
            "train",
            rec.train_inputs.iter().copied().zip(rec.train_targets.iter().copied()).collect(),
        ));
        svg_file(out, "benign_overfit.svg", &[p]);
    }
    Ok(())
}

const ALLSIZES_KEYS: &[Key] = &[
    Key { name: "n_min", kind: Kind::Count, default: "10", help: "smallest training size" },
    Key { name: "n_max", kind: Kind::Count, default: "100", help: "largest training size" },
    Key { name: "n_step", kind: Kind::Count, default: "10", help: "training size increment" },
    Key { name: "repeats", kind: Kind::Count, default: "100", help: "repeats per (problem, n) cell" },
    Key { name: "test_n", kind: Kind::Count, default: "100", help: "test points per repeat" },
    Key { name: "noise_std", kind: Kind::NonNegative, default: "0.1", help: "label noise on training targets" },
    Key { name: "noise_variance", kind: Kind::Positive, default: "0.5", help: "σ² in the fitted objective" },
];

fn allsizes(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let (lo, hi, step): (usize, usize, usize) = (cfg.get("n_min"), cfg.get("n_max"), cfg.get("n_step"));
    if lo > hi {
        return Err(config_error(format!("n_min = {lo} exceeds n_max = {hi}")));
    }
    let config = AllsizesConfig {
        n_grid: (lo..=hi).step_by(step).collect(),
        repeats: cfg.get("repeats"),
        test_n: cfg.get("test_n"),
        noise_std: cfg.get("noise_std"),
        noise_variance: cfg.get("noise_variance"),
        ..AllsizesConfig::default()
    };
    let table = allsizes_experiment(&config, cfg.seed())?;
    let comparisons = table.comparisons();
    let within = comparisons.iter().filter(|c| c.within_pooled_std()).count();
    for c in &comparisons {
        println!(
            "{:>9} n={:<4} ordered {:.4}  best other ({}) {:.4}  pooled std {:.4}{}",
            c.problem.label(),
            c.n,
            c.ordered_mean,
            c.best_competitor.label(),
            c.best_mean,
            c.pooled_std,
            if c.within_pooled_std() { "" } else { "  OUTSIDE" }
        );
    }
    println!("{within} of {} cells within one pooled std", comparisons.len());

    out.csv("allsizes.csv", ExperimentRecord::CSV_HEADER, table.records.iter().map(ExperimentRecord::csv_row));
    out.csv("allsizes_summary.csv", AllsizesTable::SUMMARY_HEADER, table.summary_rows());
    out.csv(
        "allsizes_comparison.csv",
        "problem,n,ordered_mean,best_competitor,best_mean,pooled_std,within_pooled_std",
        comparisons.iter().map(|c| {
            format!(
                "{},{},{},{},{},{},{}",
                c.problem.label(),
                c.n,
                c.ordered_mean,
                c.best_competitor.label(),
                c.best_mean,
                c.pooled_std,
                c.within_pooled_std()
            )
        }),
    );

    if cfg.svg() {
        let panels: Vec<Panel> = AllsizesProblem::ALL
            .iter()
            .map(|&problem| {
                let mut p = Panel::new(problem.label(), "training points n", "mean test RMSE");
                p.log_y = true;
                for model in [AllsizesModel::Deg2, AllsizesModel::Deg15Unregularized, AllsizesModel::Deg15Ordered] {
                    let pts = config
                        .n_grid
                        .iter()
                        .filter_map(|&n| table.cell(problem, n, model).map(|c| (n as f64, c.mean)))
                        .collect();
                    p.series.push(Series::line(model.label(), pts));
                }
                p
            })
            .collect();
        svg_file(out, "allsizes.svg", &panels);
    }
    Ok(())
}

const DOUBLE_DESCENT_KEYS: &[Key] = &[
    Key { name: "n", kind: Kind::Count, default: "100", help: "training points" },
    Key { name: "test_n", kind: Kind::Count, default: "1000", help: "test points" },
    Key { name: "seeds", kind: Kind::Count, default: "20", help: "independent ensembles per width" },
    Key { name: "alpha", kind: Kind::Positive, default: "10", help: "α in N_eff = Σ λ/(λ+α)" },
    Key { name: "noise_std", kind: Kind::NonNegative, default: "1", help: "feature noise around the label" },
];

fn double_descent(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let n: usize = cfg.get("n");
    let seeds: u64 = cfg.get("seeds");
    let config = DoubleDescentConfig {
        test_n: cfg.get("test_n"),
        seeds: (0..seeds).map(|i| cfg.seed().wrapping_add(i)).collect(),
        alpha: cfg.get("alpha"),
        noise_std: cfg.get("noise_std"),
        ..DoubleDescentConfig::new(n, 0)
    };
    let sweep = double_descent_sweep(&config)?;
    if let Some(w) = &sweep.warning {
        eprintln!("warning: {w}");
    }
    if let Some(peak) = sweep.peak() {
        println!("peak test MSE {:.4} at d = {} (n = {n})", peak.test_mse, peak.d);
    }
    for c in &sweep.curve {
        println!(
            "d={:<5} train {:.3e}  test {:.4} ± {:.4}  N_eff {:.2} / {:.4}",
            c.d, c.train_mse, c.test_mse, c.test_mse_std_error, c.neff_hessian, c.neff_inverse
        );
    }
    out.csv("double_descent.csv", DoubleDescentPoint::CSV_HEADER, sweep.points.iter().map(DoubleDescentPoint::csv_row));
    out.csv(
        "double_descent_curve.csv",
        "d,train_mse,test_mse,test_mse_std_error,neff_hessian,neff_inverse",
        sweep.curve.iter().map(|c| {
            format!(
                "{},{},{},{},{},{}",
                c.d, c.train_mse, c.test_mse, c.test_mse_std_error, c.neff_hessian, c.neff_inverse
            )
        }),
    );

    if cfg.svg() {
        let d = |f: &dyn Fn(&CurvePoint) -> f64| -> Vec<(f64, f64)> {
            sweep.curve.iter().map(|c| (c.d as f64, f(c))).collect()
        };
        let mut train = Panel::new("train loss", "features d", "train MSE");
        train.series.push(Series::line("train", d(&|c| c.train_mse)));
        let mut test = Panel::new("test loss", "features d", "test MSE");
        test.log_y = true;
        test.series.push(
            Series::line("test", d(&|c| c.test_mse))
                .with_errors(d(&|c| c.test_mse_std_error).into_iter().map(|p| p.1).collect()),
        );
        let mut neff = Panel::new("effective dimensionality", "features d", "N_eff");
        neff.series.push(Series::line("Hessian", d(&|c| c.neff_hessian)));
        neff.series.push(Series::line("inverse × n", d(&|c| c.neff_inverse * n as f64)));
        let mut panels = [train, test, neff];
        for p in &mut panels {
            p.log_x = true;
            p.marker_x = Some(n as f64);
        }
        svg_file(out, "double_descent.svg", &panels);
    }
    Ok(())
}

const EVIDENCE_KEYS: &[Key] = &[
    Key { name: "n", kind: Kind::Count, default: "60", help: "training points" },
    Key { name: "x_low", kind: Kind::Real, default: "-3", help: "lower end of the input interval" },
    Key { name: "x_high", kind: Kind::Real, default: "3", help: "upper end of the input interval" },
    Key {
        name: "target_noise_variance",
        kind: Kind::NonNegative,
        default: "0.01",
        help: "noise on the clean sin(x) labels",
    },
    Key {
        name: "fraction_step",
        kind: Kind::Positive,
        default: "0.2",
        help: "spacing of corruption fractions in [0, 1]",
    },
    Key { name: "repeats", kind: Kind::Count, default: "20", help: "repeats per fraction" },
    Key { name: "lengthscale", kind: Kind::Positive, default: "1", help: "RBF lengthscale" },
    Key { name: "signal_variance", kind: Kind::Positive, default: "1", help: "RBF signal variance" },
    Key { name: "noise_variance", kind: Kind::NonNegative, default: "0.01", help: "GP likelihood noise variance" },
];

/// `0, step, 2·step, …`, always ending at 1.
fn fractions(step: f64) -> Vec<f64> {
    let m = (1.0 / step).round();
    if m >= 1.0 && (m * step - 1.0).abs() < 1e-9 {
        return (0..=m as usize).map(|k| k as f64 / m).collect();
    }
    let mut f: Vec<f64> = (0..).map(|k| k as f64 * step).take_while(|&v| v < 1.0).collect();
    f.push(1.0);
    f
}

fn evidence_sweep(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let step: f64 = cfg.get("fraction_step");
    if step > 1.0 {
        return Err(config_error(format!("fraction_step = {step} must not exceed 1")));
    }
    let config = CorruptionConfig {
        n: cfg.get("n"),
        x_low: cfg.get("x_low"),
        x_high: cfg.get("x_high"),
        target_noise_variance: cfg.get("target_noise_variance"),
        fractions: fractions(step),
        repeats: cfg.get("repeats"),
        kernel: KernelSpec {
            lengthscale: cfg.get("lengthscale"),
            signal_variance: cfg.get("signal_variance"),
            noise_variance: cfg.get("noise_variance"),
        },
        ..CorruptionConfig::default()
    };
    if config.x_low >= config.x_high {
        return Err(config_error(format!("x_low = {} must be below x_high = {}", config.x_low, config.x_high)));
    }
    let sweep = corruption_sweep(&config, cfg.seed())?;
    for s in &sweep.summary {
        println!("fraction {:.3}: mean log ML {:.3} ± {:.3}", s.fraction, s.mean, s.std_error);
    }
    let rises = sweep.increases_beyond_std_error();
    if rises.is_empty() {
        println!("nonincreasing within one standard error");
    } else {
        println!("increases beyond one standard error between {rises:?}");
    }
    out.csv("evidence.csv", EvidenceRecord::CSV_HEADER, sweep.records.iter().map(EvidenceRecord::csv_row));
    out.csv(
        "evidence_summary.csv",
        "fraction,mean_log_ml,std_error",
        sweep.summary.iter().map(|s| format!("{},{},{}", s.fraction, s.mean, s.std_error)),
    );
    if cfg.svg() {
        let mut p = Panel::new("evidence under label corruption", "corrupted fraction", "log marginal likelihood");
        p.series.push(
            Series::line("mean", sweep.summary.iter().map(|s| (s.fraction, s.mean)).collect())
                .with_errors(sweep.summary.iter().map(|s| s.std_error).collect()),
        );
        svg_file(out, "evidence.svg", &[p]);
    }
    Ok(())
}

const CAPACITY_KEYS: &[Key] = &[
    Key { name: "n", kind: Kind::Count, default: "10", help: "points for the complete sign class (at most 20)" },
    Key {
        name: "trials",
        kind: Kind::Count,
        default: "4000",
        help: "Monte-Carlo sign vectors for the Rademacher estimate",
    },
    Key { name: "delta", kind: Kind::Probability, default: "0.05", help: "failure probability of every bound" },
    Key { name: "d_max", kind: Kind::Count, default: "6", help: "largest set size tried by shattering searches" },
    Key { name: "restarts", kind: Kind::Count, default: "50", help: "random point sets per size" },
    Key { name: "gamma", kind: Kind::Positive, default: "0.25", help: "fat-shattering margin" },
    Key {
        name: "table_constant",
        kind: Kind::Positive,
        default: "1",
        help: "constant in the VC and fat-shattering rates",
    },
    Key {
        name: "bound_n",
        kind: Kind::Count,
        default: "100000",
        help: "sample size for the VC, fat and compression bounds",
    },
    Key { name: "flip", kind: Kind::Fraction, default: "0.1", help: "label noise of the compression task" },
];

struct CapacityRow {
    family: &'static str,
    estimate: Option<CapacityEstimate>,
    bound: BoundReport,
}

fn capacity(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let n: usize = cfg.get("n");
    let delta: f64 = cfg.get("delta");
    let (d_max, restarts): (usize, usize) = (cfg.get("d_max"), cfg.get("restarts"));
    let gamma: f64 = cfg.get("gamma");
    let constant: f64 = cfg.get("table_constant");
    let bound_n: usize = cfg.get("bound_n");
    let seed = cfg.seed();
    let small = RiskSpec::zero_one(n as u64, delta)?;
    let large = RiskSpec::zero_one(bound_n as u64, delta)?;
    if constant != TABLE_CONSTANT {
        println!("using table constant {constant} (library default {TABLE_CONSTANT})");
    }

    let class = FiniteHypothesisClass::complete_sign_class(n)?;
    let points: Vec<usize> = (0..n).collect();
    let exact = rademacher_exact(&class, &points)?;
    let mc = rademacher_mc(&class, &points, cfg.get("trials"), seed)?;
    let mut rows = vec![
        CapacityRow {
            family: "complete-sign-class",
            bound: rademacher_generalization_bound(0.0, exact.value, small)?,
            estimate: Some(exact),
        },
        CapacityRow {
            family: "complete-sign-class",
            bound: rademacher_generalization_bound(0.0, mc.value.clamp(0.0, 1.0), small)?,
            estimate: Some(mc),
        },
    ];
    let vc = [
        ("thresholds-1d", vc_dimension(&Thresholds1D, uniform_line, d_max, restarts, seed)?),
        ("intervals-1d", vc_dimension(&Intervals1D, uniform_line, d_max, restarts, seed)?),
        ("halfplanes-2d", vc_dimension(&Halfplanes2D, uniform_square, d_max, restarts, seed)?),
    ];
    for (family, e) in vc {
        rows.push(CapacityRow {
            family,
            bound: vc_generalization_bound_with_constant(0.0, e.value, large, constant)?,
            estimate: Some(e),
        });
    }
    let constants = ConstantFunctions { low: 0.0, high: 1.0 };
    let fat = [
        ("constants-[0,1]", fat_shattering(&constants, gamma, uniform_line, d_max, restarts, seed)?),
        ("halfplanes-2d", fat_shattering(&SignAsReal(Halfplanes2D), gamma, uniform_square, d_max, restarts, seed)?),
    ];
    for (family, e) in fat {
        rows.push(CapacityRow {
            family,
            bound: fat_generalization_bound_with_constant(0.0, e.value, large, constant)?,
            estimate: Some(e),
        });
    }
    let data = linear_task(bound_n, cfg.get("flip"), seed);
    let pipeline = bound_pipeline(&LinearThreshold::fit(&data), &data, large, 16, "deflate")?;
    rows.push(CapacityRow { family: "linear-threshold-16bit", estimate: None, bound: pipeline.bound });

    println!(
        "{:<24}{:<16}{:>9}  {:<19}{:>8}{:>12}{:>10}  vacuous",
        "family", "measure", "value", "method", "n", "complexity", "total"
    );
    for r in &rows {
        let (measure, value, method) = match &r.estimate {
            Some(e) => (
                e.measure.as_str().to_string(),
                format!("{:.4}{}", e.value, if e.lower_bound_only { "+" } else { "" }),
                e.method.as_str().to_string(),
            ),
            None => ("bits".to_string(), pipeline.artifact.bits.to_string(), "compressed".to_string()),
        };
        println!(
            "{:<24}{:<16}{:>9}  {:<19}{:>8}{:>12.4}{:>10.4}  {}",
            r.family,
            measure,
            value,
            method,
            r.bound.spec.n(),
            r.bound.complexity_term,
            r.bound.total,
            if r.bound.is_vacuous() { "yes" } else { "no" }
        );
    }
    println!("empirical risk is 0 in every row except the compression row");

    out.csv(
        "capacity.csv",
        &format!("family,{}", CapacityEstimate::CSV_HEADER),
        rows.iter().filter_map(|r| r.estimate.as_ref().map(|e| format!("{},{}", r.family, e.csv_row()))),
    );
    out.csv(
        "capacity_bounds.csv",
        &format!("family,{}", BoundReport::CSV_HEADER),
        rows.iter().map(|r| format!("{},{}", r.family, r.bound.csv_row())),
    );
    Ok(())
}

const VALIDATE_KEYS: &[Key] = &[
    Key { name: "trials", kind: Kind::Count, default: "10000", help: "independent training sets" },
    Key { name: "n", kind: Kind::Count, default: "100", help: "training points per trial" },
    Key { name: "delta", kind: Kind::Probability, default: "0.05", help: "bound failure probability" },
];

fn validate_bounds(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let n: u64 = cfg.get("n");
    let spec = RiskSpec::zero_one(n, cfg.get("delta"))?;
    let report = monte_carlo_bound_validation(&default_validation_space(), spec, cfg.get("trials"), cfg.seed())?;
    println!("{}", report.summary());
    println!(
        "violation rate {} the three-sigma limit",
        if report.violation_rate <= report.three_sigma_limit() { "is within" } else { "EXCEEDS" }
    );
    out.csv("bound_validation.csv", ViolationReport::CSV_HEADER, report.csv_rows());
    Ok(())
}

const BOUND_REPORT_KEYS: &[Key] = &[
    Key {
        name: "model",
        kind: Kind::Choice(&["linear", "constant"]),
        default: "linear",
        help: "hypothesis to compress",
    },
    Key { name: "n", kind: Kind::Count, default: "100000", help: "training points" },
    Key { name: "flip", kind: Kind::Fraction, default: "0.1", help: "label flip probability of the linear task" },
    Key {
        name: "bits",
        kind: Kind::Choice(&["4", "8", "16", "32"]),
        default: "32",
        help: "quantization bits per parameter",
    },
    Key { name: "codec", kind: Kind::Choice(&["deflate", "store"]), default: "deflate", help: "compression codec" },
    Key { name: "delta", kind: Kind::Probability, default: "0.05", help: "bound failure probability" },
];

fn bound_report(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let n: usize = cfg.get("n");
    let spec = RiskSpec::zero_one(n as u64, cfg.get("delta"))?;
    let (bits, codec): (u8, &str) = (cfg.get("bits"), cfg.raw("codec"));
    let report = match cfg.raw("model") {
        "linear" => {
            let data = linear_task(n, cfg.get("flip"), cfg.seed());
            bound_pipeline(&LinearThreshold::fit(&data), &data, spec, bits, codec)?
        }
        _ => {
            let data = balanced_task(n, cfg.seed());
            bound_pipeline(&ConstantClassifier { value: 1.0 }, &data, spec, bits, codec)?
        }
    };
    print!("{}", report.bound);
    let a = &report.artifact;
    println!(
        "artifact: {} parameters at {} bits, {} raw bytes, {} payload bits via {}",
        a.parameter_count, a.quantization_bits, a.raw_bytes, a.bits, a.codec_id
    );
    println!("empirical risk full precision {:.6}, quantized {:.6}", report.full_precision_risk, report.quantized_risk);
    out.csv("bound_report.csv", BoundReport::CSV_HEADER, [report.bound.csv_row()]);
    out.file("bound_report.artifact", a.to_bytes());
    Ok(())
}

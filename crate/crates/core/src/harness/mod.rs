//! Experiment runner: single runs, prediction-step sweeps and gradient checks.

mod config;
mod metrics;

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

pub use config::{DataSpec, ExperimentConfig, ProblemSpec, Schedule};
pub use metrics::{read_metrics, write_metrics, MetricRecord, HEADER};

use crate::error::{Error, Result};
use crate::numerics::{ParamVector, Rng};
use crate::predictor::run_training;
use crate::problems::{finite_difference_grad, gradient_discrepancy, Problem};

/// Environment variable that redirects every output file into a directory.
pub const OUTPUT_DIR_ENV: &str = "XGRAD_OUTPUT_DIR";

/// Where `path` is written, honoring [`OUTPUT_DIR_ENV`].
pub fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => Path::new(&dir).join(path.file_name().unwrap_or(path.as_os_str())),
        _ => path.to_path_buf(),
    }
}

fn create_file(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Outcome of one run, as written to its metrics file.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub output: PathBuf,
    pub prediction_steps: u32,
    pub records: Vec<MetricRecord>,
    pub iterations: u64,
    /// Iteration and message of a numeric abort.
    pub abort: Option<(u64, String)>,
    /// Known minimum of the training objective, when `eval_loss` measures it.
    pub optimum: Option<f64>,
}

impl RunReport {
    pub fn succeeded(&self) -> bool {
        self.abort.is_none()
    }

    pub fn final_eval_loss(&self) -> Option<f64> {
        self.records.last().map(|r| r.eval_loss)
    }

    pub fn final_train_loss(&self) -> Option<f64> {
        self.records.last().map(|r| r.train_loss)
    }

    pub fn best_eval_loss(&self) -> Option<f64> {
        self.records.iter().map(|r| r.eval_loss).reduce(f64::min)
    }

    /// First logged iteration with `eval_loss - optimum <= tol`.
    pub fn iters_to_tolerance(&self, tol: f64) -> Option<u64> {
        let opt = self.optimum?;
        self.records.iter().find(|r| r.eval_loss - opt <= tol).map(|r| r.iteration)
    }

    pub fn mean_pred_gap(&self) -> Option<f64> {
        let gaps: Vec<f64> = self.records.iter().filter_map(|r| r.pred_gap).collect();
        (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64)
    }
}

/// Runs `config` and writes its metrics to the resolved output path.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    run_to(config, &resolve_output(&config.output))
}

/// Runs `config` and writes its metrics to `path` exactly.
pub fn run_to(config: &ExperimentConfig, path: &Path) -> Result<RunReport> {
    config.validate()?;
    let problem = config.problem.build(config.seed)?;
    let training = run_training(problem.as_ref(), config)?;
    let mut trailer = vec![format!(
        "problem={} optimizer={} prediction_steps={} seed={}",
        config.problem.name(),
        config.optimizer,
        config.prediction_steps,
        config.seed
    )];
    let abort = training.abort.map(|(it, e)| (it, e.to_string()));
    trailer.push(match &abort {
        None => format!("status=ok iterations={}", training.iterations),
        Some((it, msg)) => format!("status=aborted iteration={it} error={msg}"),
    });
    write_metrics(create_file(path)?, &training.records, &trailer)?;
    Ok(RunReport {
        output: path.to_path_buf(),
        prediction_steps: config.prediction_steps,
        records: training.records,
        iterations: training.iterations,
        abort,
        optimum: if problem.has_holdout() { None } else { problem.optimum_value() },
    })
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub s: u32,
    /// `ok`, `aborted`, or `failed`.
    pub status: String,
    pub final_eval_loss: Option<f64>,
    pub best_eval_loss: Option<f64>,
    pub final_train_loss: Option<f64>,
    pub iters_to_tol: Option<u64>,
    pub mean_pred_gap: Option<f64>,
}

impl SweepRow {
    fn from_report(s: u32, report: &RunReport, tol: f64) -> Self {
        SweepRow {
            s,
            status: if report.succeeded() { "ok" } else { "aborted" }.into(),
            final_eval_loss: report.final_eval_loss(),
            best_eval_loss: report.best_eval_loss(),
            final_train_loss: report.final_train_loss(),
            iters_to_tol: report.iters_to_tolerance(tol),
            mean_pred_gap: report.mean_pred_gap(),
        }
    }

    fn failed(s: u32) -> Self {
        SweepRow {
            s,
            status: "failed".into(),
            final_eval_loss: None,
            best_eval_loss: None,
            final_train_loss: None,
            iters_to_tol: None,
            mean_pred_gap: None,
        }
    }

    fn cells(&self) -> [String; 7] {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        [
            self.s.to_string(),
            self.status.clone(),
            opt(self.final_eval_loss),
            opt(self.best_eval_loss),
            opt(self.final_train_loss),
            opt(self.iters_to_tol),
            opt(self.mean_pred_gap),
        ]
    }
}

pub const SWEEP_COLUMNS: [&str; 7] = [
    "s",
    "status",
    "final_eval_loss",
    "best_eval_loss",
    "final_train_loss",
    "iters_to_tol",
    "mean_pred_gap",
];

#[derive(Debug)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub runs: Vec<Result<RunReport>>,
    pub table_csv: PathBuf,
    pub table_txt: PathBuf,
}

impl SweepReport {
    pub fn all_succeeded(&self) -> bool {
        self.rows.iter().all(|r| r.status == "ok")
    }
}

fn with_suffix(base: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "metrics".into());
    base.with_file_name(format!("{stem}{suffix}.{ext}"))
}

/// Runs `config` once per prediction step in `s_values`, in parallel.
///
/// Member `s` writes `<stem>_s<s>.csv`; the summary goes to `<stem>_sweep.csv`
/// and an aligned `<stem>_sweep.txt`. A failing member is marked `failed` in
/// the table without stopping the others.
pub fn sweep(config: &ExperimentConfig, s_values: &[u32]) -> Result<SweepReport> {
    if s_values.is_empty() {
        return Err(Error::config("s", "sweep needs at least one value"));
    }
    config.validate()?;
    let base = resolve_output(&config.output);
    let runs: Vec<Result<RunReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = s_values
            .iter()
            .map(|&s| {
                let member = ExperimentConfig {
                    prediction_steps: s,
                    ..config.clone()
                };
                let path = with_suffix(&base, &format!("_s{s}"), "csv");
                scope.spawn(move || run_to(&member, &path))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or(Err(Error::Protocol("sweep member panicked"))))
            .collect()
    });
    let rows: Vec<SweepRow> = s_values
        .iter()
        .zip(&runs)
        .map(|(&s, r)| match r {
            Ok(report) => SweepRow::from_report(s, report, config.tolerance),
            Err(_) => SweepRow::failed(s),
        })
        .collect();

    let table_csv = with_suffix(&base, "_sweep", "csv");
    let mut w = csv::Writer::from_writer(create_file(&table_csv)?);
    w.write_record(SWEEP_COLUMNS).map_err(csv_error)?;
    for row in &rows {
        w.write_record(row.cells()).map_err(csv_error)?;
    }
    w.flush()?;

    let table_txt = with_suffix(&base, "_sweep", "txt");
    fs::write(&table_txt, aligned_table(&rows))?;
    Ok(SweepReport {
        rows,
        runs,
        table_csv,
        table_txt,
    })
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Renders the sweep rows as a right-aligned text table.
pub fn aligned_table(rows: &[SweepRow]) -> String {
    let body: Vec<[String; 7]> = rows.iter().map(SweepRow::cells).collect();
    let widths: Vec<usize> = (0..7)
        .map(|c| body.iter().map(|r| r[c].len()).chain([SWEEP_COLUMNS[c].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  "));
    };
    line(SWEEP_COLUMNS.to_vec(), &mut out);
    for r in &body {
        line(r.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

pub const GRADCHECK_POINTS: usize = 20;
pub const GRADCHECK_REL_TOL: f64 = 1e-4;
pub const GRADCHECK_ABS_FLOOR: f64 = 1e-8;

/// Per-block gradient check result.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCheck {
    pub name: String,
    pub coords: usize,
    pub max_rel: f64,
    pub max_abs: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct GradcheckReport {
    pub problem: String,
    pub seed: u64,
    pub h: f64,
    pub blocks: Vec<BlockCheck>,
    /// Absolute error at a known stationary point, where relative error is undefined.
    pub stationary: Option<(f64, bool)>,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.blocks.iter().all(|b| b.passed) && self.stationary.is_none_or(|(_, ok)| ok)
    }

    pub fn max_rel(&self) -> f64 {
        self.blocks.iter().map(|b| b.max_rel).fold(0.0, f64::max)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "gradcheck problem={} seed={} points={GRADCHECK_POINTS} h={:e} rel_tol={GRADCHECK_REL_TOL:e} abs_floor={GRADCHECK_ABS_FLOOR:e}\n",
            self.problem, self.seed, self.h
        );
        let name_w = self.blocks.iter().map(|b| b.name.len()).max().unwrap_or(5).max(5);
        let _ = writeln!(out, "{:<name_w$}  {:>6}  {:>10}  {:>10}  status", "block", "coords", "max_rel", "max_abs");
        for b in &self.blocks {
            let _ = writeln!(
                out,
                "{:<name_w$}  {:>6}  {:>10.3e}  {:>10.3e}  {}",
                b.name,
                b.coords,
                b.max_rel,
                b.max_abs,
                if b.passed { "pass" } else { "FAIL" }
            );
        }
        if let Some((abs, ok)) = self.stationary {
            let _ = writeln!(out, "stationary point: max_abs={abs:.3e} {}", if ok { "pass" } else { "FAIL" });
        }
        let _ = writeln!(out, "result: {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

/// Central-difference step: quadratics have no truncation error, so a wide
/// step only trims roundoff.
fn fd_step(problem: &str) -> f64 {
    if problem == "quadratic" {
        1e-3
    } else {
        1e-5
    }
}

/// Compares analytic and central-difference gradients of the default
/// `problem` at 20 points drawn from `seed`, block by block.
///
/// For the bilinear game the unsigned field `(M y, M' x)` is checked against
/// differences of `f`. Rosenbrock is additionally checked at its minimum.
pub fn gradcheck(problem_name: &str, seed: u64) -> Result<GradcheckReport> {
    let spec = ProblemSpec::default_for(problem_name)?;
    let problem = spec.build(seed)?;
    let h = fd_step(problem_name);
    let mut rng = Rng::new(seed);
    let blocks = problem.blocks();
    let mut worst: Vec<(f64, f64)> = vec![(0.0, 0.0); blocks.len()];

    for _ in 0..GRADCHECK_POINTS {
        let theta = rng.normal_vector(problem.dim(), 1.0);
        let analytic = oracle_gradient(problem.as_ref(), &theta)?;
        let numeric = finite_difference_grad(problem.as_ref(), &theta, None, h)?;
        for (block, w) in blocks.iter().zip(&mut worst) {
            let d = gradient_discrepancy(&analytic[block.range.clone()], &numeric.as_slice()[block.range.clone()], GRADCHECK_ABS_FLOOR);
            w.0 = w.0.max(d.max_rel);
            w.1 = w.1.max(d.max_abs);
        }
    }

    let stationary = if problem_name == "rosenbrock" {
        let min = ParamVector::new(vec![1.0; problem.dim()])?;
        let analytic = oracle_gradient(problem.as_ref(), &min)?;
        // a narrower step keeps the O(h^2) truncation term below the floor
        let numeric = finite_difference_grad(problem.as_ref(), &min, None, 1e-6)?;
        let d = gradient_discrepancy(&analytic, numeric.as_slice(), GRADCHECK_ABS_FLOOR);
        Some((d.max_abs, d.max_abs <= GRADCHECK_ABS_FLOOR))
    } else {
        None
    };

    Ok(GradcheckReport {
        problem: problem_name.to_string(),
        seed,
        h,
        blocks: blocks
            .into_iter()
            .zip(worst)
            .map(|(b, (max_rel, max_abs))| BlockCheck {
                coords: b.range.len(),
                name: b.name,
                max_rel,
                max_abs,
                passed: max_rel <= GRADCHECK_REL_TOL,
            })
            .collect(),
        stationary,
    })
}

/// The gradient of the reported loss: saddle problems report a descent
/// field with the ascent block negated, which is undone here.
fn oracle_gradient(problem: &dyn Problem, theta: &ParamVector) -> Result<Vec<f64>> {
    let (_, grad) = problem.loss_and_grad(theta, None)?;
    let mut g = grad.into_vec();
    if let Some(game) = problem.as_saddle() {
        for v in &mut g[game.dim_x()..] {
            *v = -*v;
        }
    }
    Ok(g)
}

/// Writes a gradcheck report to `path` (resolved against the output directory override).
pub fn write_gradcheck(report: &GradcheckReport, path: &Path) -> Result<PathBuf> {
    let path = resolve_output(path);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(&path, report.to_text())?;
    Ok(path)
}

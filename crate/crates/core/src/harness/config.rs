//! Experiment configuration: a flat `key=value` text format with a JSON
//! alternative. The README lists every key with its default.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::optimizers::{HyperParams, OptimizerKind};
use crate::problems::{
    gaussian_blobs, linear_regression_data, Batch, BilinearGame, LeastSquares, LogisticRegression, Mlp, Problem,
    Quadratic, Rosenbrock,
};

/// Learning-rate schedule over 1-based epochs.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Constant,
    /// The rate is multiplied by `factor` once each milestone epoch has
    /// completed: epoch `e` runs at `lr * factor^#{m : m < e}`.
    StepDecay { milestones: Vec<u32>, factor: f64 },
}

impl Schedule {
    pub fn lr_at(&self, base: f64, epoch: u32) -> f64 {
        match self {
            Schedule::Constant => base,
            Schedule::StepDecay { milestones, factor } => {
                let passed = milestones.iter().filter(|&&m| m < epoch).count();
                base * factor.powi(passed as i32)
            }
        }
    }

    fn validate(&self, epochs: u32) -> Result<()> {
        if let Schedule::StepDecay { milestones, factor } = self {
            if !(factor.is_finite() && *factor > 0.0 && *factor <= 1.0) {
                return Err(Error::config("factor", format!("must lie in (0, 1], got {factor}")));
            }
            if milestones.is_empty() {
                return Err(Error::config("milestones", "step_decay needs at least one milestone"));
            }
            if milestones.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::config("milestones", "must be strictly increasing"));
            }
            if milestones.iter().any(|&m| m < 1 || m > epochs) {
                return Err(Error::config("milestones", format!("must lie within [1, {epochs}]")));
            }
        }
        Ok(())
    }
}

/// Synthetic-data generator settings shared by the data-driven problems.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSpec {
    pub n_samples: usize,
    pub noise: f64,
    /// Rows held out (taken from the end) for evaluation.
    pub test_size: usize,
    /// Read examples from this CSV instead of generating them.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Quadratic { dim: usize, condition: f64 },
    Rosenbrock { a: f64, b: f64 },
    Logistic { data: DataSpec, radius: f64, l2: f64 },
    Mlp { data: DataSpec, radius: f64, hidden: usize, classes: usize },
    LinReg { data: DataSpec, n_features: usize },
    Bilinear { dim: usize },
}

impl ProblemSpec {
    pub const NAMES: [&'static str; 6] = ["quadratic", "rosenbrock", "logistic", "mlp", "linreg", "bilinear"];

    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Quadratic { .. } => "quadratic",
            ProblemSpec::Rosenbrock { .. } => "rosenbrock",
            ProblemSpec::Logistic { .. } => "logistic",
            ProblemSpec::Mlp { .. } => "mlp",
            ProblemSpec::LinReg { .. } => "linreg",
            ProblemSpec::Bilinear { .. } => "bilinear",
        }
    }

    /// The problem with every parameter at its default.
    pub fn default_for(name: &str) -> Result<Self> {
        Fields::default().problem(name)
    }

    /// Instantiates the problem; generated data are drawn from `seed`.
    pub fn build(&self, seed: u64) -> Result<Box<dyn Problem>> {
        Ok(match self {
            ProblemSpec::Quadratic { dim, condition } => Box::new(Quadratic::with_condition(*dim, *condition, seed)?),
            ProblemSpec::Rosenbrock { a, b } => Box::new(Rosenbrock::new(*a, *b)?),
            ProblemSpec::Logistic { data, radius, l2 } => {
                let (train, test) = load_or_generate(data, |n| gaussian_blobs(n, 2, *radius, data.noise, seed))?;
                let mut p = LogisticRegression::new(train)?.with_l2(*l2)?;
                if let Some(test) = test {
                    p = p.with_test(test)?;
                }
                // separable data have no finite optimum
                Box::new(p.clone().with_reference_optimum().unwrap_or(p))
            }
            ProblemSpec::Mlp { data, radius, hidden, classes } => {
                let (train, test) =
                    load_or_generate(data, |n| gaussian_blobs(n, *classes, *radius, data.noise, seed))?;
                let mut p = Mlp::new([train.n_features(), *hidden, *classes], train)?;
                if let Some(test) = test {
                    p = p.with_test(test)?;
                }
                Box::new(p)
            }
            ProblemSpec::LinReg { data, n_features } => {
                let (train, test) = load_or_generate(data, |n| {
                    linear_regression_data(n, *n_features, data.noise, seed).map(|(b, _)| b)
                })?;
                let mut p = LeastSquares::new(train)?;
                if let Some(test) = test {
                    p = p.with_test(test)?;
                }
                Box::new(p)
            }
            ProblemSpec::Bilinear { dim } => Box::new(BilinearGame::identity(*dim)?),
        })
    }
}

fn load_or_generate(
    spec: &DataSpec,
    generate: impl FnOnce(usize) -> Result<Batch>,
) -> Result<(Batch, Option<Batch>)> {
    let all = match &spec.path {
        Some(path) => Batch::read_csv(path)?,
        None => generate(spec.n_samples + spec.test_size)?,
    };
    if spec.test_size == 0 {
        Ok((all, None))
    } else {
        let (train, test) = all.split_tail(spec.test_size)?;
        Ok((train, Some(test)))
    }
}

/// A complete, validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub optimizer: OptimizerKind,
    pub hyper: HyperParams,
    pub prediction_steps: u32,
    pub schedule: Schedule,
    pub epochs: u32,
    /// Iterations per epoch for problems without a dataset.
    pub iters_per_epoch: u32,
    pub batch_size: usize,
    pub seed: u64,
    pub log_every: u64,
    /// Convergence threshold on `eval_loss - optimum` used by sweep summaries.
    pub tolerance: f64,
    /// Record wall-clock milliseconds; off keeps output byte-deterministic.
    pub wall_clock: bool,
    pub output: PathBuf,
}

impl ExperimentConfig {
    /// A config with defaults for everything but the three required keys.
    pub fn new(problem: ProblemSpec, optimizer: OptimizerKind, epochs: u32) -> Self {
        ExperimentConfig {
            problem,
            optimizer,
            hyper: HyperParams::defaults(optimizer),
            prediction_steps: 0,
            schedule: Schedule::Constant,
            epochs,
            iters_per_epoch: 1,
            batch_size: 128,
            seed: 0,
            log_every: 1,
            tolerance: 1e-8,
            wall_clock: false,
            output: PathBuf::from("metrics.csv"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hyper.validate(self.optimizer)?;
        for (key, v) in [
            ("epochs", self.epochs as u64),
            ("iters_per_epoch", self.iters_per_epoch as u64),
            ("batch_size", self.batch_size as u64),
            ("log_every", self.log_every),
        ] {
            if v == 0 {
                return Err(Error::config(key, "must be positive"));
            }
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::config("tolerance", "must be positive"));
        }
        self.schedule.validate(self.epochs)
    }

    /// Parses `key=value` text, or a JSON object when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let fields = if text.trim_start().starts_with('{') {
            Fields::from_json(text)?
        } else {
            Fields::from_text(text)?
        };
        fields.into_config()
    }

    /// Canonical `key=value` rendering; [`ExperimentConfig::parse`] inverts it.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        put("problem", self.problem.name().into());
        match &self.problem {
            ProblemSpec::Quadratic { dim, condition } => {
                put("dim", dim.to_string());
                put("condition", condition.to_string());
            }
            ProblemSpec::Rosenbrock { a, b } => {
                put("rosen_a", a.to_string());
                put("rosen_b", b.to_string());
            }
            ProblemSpec::Logistic { data, radius, l2 } => {
                put_data(&mut put, data);
                put("radius", radius.to_string());
                put("l2", l2.to_string());
            }
            ProblemSpec::Mlp { data, radius, hidden, classes } => {
                put_data(&mut put, data);
                put("radius", radius.to_string());
                put("hidden", hidden.to_string());
                put("classes", classes.to_string());
            }
            ProblemSpec::LinReg { data, n_features } => {
                put_data(&mut put, data);
                put("n_features", n_features.to_string());
            }
            ProblemSpec::Bilinear { dim } => put("dim", dim.to_string()),
        }
        let hp = &self.hyper;
        put("optimizer", self.optimizer.name().into());
        put("lr", hp.lr.to_string());
        put("momentum", hp.momentum.to_string());
        put("dampening", hp.dampening.to_string());
        put("weight_decay", hp.weight_decay.to_string());
        put("beta1", hp.beta1.to_string());
        put("beta2", hp.beta2.to_string());
        put("alpha", hp.alpha.to_string());
        put("eps", hp.eps.to_string());
        put("prediction_steps", self.prediction_steps.to_string());
        match &self.schedule {
            Schedule::Constant => put("schedule", "constant".into()),
            Schedule::StepDecay { milestones, factor } => {
                put("schedule", "step_decay".into());
                put(
                    "milestones",
                    milestones.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
                );
                put("factor", factor.to_string());
            }
        }
        put("epochs", self.epochs.to_string());
        put("iters_per_epoch", self.iters_per_epoch.to_string());
        put("batch_size", self.batch_size.to_string());
        put("seed", self.seed.to_string());
        put("log_every", self.log_every.to_string());
        put("tolerance", self.tolerance.to_string());
        put("wall_clock", self.wall_clock.to_string());
        put("output", self.output.display().to_string());
        out
    }
}

fn put_data(put: &mut impl FnMut(&str, String), data: &DataSpec) {
    put("n_samples", data.n_samples.to_string());
    put("noise", data.noise.to_string());
    put("test_size", data.test_size.to_string());
    if let Some(p) = &data.path {
        put("data", p.display().to_string());
    }
}

const KNOWN_KEYS: &[&str] = &[
    "problem", "dim", "condition", "rosen_a", "rosen_b", "n_samples", "noise", "test_size", "data", "radius", "l2",
    "hidden", "classes", "n_features", "optimizer", "lr", "momentum", "dampening", "weight_decay", "beta1", "beta2",
    "alpha", "eps", "prediction_steps", "schedule", "milestones", "factor", "epochs", "iters_per_epoch",
    "batch_size", "seed", "log_every", "tolerance", "wall_clock", "output",
];

fn canonical_key(key: &str) -> &str {
    match key {
        "s" => "prediction_steps",
        "batch" => "batch_size",
        "weight-decay" => "weight_decay",
        other => other,
    }
}

/// Raw key/value pairs, consumed as the config is assembled.
#[derive(Debug, Default)]
struct Fields {
    values: BTreeMap<String, String>,
}

impl Fields {
    fn insert(&mut self, key: &str, value: String, line: usize) -> Result<()> {
        let key = canonical_key(key.trim());
        if key.is_empty() {
            return Err(Error::Parse { line, message: "empty key".into() });
        }
        if self.values.insert(key.to_string(), value).is_some() {
            return Err(Error::config(key, "given more than once"));
        }
        Ok(())
    }

    fn from_text(text: &str) -> Result<Self> {
        let mut fields = Fields::default();
        for (ix, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: ix + 1,
                message: format!("expected key=value, got `{line}`"),
            })?;
            let v = v.trim().trim_matches('"').to_string();
            fields.insert(k, v, ix + 1)?;
        }
        Ok(fields)
    }

    fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let obj = value.as_object().ok_or_else(|| Error::Parse {
            line: 1,
            message: "expected a JSON object".into(),
        })?;
        let mut fields = Fields::default();
        for (k, v) in obj {
            let text = json_scalar(k, v)?;
            fields.insert(k, text, 1)?;
        }
        Ok(fields)
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::config(key, format!("expected a number, got `{v}`"))),
        }
    }

    fn int_or(&mut self, key: &str, default: u64, min: u64, max: u64) -> Result<u64> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => {
                let n: i128 = v
                    .parse()
                    .map_err(|_| Error::config(key, format!("expected an integer, got `{v}`")))?;
                if n < min as i128 || n > max as i128 {
                    return Err(Error::config(key, format!("must lie in [{min}, {max}], got {n}")));
                }
                Ok(n as u64)
            }
        }
    }

    fn usize_or(&mut self, key: &str, default: usize, min: usize) -> Result<usize> {
        self.int_or(key, default as u64, min as u64, u32::MAX as u64).map(|v| v as usize)
    }

    fn u32_or(&mut self, key: &str, default: u32, min: u32) -> Result<u32> {
        self.int_or(key, default as u64, min as u64, u32::MAX as u64).map(|v| v as u32)
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.take(key).as_deref() {
            None => Ok(default),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(other) => Err(Error::config(key, format!("expected true/false, got `{other}`"))),
        }
    }

    fn required(&mut self, key: &str) -> Result<String> {
        self.take(key).ok_or_else(|| Error::config(key, "missing required key"))
    }

    fn data(&mut self, n_default: usize, noise_default: f64) -> Result<DataSpec> {
        Ok(DataSpec {
            n_samples: self.usize_or("n_samples", n_default, 1)?,
            noise: self.f64_or("noise", noise_default)?,
            test_size: self.usize_or("test_size", 0, 0)?,
            path: self.take("data").map(PathBuf::from),
        })
    }

    fn problem(&mut self, name: &str) -> Result<ProblemSpec> {
        Ok(match name {
            "quadratic" => ProblemSpec::Quadratic {
                dim: self.usize_or("dim", 20, 1)?,
                condition: self.f64_or("condition", 100.0)?,
            },
            "rosenbrock" => ProblemSpec::Rosenbrock {
                a: self.f64_or("rosen_a", 1.0)?,
                b: self.f64_or("rosen_b", 100.0)?,
            },
            "logistic" => ProblemSpec::Logistic {
                data: self.data(200, 1.0)?,
                radius: self.f64_or("radius", 0.55)?,
                l2: self.f64_or("l2", 0.0)?,
            },
            "mlp" => ProblemSpec::Mlp {
                data: self.data(200, 0.7)?,
                radius: self.f64_or("radius", 2.0)?,
                hidden: self.usize_or("hidden", 16, 1)?,
                classes: self.usize_or("classes", 2, 2)?,
            },
            "linreg" => ProblemSpec::LinReg {
                data: self.data(200, 0.1)?,
                n_features: self.usize_or("n_features", 5, 1)?,
            },
            "bilinear" => ProblemSpec::Bilinear {
                dim: self.usize_or("dim", 1, 1)?,
            },
            other => {
                return Err(Error::config(
                    "problem",
                    format!("unknown problem `{other}` (expected one of {})", ProblemSpec::NAMES.join(", ")),
                ))
            }
        })
    }

    fn schedule(&mut self) -> Result<Schedule> {
        let kind = self.take("schedule");
        let milestones = self.take("milestones");
        let factor = self.f64_or("factor", 0.1)?;
        let kind = kind.unwrap_or_else(|| if milestones.is_some() { "step_decay" } else { "constant" }.into());
        match kind.as_str() {
            "constant" => {
                if milestones.is_some() {
                    return Err(Error::config("milestones", "only valid with schedule=step_decay"));
                }
                Ok(Schedule::Constant)
            }
            "step_decay" | "step" | "multistep" => {
                let raw = milestones.ok_or_else(|| Error::config("milestones", "missing required key"))?;
                let milestones = raw
                    .trim_matches(|c| c == '[' || c == ']')
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<u32>()
                            .map_err(|_| Error::config("milestones", format!("invalid epoch `{s}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Schedule::StepDecay { milestones, factor })
            }
            other => Err(Error::config("schedule", format!("unknown schedule `{other}`"))),
        }
    }

    fn into_config(mut self) -> Result<ExperimentConfig> {
        let problem_name = self.required("problem")?;
        let problem = self.problem(&problem_name)?;
        let optimizer_name = self.required("optimizer")?;
        let optimizer: OptimizerKind = optimizer_name.parse()?;
        let defaults = if optimizer_name.eq_ignore_ascii_case("sgd") {
            HyperParams::sgd(1e-2)
        } else {
            HyperParams::defaults(optimizer)
        };
        let hyper = HyperParams {
            lr: self.f64_or("lr", defaults.lr)?,
            momentum: self.f64_or("momentum", defaults.momentum)?,
            dampening: self.f64_or("dampening", defaults.dampening)?,
            weight_decay: self.f64_or("weight_decay", defaults.weight_decay)?,
            beta1: self.f64_or("beta1", defaults.beta1)?,
            beta2: self.f64_or("beta2", defaults.beta2)?,
            alpha: self.f64_or("alpha", defaults.alpha)?,
            eps: self.f64_or("eps", defaults.eps)?,
        };
        let epochs_raw = self.required("epochs")?;
        self.values.insert("epochs".into(), epochs_raw);
        let config = ExperimentConfig {
            problem,
            optimizer,
            hyper,
            prediction_steps: self.u32_or("prediction_steps", 0, 0)?,
            epochs: self.u32_or("epochs", 1, 1)?,
            schedule: self.schedule()?,
            iters_per_epoch: self.u32_or("iters_per_epoch", 1, 1)?,
            batch_size: self.usize_or("batch_size", 128, 1)?,
            seed: self.int_or("seed", 0, 0, u64::MAX)?,
            log_every: self.int_or("log_every", 1, 1, u64::MAX)?,
            tolerance: self.f64_or("tolerance", 1e-8)?,
            wall_clock: self.bool_or("wall_clock", false)?,
            output: self.take("output").map(PathBuf::from).unwrap_or_else(|| "metrics.csv".into()),
        };
        if let Some(key) = self.values.keys().next() {
            let message = if KNOWN_KEYS.contains(&key.as_str()) {
                format!("does not apply to problem `{problem_name}`")
            } else {
                "unknown key".to_string()
            };
            return Err(Error::config(key.clone(), message));
        }
        config.validate()?;
        Ok(config)
    }
}

fn json_scalar(key: &str, v: &serde_json::Value) -> Result<String> {
    use serde_json::Value;
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        Value::Array(items) => Ok(items
            .iter()
            .map(|i| json_scalar(key, i))
            .collect::<Result<Vec<_>>>()?
            .join(",")),
        _ => Err(Error::config(key, "unsupported JSON value")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = ExperimentConfig::parse("problem=quadratic\noptimizer=adam\ns=1\nepochs=10\nseed=7\n").unwrap();
        assert_eq!(c.problem, ProblemSpec::Quadratic { dim: 20, condition: 100.0 });
        assert_eq!(c.optimizer, OptimizerKind::Adam);
        assert_eq!(c.hyper.lr, 1e-3);
        assert_eq!((c.hyper.beta1, c.hyper.beta2, c.hyper.eps), (0.9, 0.999, 1e-8));
        assert_eq!(c.prediction_steps, 1);
        assert_eq!(c.epochs, 10);
        assert_eq!(c.seed, 7);
        assert_eq!(c.schedule, Schedule::Constant);
    }

    #[test]
    fn sgdm_defaults() {
        let c = ExperimentConfig::parse("problem=mlp\noptimizer=sgdm\nepochs=1").unwrap();
        assert_eq!((c.hyper.momentum, c.hyper.dampening, c.hyper.weight_decay), (0.9, 0.0, 5e-4));
        let c = ExperimentConfig::parse("problem=mlp\noptimizer=sgd\nepochs=1").unwrap();
        assert_eq!((c.hyper.momentum, c.hyper.weight_decay), (0.0, 0.0));
    }

    #[test]
    fn negative_steps_name_the_key() {
        let err = ExperimentConfig::parse("problem=quadratic\noptimizer=adam\ns=-1\nepochs=10").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "prediction_steps"), "{err}");
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("problem=quadratic\noptimizer=adam\nepochs=1\nbogus=3", "bogus"),
            ("problem=quadratic\noptimizer=adam\nepochs=1\nhidden=3", "hidden"),
            ("problem=quadratic\noptimizer=adam", "epochs"),
            ("optimizer=adam\nepochs=1", "problem"),
            ("problem=quadratic\nepochs=1", "optimizer"),
            ("problem=quadratic\noptimizer=nadam\nepochs=1", "optimizer"),
            ("problem=quadratic\noptimizer=adam\nepochs=1\nbeta1=1.5", "beta1"),
            ("problem=quadratic\noptimizer=adam\nepochs=1\nlr=abc", "lr"),
            ("problem=quadratic\noptimizer=adam\nepochs=10\nmilestones=5,3", "milestones"),
            ("problem=quadratic\noptimizer=adam\nepochs=10\nmilestones=11", "milestones"),
            ("problem=quadratic\noptimizer=adam\nepochs=10\nmilestones=5\nfactor=2", "factor"),
            ("problem=quadratic\noptimizer=adam\nepochs=0", "epochs"),
            ("problem=quadratic\noptimizer=adam\nepochs=1\nlr=1\nlr=2", "lr"),
        ];
        for (text, key) in cases {
            match ExperimentConfig::parse(text) {
                Err(Error::Config { key: k, .. }) => assert_eq!(k, key, "{text}"),
                other => panic!("{text}: expected config error on {key}, got {other:?}"),
            }
        }
        assert!(matches!(ExperimentConfig::parse("problem quadratic"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn sgdm_protocol_preset_round_trips() {
        let text = "# step-decay protocol\nproblem=mlp\noptimizer=sgdm\nlr=1e-2\nmomentum=0.9\nweight_decay=5e-4\n\
                    milestones=[120,150]\nfactor=0.1\nbatch=128\nepochs=200\n";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.schedule, Schedule::StepDecay { milestones: vec![120, 150], factor: 0.1 });
        assert_eq!(c.batch_size, 128);
        assert_eq!(c.hyper.weight_decay, 5e-4);
        assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn json_alternative() {
        let c = ExperimentConfig::parse(
            r#"{"problem": "logistic", "optimizer": "adamw", "s": 2, "epochs": 5, "milestones": [2, 4], "wall_clock": false}"#,
        )
        .unwrap();
        assert_eq!(c.prediction_steps, 2);
        assert_eq!(c.schedule, Schedule::StepDecay { milestones: vec![2, 4], factor: 0.1 });
        assert!(ExperimentConfig::parse(r#"{"problem": "logistic", "optimizer": "adam", "epochs": 5, "x": 1}"#).is_err());
        assert!(ExperimentConfig::parse("[1, 2]").is_err());
    }

    #[test]
    fn schedule_counts_completed_milestones() {
        let s = Schedule::StepDecay { milestones: vec![120, 150], factor: 0.1 };
        assert_eq!(s.lr_at(1e-2, 1), 1e-2);
        assert_eq!(s.lr_at(1e-2, 120), 1e-2);
        assert_eq!(s.lr_at(1e-2, 121), 1e-2 * 0.1);
        assert_eq!(s.lr_at(1e-2, 151), 1e-2 * 0.1f64.powi(2));
        assert_eq!(Schedule::Constant.lr_at(0.3, 99), 0.3);
    }

    #[test]
    fn every_problem_round_trips_and_builds() {
        for name in ProblemSpec::NAMES {
            let spec = ProblemSpec::default_for(name).unwrap();
            let c = ExperimentConfig { seed: 3, ..ExperimentConfig::new(spec, OptimizerKind::Adam, 2) };
            assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c, "{name}");
            let p = c.problem.build(c.seed).unwrap();
            assert_eq!(p.name(), name);
        }
        assert!(ProblemSpec::default_for("cifar").is_err());
    }
}

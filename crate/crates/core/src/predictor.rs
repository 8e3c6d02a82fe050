//! Weight prediction around a base optimizer.
//!
//! Each training iteration caches the current weights, extrapolates them `s`
//! optimizer steps ahead using the cached update direction, runs the forward
//! and backward pass at the extrapolated weights, restores the cached weights
//! and finally lets the base optimizer update them with the gradient it just
//! obtained.

use std::collections::VecDeque;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::harness::{ExperimentConfig, MetricRecord};
use crate::numerics::{norm2, ParamVector, Rng};
use crate::optimizers::OptimizerState;
use crate::problems::{Batch, Problem};

/// Number of steps to extrapolate. Zero turns the wrapper into a pass-through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PredictorConfig {
    pub steps: u32,
}

impl PredictorConfig {
    pub fn new(steps: u32) -> Self {
        PredictorConfig { steps }
    }

    pub fn disabled() -> Self {
        PredictorConfig { steps: 0 }
    }

    pub fn enabled(&self) -> bool {
        self.steps > 0
    }
}

/// Holds the real weights while the pass runs at the predicted ones.
#[derive(Debug, Default)]
pub struct WeightCache {
    saved: Option<ParamVector>,
}

impl WeightCache {
    pub fn store(&mut self, theta: ParamVector) -> Result<()> {
        if self.saved.is_some() {
            return Err(Error::Protocol("weights are already cached"));
        }
        self.saved = Some(theta);
        Ok(())
    }

    pub fn cached(&self) -> Option<&ParamVector> {
        self.saved.as_ref()
    }

    pub fn restore(&mut self) -> Result<ParamVector> {
        self.saved.take().ok_or(Error::Protocol("no cached weights to restore"))
    }

    pub fn is_valid(&self) -> bool {
        self.saved.is_some()
    }
}

/// `theta - lr * s * d`, where `d` is the optimizer's cached update direction.
pub fn predict(theta: &ParamVector, state: &OptimizerState, steps: u32, lr: f64) -> Result<ParamVector> {
    theta.ensure_len(state.dim())?;
    if !(lr.is_finite() && lr > 0.0) {
        return Err(Error::config("lr", format!("must be positive, got {lr}")));
    }
    if steps == 0 {
        return Ok(theta.clone());
    }
    let scale = lr * steps as f64;
    let dir = state.update_direction();
    let out = theta.iter().zip(&dir).map(|(t, d)| t - scale * d).collect();
    ParamVector::from_computed(out, "weight prediction")
}

/// Everything one iteration produced.
#[derive(Debug, Clone)]
pub struct IterationOutcome {
    pub theta: ParamVector,
    pub state: OptimizerState,
    /// Loss at the predicted weights.
    pub loss: f64,
    /// Gradient at the predicted weights.
    pub grad: ParamVector,
    pub predicted: ParamVector,
    /// Update direction read from the cached state before the step.
    pub predicted_direction: ParamVector,
    /// Direction the base optimizer actually took.
    pub direction: ParamVector,
}

/// A base optimizer plus its weight cache.
#[derive(Debug)]
pub struct XGrad {
    state: OptimizerState,
    config: PredictorConfig,
    cache: WeightCache,
}

impl XGrad {
    pub fn new(state: OptimizerState, config: PredictorConfig) -> Self {
        XGrad {
            state,
            config,
            cache: WeightCache::default(),
        }
    }

    pub fn state(&self) -> &OptimizerState {
        &self.state
    }

    pub fn config(&self) -> PredictorConfig {
        self.config
    }

    pub fn into_state(self) -> OptimizerState {
        self.state
    }

    /// One iteration at learning rate `lr`, used for both prediction and update.
    pub fn iterate(
        &mut self,
        theta: ParamVector,
        problem: &dyn Problem,
        batch: Option<&Batch>,
        lr: f64,
    ) -> Result<IterationOutcome> {
        theta.ensure_len(problem.dim())?;
        self.cache.store(theta)?;
        let cached = self.cache.cached().expect("weights were just cached");
        let predicted_direction = self.state.update_direction();
        let predicted = predict(cached, &self.state, self.config.steps, lr);
        let evaluated = predicted.and_then(|p| problem.loss_and_grad(&p, batch).map(|lg| (p, lg)));
        let theta = self.cache.restore()?;
        let (predicted, (loss, grad)) = evaluated?;
        let step = self.state.step_with_lr(&theta, &grad, lr)?;
        self.state = step.state.clone();
        Ok(IterationOutcome {
            theta: step.theta,
            state: step.state,
            loss,
            grad,
            predicted,
            predicted_direction,
            direction: step.direction,
        })
    }
}

/// Functional form of [`XGrad::iterate`]: the input state is left untouched.
pub fn train_iteration(
    theta: ParamVector,
    state: &OptimizerState,
    problem: &dyn Problem,
    batch: Option<&Batch>,
    cfg: PredictorConfig,
    lr: f64,
) -> Result<IterationOutcome> {
    XGrad::new(state.clone(), cfg).iterate(theta, problem, batch, lr)
}

/// Tracks `|sum of the next s realized directions - s * predicted direction|`.
#[derive(Debug)]
pub(crate) struct PredictionGapTracker {
    steps: u32,
    pending: VecDeque<(Vec<f64>, u32)>,
}

impl PredictionGapTracker {
    pub(crate) fn new(steps: u32) -> Self {
        PredictionGapTracker {
            steps,
            pending: VecDeque::new(),
        }
    }

    /// Registers one iteration; returns the gap of the prediction that
    /// matured with it, if any.
    pub(crate) fn record(&mut self, predicted_direction: &ParamVector, realized: &ParamVector) -> Option<f64> {
        if self.steps == 0 {
            return None;
        }
        let s = self.steps as f64;
        self.pending
            .push_back((predicted_direction.iter().map(|d| -s * d).collect(), 0));
        for (acc, seen) in self.pending.iter_mut() {
            for (a, d) in acc.iter_mut().zip(realized) {
                *a += d;
            }
            *seen += 1;
        }
        match self.pending.front() {
            Some((_, seen)) if *seen == self.steps => {
                let (acc, _) = self.pending.pop_front().expect("front exists");
                Some(acc.iter().map(|v| v * v).sum::<f64>().sqrt())
            }
            _ => None,
        }
    }
}

/// A finished (or aborted) training run.
#[derive(Debug)]
pub struct TrainingRun {
    pub records: Vec<MetricRecord>,
    pub final_theta: ParamVector,
    pub iterations: u64,
    /// Iteration index and cause when a numeric failure stopped the run.
    pub abort: Option<(u64, Error)>,
}

/// Runs the configured number of epochs of [`XGrad`] training.
///
/// Data-driven problems are visited in shuffled mini-batches each epoch (or as
/// one full batch when `batch_size` covers the data). Pure-function problems
/// run `iters_per_epoch` iterations per epoch. A record is emitted every
/// `log_every` iterations and at the final iteration.
pub fn run_training(problem: &dyn Problem, config: &ExperimentConfig) -> Result<TrainingRun> {
    config.validate()?;
    let mut rng = Rng::new(config.seed);
    let theta0 = problem.initial_point(&mut rng);
    let state = OptimizerState::new(config.optimizer, config.hyper, problem.dim())?;
    let mut xgrad = XGrad::new(state, PredictorConfig::new(config.prediction_steps));
    let mut gaps = PredictionGapTracker::new(config.prediction_steps);

    let data = problem.train_data();
    let minibatched = data.is_some_and(|d| config.batch_size < d.len());
    let per_epoch = match data {
        Some(d) if minibatched => d.len().div_ceil(config.batch_size) as u64,
        Some(_) => 1,
        None => config.iters_per_epoch as u64,
    };
    let total = per_epoch * config.epochs as u64;
    let started = Instant::now();

    let mut theta = theta0;
    let mut records = Vec::new();
    let mut iteration = 0u64;
    let mut order: Vec<usize> = data.map(|d| (0..d.len()).collect()).unwrap_or_default();

    for epoch in 1..=config.epochs {
        let lr = config.schedule.lr_at(config.hyper.lr, epoch);
        if minibatched {
            rng.shuffle(&mut order);
        }
        for b in 0..per_epoch {
            iteration += 1;
            let batch = if minibatched {
                let lo = b as usize * config.batch_size;
                let hi = (lo + config.batch_size).min(order.len());
                data.map(|d| d.select(&order[lo..hi]))
            } else {
                None
            };
            let outcome = match xgrad.iterate(theta.clone(), problem, batch.as_ref(), lr) {
                Ok(o) => o,
                Err(e) => {
                    return Ok(TrainingRun {
                        records,
                        final_theta: theta,
                        iterations: iteration - 1,
                        abort: Some((iteration, e)),
                    })
                }
            };
            let gap = gaps.record(&outcome.predicted_direction, &outcome.direction);
            theta = outcome.theta;
            if iteration.is_multiple_of(config.log_every) || iteration == total {
                let eval_loss = match problem.eval_loss(&theta) {
                    Ok(v) => v,
                    Err(e) => {
                        return Ok(TrainingRun {
                            records,
                            final_theta: theta,
                            iterations: iteration,
                            abort: Some((iteration, e)),
                        })
                    }
                };
                records.push(MetricRecord {
                    epoch,
                    iteration,
                    lr,
                    train_loss: outcome.loss,
                    eval_loss,
                    grad_norm: norm2(&outcome.grad),
                    pred_gap: gap,
                    wall_ms: if config.wall_clock {
                        started.elapsed().as_millis() as u64
                    } else {
                        0
                    },
                });
            }
        }
    }
    Ok(TrainingRun {
        records,
        final_theta: theta,
        iterations: iteration,
        abort: None,
    })
}

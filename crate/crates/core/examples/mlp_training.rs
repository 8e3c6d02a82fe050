//! A 2-16-3 tanh network trained with SGDM and step decay, with and without
//! two-step weight prediction.

use xgrad::harness::{ExperimentConfig, Schedule};
use xgrad::predictor::run_training;

fn main() -> xgrad::Result<()> {
    let mut config = ExperimentConfig::parse(
        "problem=mlp\nclasses=3\nn_samples=600\ntest_size=200\noptimizer=sgdm\nlr=0.1\nepochs=60\nbatch=32\nlog_every=13\nseed=3\n",
    )?;
    config.schedule = Schedule::StepDecay {
        milestones: vec![30, 45],
        factor: 0.1,
    };
    let problem = config.problem.build(config.seed)?;
    for s in [0, 2] {
        config.prediction_steps = s;
        let run = run_training(problem.as_ref(), &config)?;
        let last = run.records.last().expect("at least one record");
        println!(
            "s={s}: {} iterations, lr {} at the end, train {:.4}, held-out {:.4}",
            run.iterations, last.lr, last.train_loss, last.eval_loss
        );
    }
    Ok(())
}

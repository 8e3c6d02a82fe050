//! Adam with and without weight prediction on an ill-conditioned quadratic.

use xgrad::numerics::{norm2, ParamVector, Rng};
use xgrad::optimizers::{HyperParams, OptimizerKind, OptimizerState};
use xgrad::predictor::{PredictorConfig, XGrad};
use xgrad::problems::{Problem, Quadratic};

fn main() -> xgrad::Result<()> {
    let problem = Quadratic::with_condition(20, 100.0, 0)?;
    let optimum = problem.optimum_value().expect("quadratics know their minimum");
    let hp = HyperParams::defaults(OptimizerKind::Adam).with_lr(1e-2);

    for s in 0..=4 {
        let state = OptimizerState::new(OptimizerKind::Adam, hp, problem.dim())?;
        let mut xgrad = XGrad::new(state, PredictorConfig::new(s));
        let mut theta: ParamVector = problem.initial_point(&mut Rng::new(0));
        let mut gap_at = Vec::new();
        for it in 1..=600 {
            let out = xgrad.iterate(theta, &problem, None, hp.lr)?;
            theta = out.theta;
            if it % 150 == 0 {
                gap_at.push(problem.loss(&theta, None)? - optimum);
            }
            if it == 1 && s > 0 {
                // before any step the predicted point is the current one
                assert_eq!(norm2(&out.predicted_direction), 0.0);
            }
        }
        let gaps: Vec<String> = gap_at.iter().map(|g| format!("{g:.2e}")).collect();
        println!("s={s}  loss-optimum at 150/300/450/600: {}", gaps.join("  "));
    }
    Ok(())
}

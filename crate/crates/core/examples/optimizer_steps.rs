//! Steps every optimizer on a scalar problem, then checks the summed-update
//! identity on a random gradient sequence.

use xgrad::numerics::{ParamVector, Rng};
use xgrad::optimizers::{telescoping_report, HyperParams, OptimizerKind, OptimizerState};

fn main() -> xgrad::Result<()> {
    let theta = ParamVector::new(vec![1.0])?;
    let grad = ParamVector::new(vec![1.0])?;
    println!("{:<10} {:>22} {:>22}", "optimizer", "theta_1", "theta_2");
    for kind in OptimizerKind::ALL {
        let hp = HyperParams::defaults(kind).with_weight_decay(0.0);
        let s0 = OptimizerState::new(kind, hp, 1)?;
        let (s1, t1) = s0.step(&theta, &grad)?;
        let (_, t2) = s1.step(&t1, &grad)?;
        println!("{:<10} {:>22} {:>22}", kind.name(), t1[0], t2[0]);
    }

    let mut rng = Rng::new(42);
    let theta0 = rng.normal_vector(50, 1.0);
    let grads: Vec<ParamVector> = (0..100).map(|_| rng.normal_vector(50, 1.0)).collect();
    println!();
    for kind in OptimizerKind::ALL {
        let report = telescoping_report(kind, HyperParams::defaults(kind), &theta0, &grads)?;
        match report.decay_bound {
            Some(bound) => println!("{:<10} residual {:.3e} (decay bound {:.3e})", kind.name(), report.error, bound),
            None => println!("{:<10} residual {:.3e}", kind.name(), report.error),
        }
    }
    Ok(())
}

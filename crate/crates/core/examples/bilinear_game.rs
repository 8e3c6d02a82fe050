//! Simultaneous descent-ascent spirals out on f(x, y) = xy; extragradient and
//! one-step weight prediction over plain SGD both spiral in.

use xgrad::numerics::{norm2, ParamVector};
use xgrad::optimizers::{HyperParams, OptimizerKind, OptimizerState};
use xgrad::predictor::{PredictorConfig, XGrad};
use xgrad::problems::BilinearGame;

fn main() -> xgrad::Result<()> {
    let game = BilinearGame::scalar();
    let lr = 0.1;
    let start = ParamVector::new(vec![1.0, 1.0])?;

    let mut gd = start.clone();
    let mut eg = start.clone();
    let mut xg = start.clone();
    let state = OptimizerState::new(OptimizerKind::Sgdm, HyperParams::sgd(lr), 2)?;
    let mut xgrad = XGrad::new(state, PredictorConfig::new(1));

    println!("{:>5} {:>12} {:>12} {:>12}", "iter", "|z| gd", "|z| eg", "|z| xgrad");
    for it in 1..=200 {
        gd = game.simultaneous_step(&gd, lr)?;
        eg = game.extragradient_step(&eg, lr)?;
        xg = xgrad.iterate(xg, &game, None, lr)?.theta;
        if it == 1 || it % 25 == 0 {
            println!("{it:>5} {:>12.6} {:>12.6} {:>12.6}", norm2(&gd), norm2(&eg), norm2(&xg));
        }
    }
    println!("per-step factors: gd {:.6}, eg {:.6}", (1.0 + lr * lr), 1.0 - lr * lr + lr.powi(4));
    Ok(())
}

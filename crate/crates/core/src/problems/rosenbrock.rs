use super::{check_dim, finish_grad, finish_loss, Batch, Problem};
use crate::error::{Error, Result};
use crate::numerics::{ParamVector, Rng};

/// `f(x, y) = (a - x)^2 + b (y - x^2)^2`, minimized at `(a, a^2)` with value 0.
#[derive(Debug, Clone, Copy)]
pub struct Rosenbrock {
    pub a: f64,
    pub b: f64,
}

impl Rosenbrock {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > 0.0) {
            return Err(Error::config("b", "rosenbrock needs finite a and positive b"));
        }
        Ok(Rosenbrock { a, b })
    }
}

impl Default for Rosenbrock {
    fn default() -> Self {
        Rosenbrock { a: 1.0, b: 100.0 }
    }
}

impl Problem for Rosenbrock {
    fn name(&self) -> &str {
        "rosenbrock"
    }

    fn dim(&self) -> usize {
        2
    }

    fn loss_and_grad(&self, theta: &ParamVector, _batch: Option<&Batch>) -> Result<(f64, ParamVector)> {
        check_dim(theta, 2)?;
        let (x, y) = (theta[0], theta[1]);
        let r = y - x * x;
        let loss = (self.a - x).powi(2) + self.b * r * r;
        let gx = -2.0 * (self.a - x) - 4.0 * self.b * x * r;
        let gy = 2.0 * self.b * r;
        Ok((finish_loss(loss, "rosenbrock")?, finish_grad(vec![gx, gy], "rosenbrock gradient")?))
    }

    fn optimum_value(&self) -> Option<f64> {
        Some(0.0)
    }

    fn initial_point(&self, _rng: &mut Rng) -> ParamVector {
        ParamVector::from_raw(vec![-1.2, 1.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimum() {
        let r = Rosenbrock::default();
        let (l, g) = r.loss_and_grad(&ParamVector::new(vec![1.0, 1.0]).unwrap(), None).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.is_zero());
        let (l, g) = r.loss_and_grad(&ParamVector::new(vec![0.0, 0.0]).unwrap(), None).unwrap();
        assert_eq!(l, 1.0);
        assert_eq!(g.as_slice(), &[-2.0, 0.0]);
        assert!(Rosenbrock::new(1.0, 0.0).is_err());
    }
}

//! Differentiable test problems with closed-form gradients.
//!
//! Everything here is hand-differentiated. [`finite_difference_grad`] is the
//! independent oracle used to check those gradients.

mod bilinear;
mod data;
mod least_squares;
mod logistic;
mod mlp;
mod quadratic;
mod rosenbrock;

use std::ops::Range;

pub use bilinear::BilinearGame;
pub use data::{gaussian_blobs, linear_regression_data, Batch, Dataset};
pub use least_squares::LeastSquares;
pub use logistic::LogisticRegression;
pub use mlp::Mlp;
pub use quadratic::Quadratic;
pub use rosenbrock::Rosenbrock;

use crate::error::{Error, Result};
use crate::numerics::{ParamVector, Rng};

/// A named contiguous slice of the parameter vector (e.g. one weight matrix).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamBlock {
    pub name: String,
    pub range: Range<usize>,
}

impl ParamBlock {
    pub fn new(name: impl Into<String>, range: Range<usize>) -> Self {
        ParamBlock {
            name: name.into(),
            range,
        }
    }
}

/// A loss/gradient oracle over a flat parameter vector.
///
/// Problems backed by a dataset treat `batch = None` as "the full training
/// set". Pure-function problems ignore the batch.
pub trait Problem: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn loss_and_grad(&self, theta: &ParamVector, batch: Option<&Batch>) -> Result<(f64, ParamVector)>;

    fn loss(&self, theta: &ParamVector, batch: Option<&Batch>) -> Result<f64> {
        self.loss_and_grad(theta, batch).map(|(l, _)| l)
    }

    /// Known minimum value, for convex instances.
    fn optimum_value(&self) -> Option<f64> {
        None
    }

    /// Training examples, when the problem is data-driven.
    fn train_data(&self) -> Option<&Batch> {
        None
    }

    /// Whether [`Problem::eval_loss`] reads a held-out set.
    fn has_holdout(&self) -> bool {
        false
    }

    /// Loss on held-out data when the problem has any, otherwise the full
    /// training objective.
    fn eval_loss(&self, theta: &ParamVector) -> Result<f64> {
        self.loss(theta, None)
    }

    fn initial_point(&self, rng: &mut Rng) -> ParamVector;

    fn blocks(&self) -> Vec<ParamBlock> {
        vec![ParamBlock::new("theta", 0..self.dim())]
    }

    /// The min-max structure, for problems whose "gradient" is a signed game field.
    fn as_saddle(&self) -> Option<&BilinearGame> {
        None
    }
}

impl<P: Problem + ?Sized> Problem for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn loss_and_grad(&self, theta: &ParamVector, batch: Option<&Batch>) -> Result<(f64, ParamVector)> {
        (**self).loss_and_grad(theta, batch)
    }
    fn loss(&self, theta: &ParamVector, batch: Option<&Batch>) -> Result<f64> {
        (**self).loss(theta, batch)
    }
    fn optimum_value(&self) -> Option<f64> {
        (**self).optimum_value()
    }
    fn train_data(&self) -> Option<&Batch> {
        (**self).train_data()
    }
    fn has_holdout(&self) -> bool {
        (**self).has_holdout()
    }
    fn eval_loss(&self, theta: &ParamVector) -> Result<f64> {
        (**self).eval_loss(theta)
    }
    fn initial_point(&self, rng: &mut Rng) -> ParamVector {
        (**self).initial_point(rng)
    }
    fn blocks(&self) -> Vec<ParamBlock> {
        (**self).blocks()
    }
    fn as_saddle(&self) -> Option<&BilinearGame> {
        (**self).as_saddle()
    }
}

/// Central differences of an arbitrary scalar function.
pub fn central_difference<F>(f: F, theta: &ParamVector, h: f64) -> Result<ParamVector>
where
    F: Fn(&ParamVector) -> Result<f64>,
{
    if !(1e-7..=1e-3).contains(&h) {
        return Err(Error::config("h", format!("step must lie in [1e-7, 1e-3], got {h}")));
    }
    let mut probe = theta.clone().into_vec();
    let mut out = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let plus = f(&ParamVector::from_raw(probe.clone()))?;
        probe[i] = orig - h;
        let minus = f(&ParamVector::from_raw(probe.clone()))?;
        probe[i] = orig;
        out.push((plus - minus) / (2.0 * h));
    }
    ParamVector::from_computed(out, "finite difference")
}

/// `(f(theta + h e_i) - f(theta - h e_i)) / 2h` for every coordinate.
pub fn finite_difference_grad(
    problem: &dyn Problem,
    theta: &ParamVector,
    batch: Option<&Batch>,
    h: f64,
) -> Result<ParamVector> {
    theta.ensure_len(problem.dim())?;
    central_difference(|p| problem.loss(p, batch), theta, h)
}

/// Largest per-coordinate discrepancies between two gradients over a block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientDiscrepancy {
    /// Max of `|a - n| / max(|a|, |n|)` over coordinates whose absolute
    /// error exceeds the absolute floor.
    pub max_rel: f64,
    pub max_abs: f64,
}

pub fn gradient_discrepancy(analytic: &[f64], numeric: &[f64], abs_floor: f64) -> GradientDiscrepancy {
    let mut max_rel = 0.0f64;
    let mut max_abs = 0.0f64;
    for (a, n) in analytic.iter().zip(numeric) {
        let abs = (a - n).abs();
        max_abs = max_abs.max(abs);
        if abs > abs_floor {
            max_rel = max_rel.max(abs / a.abs().max(n.abs()));
        }
    }
    GradientDiscrepancy { max_rel, max_abs }
}

pub(crate) fn check_dim(theta: &ParamVector, dim: usize) -> Result<()> {
    theta.ensure_len(dim)
}

pub(crate) fn finish_grad(grad: Vec<f64>, name: &str) -> Result<ParamVector> {
    ParamVector::from_computed(grad, name)
}

pub(crate) fn finish_loss(loss: f64, name: &str) -> Result<f64> {
    if loss.is_finite() {
        Ok(loss)
    } else {
        Err(Error::numeric(format!("{name} loss"), None))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ParamVector {
        ParamVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn fd_on_identity_quadratic() {
        let q = Quadratic::new(vec![vec![1.0]], vec![0.0]).unwrap();
        let g = finite_difference_grad(&q, &pv(&[1.0]), None, 1e-5).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fd_on_rosenbrock_origin() {
        let r = Rosenbrock::default();
        let g = finite_difference_grad(&r, &pv(&[0.0, 0.0]), None, 1e-5).unwrap();
        assert!((g[0] + 2.0).abs() <= 1e-6 * 2.0);
        assert!(g[1].abs() <= 1e-8);
    }

    #[test]
    fn fd_rejects_bad_step() {
        let r = Rosenbrock::default();
        assert!(finite_difference_grad(&r, &pv(&[0.0, 0.0]), None, 1e-2).is_err());
        assert!(finite_difference_grad(&r, &pv(&[0.0, 0.0]), None, 1e-9).is_err());
        assert!(finite_difference_grad(&r, &pv(&[0.0]), None, 1e-5).is_err());
    }

    #[test]
    fn discrepancy_respects_floor() {
        let d = gradient_discrepancy(&[1.0, 1e-12], &[1.0 + 1e-6, 0.0], 1e-8);
        assert!((d.max_rel - 1e-6 / (1.0 + 1e-6)).abs() < 1e-15);
        assert!((d.max_abs - 1e-6).abs() < 1e-15);
    }
}

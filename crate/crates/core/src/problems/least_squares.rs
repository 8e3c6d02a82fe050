use nalgebra::{DMatrix, DVector};

use super::{check_dim, finish_grad, finish_loss, Batch, Problem};
use crate::error::{Error, Result};
use crate::numerics::{dot, ParamVector, Rng};

/// Linear regression: mean of `0.5 * (x.theta - y)^2`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    train: Batch,
    test: Option<Batch>,
    optimum: f64,
}

impl LeastSquares {
    /// The optimum is solved from the normal equations at construction.
    pub fn new(train: Batch) -> Result<Self> {
        let d = train.n_features();
        let n = train.len();
        let x = DMatrix::from_fn(n, d, |i, j| train.row(i)[j]);
        let y = DVector::from_column_slice(train.labels());
        let gram = x.transpose() * &x;
        let rhs = x.transpose() * &y;
        let w = gram
            .cholesky()
            .ok_or_else(|| Error::config("data", "design matrix is rank deficient"))?
            .solve(&rhs);
        let mut p = LeastSquares {
            train,
            test: None,
            optimum: 0.0,
        };
        p.optimum = p.loss(&ParamVector::from_computed(w.iter().copied().collect(), "normal equations")?, None)?;
        Ok(p)
    }

    pub fn with_test(mut self, test: Batch) -> Result<Self> {
        if test.n_features() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: test.n_features(),
            });
        }
        self.test = Some(test);
        Ok(self)
    }
}

impl Problem for LeastSquares {
    fn name(&self) -> &str {
        "linreg"
    }

    fn dim(&self) -> usize {
        self.train.n_features()
    }

    fn loss_and_grad(&self, theta: &ParamVector, batch: Option<&Batch>) -> Result<(f64, ParamVector)> {
        let d = self.dim();
        check_dim(theta, d)?;
        let batch = batch.unwrap_or(&self.train);
        if batch.n_features() != d {
            return Err(Error::Dimension {
                expected: d,
                found: batch.n_features(),
            });
        }
        let mut loss = 0.0;
        let mut grad = vec![0.0; d];
        for i in 0..batch.len() {
            let x = batch.row(i);
            let r = dot(x, theta.as_slice()) - batch.label(i);
            loss += 0.5 * r * r;
            for (g, xi) in grad.iter_mut().zip(x) {
                *g += r * xi;
            }
        }
        let n = batch.len() as f64;
        for g in &mut grad {
            *g /= n;
        }
        Ok((finish_loss(loss / n, "linreg")?, finish_grad(grad, "linreg gradient")?))
    }

    fn optimum_value(&self) -> Option<f64> {
        Some(self.optimum)
    }

    fn train_data(&self) -> Option<&Batch> {
        Some(&self.train)
    }

    fn has_holdout(&self) -> bool {
        self.test.is_some()
    }

    fn eval_loss(&self, theta: &ParamVector) -> Result<f64> {
        self.loss(theta, self.test.as_ref())
    }

    fn initial_point(&self, _rng: &mut Rng) -> ParamVector {
        ParamVector::zeros(self.dim())
    }
}

use nalgebra::{DMatrix, DVector};

use super::{check_dim, finish_grad, finish_loss, Batch, Problem};
use crate::error::{Error, Result};
use crate::numerics::{dot, ParamVector, Rng};

/// Binary logistic regression without intercept: mean of
/// `softplus(x.theta) - y * x.theta` plus an optional `0.5 * l2 * |theta|^2`.
/// Labels must be 0 or 1.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    train: Batch,
    test: Option<Batch>,
    l2: f64,
    optimum: Option<f64>,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn check_binary(batch: &Batch) -> Result<()> {
    if batch.labels().iter().any(|&y| y != 0.0 && y != 1.0) {
        return Err(Error::config("label", "logistic regression labels must be 0 or 1"));
    }
    Ok(())
}

impl LogisticRegression {
    pub fn new(train: Batch) -> Result<Self> {
        check_binary(&train)?;
        Ok(LogisticRegression {
            train,
            test: None,
            l2: 0.0,
            optimum: None,
        })
    }

    pub fn with_test(mut self, test: Batch) -> Result<Self> {
        check_binary(&test)?;
        if test.n_features() != self.train.n_features() {
            return Err(Error::Dimension {
                expected: self.train.n_features(),
                found: test.n_features(),
            });
        }
        self.test = Some(test);
        Ok(self)
    }

    pub fn with_l2(mut self, l2: f64) -> Result<Self> {
        if !(l2.is_finite() && l2 >= 0.0) {
            return Err(Error::config("l2", "must be nonnegative"));
        }
        self.l2 = l2;
        self.optimum = None;
        Ok(self)
    }

    /// Solves for the training optimum with damped Newton iterations and
    /// records its value. Fails if the data are separable and `l2 == 0`.
    pub fn with_reference_optimum(mut self) -> Result<Self> {
        let theta = self.newton_minimizer()?;
        self.optimum = Some(self.loss(&theta, None)?);
        Ok(self)
    }

    fn newton_minimizer(&self) -> Result<ParamVector> {
        let d = self.dim();
        let n = self.train.len() as f64;
        let mut theta = ParamVector::zeros(d);
        let (mut loss, mut grad) = self.loss_and_grad(&theta, None)?;
        for _ in 0..100 {
            if grad.iter().map(|g| g.abs()).fold(0.0, f64::max) < 1e-15 {
                break;
            }
            let mut h = DMatrix::<f64>::identity(d, d) * self.l2;
            for i in 0..self.train.len() {
                let x = self.train.row(i);
                let p = sigmoid(dot(x, theta.as_slice()));
                let w = p * (1.0 - p) / n;
                for r in 0..d {
                    for c in 0..d {
                        h[(r, c)] += w * x[r] * x[c];
                    }
                }
            }
            let step = h
                .cholesky()
                .ok_or_else(|| Error::numeric("logistic Hessian is singular", None))?
                .solve(&DVector::from_column_slice(grad.as_slice()));
            let mut t = 1.0;
            loop {
                let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
                let cand = ParamVector::from_computed(cand, "newton iterate")?;
                let (l, g) = self.loss_and_grad(&cand, None)?;
                if l <= loss || t < 1e-10 {
                    theta = cand;
                    loss = l;
                    grad = g;
                    break;
                }
                t *= 0.5;
            }
        }
        if grad.iter().map(|g| g.abs()).fold(0.0, f64::max) > 1e-9 {
            return Err(Error::numeric("logistic optimum did not converge (separable data?)", None));
        }
        Ok(theta)
    }
}

impl Problem for LogisticRegression {
    fn name(&self) -> &str {
        "logistic"
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
        let n = batch.len() as f64;
        let mut loss = 0.0;
        let mut grad = vec![0.0; d];
        for i in 0..batch.len() {
            let x = batch.row(i);
            let y = batch.label(i);
            let z = dot(x, theta.as_slice());
            loss += softplus(z) - y * z;
            let r = sigmoid(z) - y;
            for (g, xi) in grad.iter_mut().zip(x) {
                *g += r * xi;
            }
        }
        loss /= n;
        for g in &mut grad {
            *g /= n;
        }
        if self.l2 > 0.0 {
            loss += 0.5 * self.l2 * dot(theta.as_slice(), theta.as_slice());
            for (g, t) in grad.iter_mut().zip(theta) {
                *g += self.l2 * t;
            }
        }
        Ok((finish_loss(loss, "logistic")?, finish_grad(grad, "logistic gradient")?))
    }

    fn optimum_value(&self) -> Option<f64> {
        self.optimum
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::gaussian_blobs;

    #[test]
    fn single_example() {
        let b = Batch::new(vec![vec![1.0]], vec![1.0]).unwrap();
        let p = LogisticRegression::new(b).unwrap();
        let (l, g) = p.loss_and_grad(&ParamVector::zeros(1), None).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((g[0] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_labels() {
        let b = Batch::new(vec![vec![1.0]], vec![2.0]).unwrap();
        assert!(LogisticRegression::new(b).is_err());
    }

    #[test]
    fn extreme_margins_stay_finite() {
        let b = Batch::new(vec![vec![1.0], vec![-1.0]], vec![1.0, 1.0]).unwrap();
        let p = LogisticRegression::new(b).unwrap();
        let (l, _) = p.loss_and_grad(&ParamVector::new(vec![800.0]).unwrap(), None).unwrap();
        assert!((l - 400.0).abs() < 1e-9);
    }

    #[test]
    fn newton_reference_is_stationary() {
        let data = gaussian_blobs(200, 2, 0.5, 1.0, 4).unwrap();
        let p = LogisticRegression::new(data).unwrap().with_reference_optimum().unwrap();
        let opt = p.optimum_value().unwrap();
        // no nearby point does better
        let theta = p.newton_minimizer().unwrap();
        for k in 0..2 {
            for s in [-1e-4, 1e-4] {
                let mut v = theta.clone().into_vec();
                v[k] += s;
                assert!(p.loss(&ParamVector::new(v).unwrap(), None).unwrap() >= opt);
            }
        }
    }
}

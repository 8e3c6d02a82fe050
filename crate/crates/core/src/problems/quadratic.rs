use nalgebra::{DMatrix, DVector};

use super::{check_dim, finish_grad, finish_loss, Batch, Problem};
use crate::error::{Error, Result};
use crate::numerics::{ParamVector, Rng};

/// `f(theta) = 0.5 theta' A theta - b' theta` with `A` symmetric positive definite.
#[derive(Debug, Clone)]
pub struct Quadratic {
    a: DMatrix<f64>,
    b: DVector<f64>,
    minimizer: Vec<f64>,
    optimum: f64,
}

impl Quadratic {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let n = b.len();
        if n == 0 || a.len() != n || a.iter().any(|row| row.len() != n) {
            return Err(Error::config("A", format!("expected a {n}x{n} matrix")));
        }
        let a = DMatrix::from_fn(n, n, |i, j| a[i][j]);
        Quadratic::from_matrix(a, DVector::from_vec(b))
    }

    pub fn from_matrix(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = b.len();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::config("A", format!("expected a {n}x{n} matrix")));
        }
        let scale = a.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::config("A", "matrix is not symmetric"));
                }
            }
        }
        let chol = a
            .clone()
            .cholesky()
            .ok_or_else(|| Error::config("A", "matrix is not positive definite"))?;
        let x = chol.solve(&b);
        let optimum = -0.5 * b.dot(&x);
        Ok(Quadratic {
            minimizer: x.iter().copied().collect(),
            a,
            b,
            optimum,
        })
    }

    /// Diagonal instance with eigenvalues log-spaced over `[1, condition]`.
    /// The minimizer has entries drawn uniformly from `[-0.5, 0.5]`.
    pub fn with_condition(dim: usize, condition: f64, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("dim", "must be positive"));
        }
        if !(condition.is_finite() && condition >= 1.0) {
            return Err(Error::config("condition", format!("must be >= 1, got {condition}")));
        }
        let eig: Vec<f64> = (0..dim)
            .map(|i| {
                let frac = if dim == 1 { 0.0 } else { i as f64 / (dim - 1) as f64 };
                condition.powf(frac)
            })
            .collect();
        let mut rng = Rng::new(seed);
        let target: Vec<f64> = (0..dim).map(|_| rng.uniform_in(-0.5, 0.5)).collect();
        let a = DMatrix::from_diagonal(&DVector::from_vec(eig.clone()));
        let b = DVector::from_iterator(dim, eig.iter().zip(&target).map(|(l, x)| l * x));
        Quadratic::from_matrix(a, b)
    }

    pub fn minimizer(&self) -> &[f64] {
        &self.minimizer
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn largest_eigenvalue(&self) -> f64 {
        self.a.clone().symmetric_eigen().eigenvalues.max()
    }
}

impl Problem for Quadratic {
    fn name(&self) -> &str {
        "quadratic"
    }

    fn dim(&self) -> usize {
        self.b.len()
    }

    fn loss_and_grad(&self, theta: &ParamVector, _batch: Option<&Batch>) -> Result<(f64, ParamVector)> {
        check_dim(theta, self.dim())?;
        let x = DVector::from_column_slice(theta.as_slice());
        let ax = &self.a * &x;
        let loss = 0.5 * x.dot(&ax) - self.b.dot(&x);
        let grad: Vec<f64> = ax.iter().zip(self.b.iter()).map(|(g, b)| g - b).collect();
        Ok((finish_loss(loss, "quadratic")?, finish_grad(grad, "quadratic gradient")?))
    }

    fn optimum_value(&self) -> Option<f64> {
        Some(self.optimum)
    }

    fn initial_point(&self, _rng: &mut Rng) -> ParamVector {
        ParamVector::zeros(self.dim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ParamVector {
        ParamVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn identity_examples() {
        let q = Quadratic::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap();
        let (l, g) = q.loss_and_grad(&pv(&[1.0, 1.0]), None).unwrap();
        assert_eq!(l, 1.0);
        assert_eq!(g, pv(&[1.0, 1.0]));

        let q = Quadratic::new(vec![vec![1.0]], vec![2.0]).unwrap();
        let (l, g) = q.loss_and_grad(&pv(&[2.0]), None).unwrap();
        assert_eq!(l, -2.0);
        assert_eq!(g, pv(&[0.0]));
        assert_eq!(q.optimum_value(), Some(-2.0));
    }

    #[test]
    fn diagonal_example() {
        let q = Quadratic::new(vec![vec![1.0, 0.0], vec![0.0, 10.0]], vec![0.0, 0.0]).unwrap();
        let (l, g) = q.loss_and_grad(&pv(&[1.0, 1.0]), None).unwrap();
        assert_eq!(l, 5.5);
        assert_eq!(g, pv(&[1.0, 10.0]));
    }

    #[test]
    fn rejects_non_spd() {
        assert!(Quadratic::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]], vec![0.0, 0.0]).is_err());
        assert!(Quadratic::new(vec![vec![1.0, 0.5], vec![0.0, 1.0]], vec![0.0, 0.0]).is_err());
        assert!(Quadratic::new(vec![vec![1.0]], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn conditioned_preset() {
        let q = Quadratic::with_condition(20, 100.0, 3).unwrap();
        let eig = q.matrix().diagonal();
        assert!((eig.max() / eig.min() - 100.0).abs() < 1e-9);
        let at_min = q.loss(&ParamVector::new(q.minimizer().to_vec()).unwrap(), None).unwrap();
        assert!((at_min - q.optimum_value().unwrap()).abs() < 1e-12);
        assert!(Quadratic::with_condition(3, 0.5, 0).is_err());
    }
}

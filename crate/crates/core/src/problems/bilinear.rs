use super::{check_dim, finish_grad, Batch, ParamBlock, Problem};
use crate::error::{Error, Result};
use crate::numerics::{ParamVector, Rng};

/// The min-max game `f(x, y) = x' M y`, minimized over `x` and maximized over `y`.
///
/// As a [`Problem`] the iterate is `z = (x, y)` and the reported "gradient" is
/// the descent field `(M y, -M' x)`: descending along it ascends in `y`, so the
/// ordinary optimizers drive the game unchanged.
#[derive(Debug, Clone)]
pub struct BilinearGame {
    m: Vec<f64>,
    dim_x: usize,
    dim_y: usize,
}

impl BilinearGame {
    pub fn new(m: Vec<Vec<f64>>) -> Result<Self> {
        let dim_x = m.len();
        let dim_y = m.first().map(Vec::len).unwrap_or(0);
        if dim_x == 0 || dim_y == 0 || m.iter().any(|r| r.len() != dim_y) {
            return Err(Error::config("M", "coupling matrix must be non-empty and rectangular"));
        }
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::numeric("coupling matrix", None));
        }
        Ok(BilinearGame {
            m: m.into_iter().flatten().collect(),
            dim_x,
            dim_y,
        })
    }

    /// `f(x, y) = x y`.
    pub fn scalar() -> Self {
        BilinearGame {
            m: vec![1.0],
            dim_x: 1,
            dim_y: 1,
        }
    }

    /// `M = I` in `dim` dimensions per player.
    pub fn identity(dim: usize) -> Result<Self> {
        BilinearGame::new(
            (0..dim)
                .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn dim_x(&self) -> usize {
        self.dim_x
    }

    pub fn dim_y(&self) -> usize {
        self.dim_y
    }

    fn m_times(&self, y: &[f64]) -> Vec<f64> {
        (0..self.dim_x)
            .map(|i| (0..self.dim_y).map(|j| self.m[i * self.dim_y + j] * y[j]).sum())
            .collect()
    }

    fn mt_times(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim_y)
            .map(|j| (0..self.dim_x).map(|i| self.m[i * self.dim_y + j] * x[i]).sum())
            .collect()
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(self.m_times(y)).map(|(a, b)| a * b).sum()
    }

    /// `(grad_x f, grad_y f) = (M y, M' x)`.
    pub fn vector_field(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (self.m_times(y), self.mt_times(x))
    }

    fn split<'a>(&self, z: &'a ParamVector) -> Result<(&'a [f64], &'a [f64])> {
        check_dim(z, self.dim_x + self.dim_y)?;
        Ok(z.as_slice().split_at(self.dim_x))
    }

    /// Simultaneous gradient descent-ascent: `x -= lr M y`, `y += lr M' x`.
    pub fn simultaneous_step(&self, z: &ParamVector, lr: f64) -> Result<ParamVector> {
        let (x, y) = self.split(z)?;
        let (gx, gy) = self.vector_field(x, y);
        let next = x
            .iter()
            .zip(&gx)
            .map(|(a, g)| a - lr * g)
            .chain(y.iter().zip(&gy).map(|(a, g)| a + lr * g))
            .collect();
        ParamVector::from_computed(next, "simultaneous step")
    }

    /// Extragradient: extrapolate one descent-ascent step, then update the
    /// original point with the field evaluated at the extrapolated one.
    pub fn extragradient_step(&self, z: &ParamVector, lr: f64) -> Result<ParamVector> {
        if !(lr.is_finite() && lr > 0.0) {
            return Err(Error::config("lr", "must be positive"));
        }
        let (x, y) = self.split(z)?;
        let mid = self.simultaneous_step(z, lr)?;
        let (xm, ym) = mid.as_slice().split_at(self.dim_x);
        let (gx, gy) = self.vector_field(xm, ym);
        let next = x
            .iter()
            .zip(&gx)
            .map(|(a, g)| a - lr * g)
            .chain(y.iter().zip(&gy).map(|(a, g)| a + lr * g))
            .collect();
        ParamVector::from_computed(next, "extragradient step")
    }
}

impl Problem for BilinearGame {
    fn name(&self) -> &str {
        "bilinear"
    }

    fn dim(&self) -> usize {
        self.dim_x + self.dim_y
    }

    fn loss_and_grad(&self, theta: &ParamVector, _batch: Option<&Batch>) -> Result<(f64, ParamVector)> {
        let (x, y) = self.split(theta)?;
        let (gx, gy) = self.vector_field(x, y);
        let field: Vec<f64> = gx.into_iter().chain(gy.into_iter().map(|g| -g)).collect();
        Ok((self.value(x, y), finish_grad(field, "bilinear field")?))
    }

    fn initial_point(&self, _rng: &mut Rng) -> ParamVector {
        ParamVector::from_raw(vec![1.0; self.dim()])
    }

    fn blocks(&self) -> Vec<ParamBlock> {
        vec![
            ParamBlock::new("x", 0..self.dim_x),
            ParamBlock::new("y", self.dim_x..self.dim()),
        ]
    }

    fn as_saddle(&self) -> Option<&BilinearGame> {
        Some(self)
    }
}

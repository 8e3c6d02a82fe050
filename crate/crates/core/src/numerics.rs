//! Flat `f64` vectors and the seeded random generator used across the crate.
//!
//! Public operations have value semantics: they borrow their inputs and return
//! a fresh vector. Finiteness is checked once per operation on the result.

use std::ops::Index;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fixed-length vector of finite reals: weights, gradients and moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    /// Wraps `values`, rejecting empty input and non-finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension {
                expected: 1,
                found: 0,
            });
        }
        check_finite(&values, "ParamVector::new")?;
        Ok(ParamVector(values))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "ParamVector dimension must be positive");
        ParamVector(vec![0.0; dim])
    }

    pub fn filled(dim: usize, value: f64) -> Result<Self> {
        ParamVector::new(vec![value; dim])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    /// Builds a vector from an already computed buffer, checking finiteness.
    pub(crate) fn from_computed(values: Vec<f64>, context: &str) -> Result<Self> {
        check_finite(&values, context)?;
        Ok(ParamVector(values))
    }

    /// Wraps a buffer without checking; callers validate at the operation boundary.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty());
        ParamVector(values)
    }

    pub(crate) fn ensure_len(&self, expected: usize) -> Result<()> {
        if self.len() != expected {
            return Err(Error::Dimension {
                expected,
                found: self.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn first_non_finite(&self) -> Option<usize> {
        self.0.iter().position(|x| !x.is_finite())
    }
}

impl TryFrom<Vec<f64>> for ParamVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        ParamVector::new(values)
    }
}

impl From<ParamVector> for Vec<f64> {
    fn from(v: ParamVector) -> Self {
        v.0
    }
}

impl Index<usize> for ParamVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl<'a> IntoIterator for &'a ParamVector {
    type Item = &'a f64;
    type IntoIter = std::slice::Iter<'a, f64>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

fn check_finite(values: &[f64], context: &str) -> Result<()> {
    match values.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::numeric(context, Some(i))),
        None => Ok(()),
    }
}

fn check_same_len(x: &ParamVector, y: &ParamVector) -> Result<()> {
    y.ensure_len(x.len())
}

/// `a * x + y`, elementwise.
pub fn axpy(a: f64, x: &ParamVector, y: &ParamVector) -> Result<ParamVector> {
    if !a.is_finite() {
        return Err(Error::numeric("axpy scale", None));
    }
    check_same_len(x, y)?;
    let out = x.iter().zip(y).map(|(xi, yi)| a * xi + yi).collect();
    ParamVector::from_computed(out, "axpy")
}

/// Elementwise operations available through [`elementwise`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementwiseOp {
    Mul,
    Div,
    Sqrt,
    Square,
    AddScalar,
}

/// Applies `op` to `x` (and `y` for binary ops, `c` for `AddScalar`).
pub fn elementwise(
    op: ElementwiseOp,
    x: &ParamVector,
    y: Option<&ParamVector>,
    c: Option<f64>,
) -> Result<ParamVector> {
    let binary = |name: &'static str| -> Result<&ParamVector> {
        let y = y.ok_or_else(|| Error::config("y", format!("{name} needs a second operand")))?;
        check_same_len(x, y)?;
        Ok(y)
    };
    let out: Vec<f64> = match op {
        ElementwiseOp::Mul => {
            let y = binary("mul")?;
            x.iter().zip(y).map(|(a, b)| a * b).collect()
        }
        ElementwiseOp::Div => {
            let y = binary("div")?;
            if let Some(i) = y.iter().position(|&d| d == 0.0) {
                return Err(Error::numeric("div by zero entry", Some(i)));
            }
            x.iter().zip(y).map(|(a, b)| a / b).collect()
        }
        ElementwiseOp::Sqrt => {
            if let Some(i) = x.iter().position(|&v| v < 0.0) {
                return Err(Error::numeric("sqrt of negative entry", Some(i)));
            }
            x.iter().map(|v| v.sqrt()).collect()
        }
        ElementwiseOp::Square => x.iter().map(|v| v * v).collect(),
        ElementwiseOp::AddScalar => {
            let c = c.ok_or_else(|| Error::config("c", "add_scalar needs a scalar"))?;
            x.iter().map(|v| v + c).collect()
        }
    };
    ParamVector::from_computed(out, "elementwise")
}

/// Euclidean norm.
pub fn norm2(x: &ParamVector) -> f64 {
    norm2_slice(x.as_slice())
}

pub(crate) fn norm2_slice(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Seeded generator backed by ChaCha8 (`rand_chacha`), whose output stream is
/// fixed for a given seed across platforms.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random()
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn normal_vector(&mut self, dim: usize, scale: f64) -> ParamVector {
        ParamVector::from_raw((0..dim).map(|_| scale * self.normal()).collect())
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.inner.random_range(0..=i);
            items.swap(i, j);
        }
    }
}

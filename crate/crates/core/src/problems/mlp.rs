use super::{check_dim, finish_grad, finish_loss, Batch, ParamBlock, Problem};
use crate::error::{Error, Result};
use crate::numerics::{ParamVector, Rng};

/// One-hidden-layer classifier: `tanh` hidden units, softmax cross-entropy.
///
/// Parameters are laid out as `W1 (hidden x in)`, `b1`, `W2 (out x hidden)`,
/// `b2`, all row-major.
#[derive(Debug, Clone)]
pub struct Mlp {
    inputs: usize,
    hidden: usize,
    classes: usize,
    train: Batch,
    test: Option<Batch>,
}

struct Offsets {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    end: usize,
}

impl Mlp {
    /// `layout = [in, hidden, out]`.
    pub fn new(layout: [usize; 3], train: Batch) -> Result<Self> {
        let [inputs, hidden, classes] = layout;
        if inputs == 0 || hidden == 0 || classes < 2 {
            return Err(Error::config("layout", "need in >= 1, hidden >= 1, out >= 2"));
        }
        let mlp = Mlp {
            inputs,
            hidden,
            classes,
            train,
            test: None,
        };
        mlp.check_batch(&mlp.train)?;
        Ok(mlp)
    }

    pub fn with_test(mut self, test: Batch) -> Result<Self> {
        self.check_batch(&test)?;
        self.test = Some(test);
        Ok(self)
    }

    pub fn layout(&self) -> [usize; 3] {
        [self.inputs, self.hidden, self.classes]
    }

    fn check_batch(&self, batch: &Batch) -> Result<()> {
        if batch.n_features() != self.inputs {
            return Err(Error::Dimension {
                expected: self.inputs,
                found: batch.n_features(),
            });
        }
        let k = self.classes as f64;
        if batch.labels().iter().any(|&y| y < 0.0 || y >= k || y.fract() != 0.0) {
            return Err(Error::config("label", format!("labels must be class indices in [0, {})", self.classes)));
        }
        Ok(())
    }

    fn offsets(&self) -> Offsets {
        let w1 = 0;
        let b1 = w1 + self.hidden * self.inputs;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.classes * self.hidden;
        Offsets {
            w1,
            b1,
            w2,
            b2,
            end: b2 + self.classes,
        }
    }
}

impl Problem for Mlp {
    fn name(&self) -> &str {
        "mlp"
    }

    fn dim(&self) -> usize {
        self.offsets().end
    }

    fn loss_and_grad(&self, theta: &ParamVector, batch: Option<&Batch>) -> Result<(f64, ParamVector)> {
        check_dim(theta, self.dim())?;
        let batch = batch.unwrap_or(&self.train);
        self.check_batch(batch)?;
        let p = theta.as_slice();
        let o = self.offsets();
        let (ni, nh, nc) = (self.inputs, self.hidden, self.classes);
        let w1 = &p[o.w1..o.b1];
        let b1 = &p[o.b1..o.w2];
        let w2 = &p[o.w2..o.b2];
        let b2 = &p[o.b2..o.end];

        let mut grad = vec![0.0; o.end];
        let mut hidden = vec![0.0; nh];
        let mut logits = vec![0.0; nc];
        let mut d_hidden = vec![0.0; nh];
        let mut loss = 0.0;

        for n in 0..batch.len() {
            let x = batch.row(n);
            let y = batch.label(n) as usize;
            for j in 0..nh {
                let row = &w1[j * ni..(j + 1) * ni];
                let a: f64 = b1[j] + row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
                hidden[j] = a.tanh();
            }
            for k in 0..nc {
                let row = &w2[k * nh..(k + 1) * nh];
                logits[k] = b2[k] + row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>();
            }
            let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum_exp: f64 = logits.iter().map(|z| (z - max).exp()).sum();
            let log_norm = max + sum_exp.ln();
            loss += log_norm - logits[y];

            d_hidden.iter_mut().for_each(|v| *v = 0.0);
            for k in 0..nc {
                let dz = (logits[k] - log_norm).exp() - if k == y { 1.0 } else { 0.0 };
                grad[o.b2 + k] += dz;
                for j in 0..nh {
                    grad[o.w2 + k * nh + j] += dz * hidden[j];
                    d_hidden[j] += w2[k * nh + j] * dz;
                }
            }
            for j in 0..nh {
                let da = d_hidden[j] * (1.0 - hidden[j] * hidden[j]);
                grad[o.b1 + j] += da;
                for (i, xi) in x.iter().enumerate() {
                    grad[o.w1 + j * ni + i] += da * xi;
                }
            }
        }
        let n = batch.len() as f64;
        for g in &mut grad {
            *g /= n;
        }
        Ok((finish_loss(loss / n, "mlp")?, finish_grad(grad, "mlp gradient")?))
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

    /// Weights `~ N(0, 1/fan_in)`, biases zero.
    fn initial_point(&self, rng: &mut Rng) -> ParamVector {
        let o = self.offsets();
        let mut p = vec![0.0; o.end];
        let s1 = 1.0 / (self.inputs as f64).sqrt();
        let s2 = 1.0 / (self.hidden as f64).sqrt();
        for v in &mut p[o.w1..o.b1] {
            *v = s1 * rng.normal();
        }
        for v in &mut p[o.w2..o.b2] {
            *v = s2 * rng.normal();
        }
        ParamVector::from_raw(p)
    }

    fn blocks(&self) -> Vec<ParamBlock> {
        let o = self.offsets();
        vec![
            ParamBlock::new("W1", o.w1..o.b1),
            ParamBlock::new("b1", o.b1..o.w2),
            ParamBlock::new("W2", o.w2..o.b2),
            ParamBlock::new("b2", o.b2..o.end),
        ]
    }
}

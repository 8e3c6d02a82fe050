use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Row-major examples with one label each. Classification labels are class
/// indices stored as `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<f64>,
}

/// A full dataset is just a large batch.
pub type Dataset = Batch;

impl Batch {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        let n_features = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_features) {
            return Err(Error::Dimension {
                expected: n_features,
                found: bad.len(),
            });
        }
        Batch::from_flat(rows.into_iter().flatten().collect(), n_features, labels)
    }

    pub fn from_flat(features: Vec<f64>, n_features: usize, labels: Vec<f64>) -> Result<Self> {
        if labels.is_empty() || n_features == 0 {
            return Err(Error::config("batch", "a batch needs at least one example and one feature"));
        }
        if features.len() != n_features * labels.len() {
            return Err(Error::Dimension {
                expected: n_features * labels.len(),
                found: features.len(),
            });
        }
        if features.iter().chain(&labels).any(|x| !x.is_finite()) {
            return Err(Error::numeric("batch values", None));
        }
        Ok(Batch {
            features,
            n_features,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Gathers the given rows, in order.
    pub fn select(&self, indices: &[usize]) -> Batch {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Batch {
            features,
            n_features: self.n_features,
            labels,
        }
    }

    /// Splits off the last `tail` rows. Both halves must be non-empty.
    pub fn split_tail(&self, tail: usize) -> Result<(Batch, Batch)> {
        if tail == 0 || tail >= self.len() {
            return Err(Error::config("test_size", format!("must lie in [1, {})", self.len())));
        }
        let head = self.len() - tail;
        let front: Vec<usize> = (0..head).collect();
        let back: Vec<usize> = (head..self.len()).collect();
        Ok((self.select(&front), self.select(&back)))
    }

    /// Reads CSV with a header of feature columns `f0..fk` and a `label` column.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| csv_error(e, 1))?
            .clone();
        let mut label_col = None;
        let mut feature_cols: Vec<(usize, usize)> = Vec::new();
        for (col, name) in headers.iter().enumerate() {
            let name = name.trim();
            if name == "label" {
                if label_col.replace(col).is_some() {
                    return Err(parse_err(1, "duplicate `label` column"));
                }
            } else if let Some(ix) = name.strip_prefix('f').and_then(|s| s.parse::<usize>().ok()) {
                feature_cols.push((ix, col));
            } else {
                return Err(parse_err(1, format!("unexpected column `{name}`")));
            }
        }
        let label_col = label_col.ok_or_else(|| parse_err(1, "missing `label` column"))?;
        feature_cols.sort();
        if feature_cols.is_empty() || feature_cols.iter().enumerate().any(|(i, (ix, _))| i != *ix) {
            return Err(parse_err(1, "feature columns must be f0..fk without gaps"));
        }

        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (row_ix, record) in rdr.records().enumerate() {
            let line = row_ix + 2;
            let record = record.map_err(|e| csv_error(e, line))?;
            let field = |col: usize| -> Result<f64> {
                let raw = record.get(col).map(str::trim).unwrap_or("");
                if raw.is_empty() {
                    return Err(parse_err(line, format!("missing value in column {col}")));
                }
                raw.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(line, format!("invalid number `{raw}`")))
            };
            for &(_, col) in &feature_cols {
                features.push(field(col)?);
            }
            labels.push(field(label_col)?);
        }
        Batch::from_flat(features, feature_cols.len(), labels)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Batch::from_csv(file)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn csv_error(e: csv::Error, line: usize) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(line);
    parse_err(line, e.to_string())
}

/// Interleaved Gaussian blobs in the plane: example `i` belongs to class
/// `i % classes`, whose center sits at angle `2*pi*k/classes + 0.4` on a circle
/// of the given radius. Noise is isotropic with standard deviation `noise`.
pub fn gaussian_blobs(n: usize, classes: usize, radius: f64, noise: f64, seed: u64) -> Result<Batch> {
    if n == 0 || classes < 2 {
        return Err(Error::config("n_samples", "need at least one example and two classes"));
    }
    let mut rng = Rng::new(seed);
    let mut features = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let k = i % classes;
        let angle = 2.0 * PI * k as f64 / classes as f64 + 0.4;
        features.push(radius * angle.cos() + noise * rng.normal());
        features.push(radius * angle.sin() + noise * rng.normal());
        labels.push(k as f64);
    }
    Batch::from_flat(features, 2, labels)
}

/// `y = x . w + noise`, with `x ~ N(0, I)` and weights `w ~ N(0, I)`.
/// Returns the data and the generating weights.
pub fn linear_regression_data(
    n: usize,
    n_features: usize,
    noise: f64,
    seed: u64,
) -> Result<(Batch, Vec<f64>)> {
    if n == 0 || n_features == 0 {
        return Err(Error::config("n_samples", "need at least one example and one feature"));
    }
    let mut rng = Rng::new(seed);
    let weights: Vec<f64> = (0..n_features).map(|_| rng.normal()).collect();
    let mut features = Vec::with_capacity(n * n_features);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..n_features).map(|_| rng.normal()).collect();
        let y = row.iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>() + noise * rng.normal();
        features.extend(row);
        labels.push(y);
    }
    Ok((Batch::from_flat(features, n_features, labels)?, weights))
}

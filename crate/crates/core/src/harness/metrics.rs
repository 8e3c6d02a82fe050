use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const HEADER: &str = "epoch,iteration,lr,train_loss,eval_loss,grad_norm,pred_gap,wall_ms";

/// One logged row of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub epoch: u32,
    pub iteration: u64,
    pub lr: f64,
    /// Loss at the point the gradient was taken (the predicted weights when s > 0).
    pub train_loss: f64,
    /// Loss at the true weights, on held-out data when the problem has them.
    pub eval_loss: f64,
    pub grad_norm: f64,
    /// Norm of the difference between the realized s-step displacement and
    /// its prediction, once that prediction has matured.
    pub pred_gap: Option<f64>,
    pub wall_ms: u64,
}

/// Writes the header, one line per record, then each trailer line prefixed by `# `.
pub fn write_metrics<W: Write>(mut out: W, records: &[MetricRecord], trailer: &[String]) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    for r in records {
        let gap = r.pred_gap.map(|g| g.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.epoch, r.iteration, r.lr, r.train_loss, r.eval_loss, r.grad_norm, gap, r.wall_ms
        )?;
    }
    for line in trailer {
        writeln!(out, "# {line}")?;
    }
    out.flush()?;
    Ok(())
}

/// Parses a metrics file, returning the records and the trailer lines
/// (without their `# ` prefix).
pub fn read_metrics<R: Read>(mut input: R) -> Result<(Vec<MetricRecord>, Vec<String>)> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `{HEADER}`"),
            })
        }
    }
    let mut records = Vec::new();
    let mut trailer = Vec::new();
    for (ix, line) in lines {
        let line_no = ix + 1;
        if let Some(comment) = line.strip_prefix('#') {
            trailer.push(comment.strip_prefix(' ').unwrap_or(comment).to_string());
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 8 fields, found {}", fields.len()),
            });
        }
        let bad = |name: &str| Error::Parse {
            line: line_no,
            message: format!("invalid {name}"),
        };
        let real = |i: usize, name: &str| fields[i].parse::<f64>().map_err(|_| bad(name));
        records.push(MetricRecord {
            epoch: fields[0].parse().map_err(|_| bad("epoch"))?,
            iteration: fields[1].parse().map_err(|_| bad("iteration"))?,
            lr: real(2, "lr")?,
            train_loss: real(3, "train_loss")?,
            eval_loss: real(4, "eval_loss")?,
            grad_norm: real(5, "grad_norm")?,
            pred_gap: if fields[6].is_empty() { None } else { Some(real(6, "pred_gap")?) },
            wall_ms: fields[7].parse().map_err(|_| bad("wall_ms"))?,
        });
    }
    Ok((records, trailer))
}

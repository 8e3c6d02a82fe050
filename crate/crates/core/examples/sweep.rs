//! Prediction-step sweep on logistic regression; tables land in a temp directory
//! unless XGRAD_OUTPUT_DIR is set.

use xgrad::harness::{self, ExperimentConfig};

const CONFIG: &str = "
problem=logistic
optimizer=adam
lr=1e-3
epochs=4000
batch=200   # full batch
log_every=1
";

fn main() -> xgrad::Result<()> {
    let mut config = ExperimentConfig::parse(CONFIG)?;
    if std::env::var_os(harness::OUTPUT_DIR_ENV).is_none() {
        config.output = std::env::temp_dir().join("xgrad-example").join("logistic.csv");
    }
    let report = harness::sweep(&config, &[0, 1, 2, 3, 4])?;
    print!("{}", harness::aligned_table(&report.rows));
    println!("tables: {} {}", report.table_csv.display(), report.table_txt.display());
    Ok(())
}

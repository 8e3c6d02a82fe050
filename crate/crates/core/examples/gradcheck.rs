//! Finite-difference gradient checks across the problem suite.

use xgrad::harness::{gradcheck, ProblemSpec};

fn main() -> xgrad::Result<()> {
    let mut failed = 0;
    for name in ProblemSpec::NAMES {
        let report = gradcheck(name, 7)?;
        print!("{}", report.to_text());
        println!();
        failed += usize::from(!report.passed());
    }
    if failed > 0 {
        std::process::exit(1);
    }
    Ok(())
}

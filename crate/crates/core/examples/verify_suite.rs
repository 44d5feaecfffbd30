//! Runs one verification suite and prints a line per check.

use szlenk_lab::report::{run_verify_suite, RunConfig, Suite};

fn main() -> szlenk_lab::Result<()> {
    let suite: Suite = std::env::args().nth(1).as_deref().unwrap_or("baernstein").parse()?;
    let report = run_verify_suite(suite, &RunConfig::default())?;
    for r in &report.records {
        println!("{:?}  {:32} {}", r.status, r.id, r.anchor);
    }
    println!("suite {suite}: {}", if report.passed { "all checks pass" } else { "FAILURES" });
    Ok(())
}

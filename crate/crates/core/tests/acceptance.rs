//! Runs every acceptance criterion at full size and prints one line each.
//!
//! Set `SIMPLEX_PA_SUITES` to a comma-separated list to run a subset.

use std::process::ExitCode;

use simplex_pa::validate::{run_suite, summary_line, DEFAULT_SEED, SUITES};

fn main() -> ExitCode {
    let filter = std::env::var("SIMPLEX_PA_SUITES").ok();
    let selected: Vec<&str> = match &filter {
        Some(list) => list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect(),
        None => SUITES.to_vec(),
    };
    let mut failed = 0;
    for name in selected {
        match run_suite(name, DEFAULT_SEED) {
            Ok(report) => {
                println!("{}", summary_line(&report));
                for c in &report.checks {
                    let tag = if c.passed { "ok" } else if c.gating { "FAILED" } else { "off (diagnostic)" };
                    println!("    {:<44} {:>12.6e} {:?} {:e}  {tag}", c.name, c.measured, c.bound, c.tolerance);
                }
                failed += usize::from(!report.passed);
            }
            Err(e) => {
                println!("suite {name}: ERROR {e}");
                failed += 1;
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}

//! Runs every acceptance criterion and prints one verdict line per criterion.
//! Numeric arguments restrict the run to those criteria.

use std::process::ExitCode;

use desitter::checks::run_checks;

fn main() -> ExitCode {
    let ids: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let outcomes = run_checks(&ids);
    for o in &outcomes {
        println!("{o}");
    }
    println!();
    for o in &outcomes {
        println!(
            "criterion {}: {} {}",
            o.id,
            if o.pass() { "pass" } else { "FAIL" },
            o.title
        );
    }
    if outcomes.iter().all(|o| o.pass()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

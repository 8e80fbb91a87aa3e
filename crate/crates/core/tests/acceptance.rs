//! Acceptance suite: every criterion at its stated tolerance, one line each.
//!
//! Runs with `cargo test --test acceptance`. The Monte-Carlo criteria take
//! several minutes on a single core.

use std::process::ExitCode;

use waterfall::validation::{run_criterion, ALL_IDS};

fn main() -> ExitCode {
    let mut failed = 0;
    for id in ALL_IDS {
        let outcome = run_criterion(id, 1);
        println!("{}", outcome.line());
        if !outcome.passed {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        ALL_IDS.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Runs every acceptance criterion and prints one PASS/FAIL line for each.

use std::process::ExitCode;

use painleve_core::acceptance::{run, CRITERIA};

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for id in 1..=CRITERIA {
        let outcome = run(id);
        println!("{}", outcome.line());
        if !outcome.passed {
            failed.push(id);
        }
    }
    println!("{} of {CRITERIA} criteria passed", CRITERIA - failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}

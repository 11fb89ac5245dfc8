//! Runs every acceptance criterion, prints one pass/fail line each, and
//! exits non-zero when any criterion fails.

use std::process::ExitCode;

use sirdelay::acceptance::{run, CRITERIA};

fn main() -> ExitCode {
    let mut failed = 0;
    for (id, _) in CRITERIA {
        let r = run(id);
        println!("{r}");
        if !r.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! One line per acceptance criterion; exits nonzero when any criterion fails.

use std::io::Write;
use std::process::ExitCode;

use fborel::verify::{run_criterion, Suite};

fn main() -> ExitCode {
    let seed = std::env::var("FBOREL_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0);
    println!("acceptance (seed {seed})");
    let mut failed = 0;
    for &id in Suite::All.criteria() {
        let report = run_criterion(id, seed);
        println!("{report}");
        std::io::stdout().flush().ok();
        failed += usize::from(!report.pass);
    }
    println!("{} passed, {failed} failed", Suite::All.criteria().len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Runs every acceptance criterion and prints one PASS/FAIL line each.
//!
//! Built without the libtest harness so the lines are never captured.

use std::process::ExitCode;

use ffquad::verify::{VerifyOptions, Verifier};

fn main() -> ExitCode {
    let cache = tempfile::tempdir().expect("temp dir");
    let mut verifier = Verifier::new(VerifyOptions {
        cache_dir: Some(cache.path().to_path_buf()),
        seed: 20240601,
    });
    let outcomes = verifier.run_all();
    for o in &outcomes {
        println!("{o}");
    }
    for w in verifier.warnings() {
        println!("warning: {w}");
    }
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", outcomes.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}

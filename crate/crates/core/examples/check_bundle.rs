//! Validate an emitted bundle directory: every table present and every
//! value inside its admissible range.
//!
//!     cargo run --example check_bundle -- out/

use std::process::ExitCode;

use persona_audit::report::{check_bundle, ReportBundle, RunManifest};

fn main() -> ExitCode {
    let Some(dir) = std::env::args().nth(1) else {
        eprintln!("usage: check_bundle <out-dir>");
        return ExitCode::from(2);
    };
    let dir = std::path::Path::new(&dir);
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    let bundle: ReportBundle = serde_json::from_str(&read("bundle.json")).expect("bundle.json");
    let manifest: RunManifest = serde_json::from_str(&read("manifest.json")).expect("manifest.json");
    let issues = check_bundle(&bundle, manifest.task);
    for i in &issues {
        println!("FAIL {i}");
    }
    println!("{} scores, {} deltas, {} issues", bundle.scores.len(), bundle.deltas.len(), issues.len());
    if issues.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

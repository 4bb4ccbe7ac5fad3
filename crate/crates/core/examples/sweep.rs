//! Runs the bundled sweep and writes its report files.
//!
//! cargo run --release --example sweep -- [OUTPUT_DIR]

use pconvex::report::{emit_report, Format};
use pconvex::sweep::{run_sweep, SweepConfig};

fn main() {
    let config = SweepConfig::bundled();
    let outcome = run_sweep(&config).unwrap();
    let s = &outcome.summary;
    println!(
        "{} cases, {} hypothesis-satisfied, {} violations ({:.2} s)",
        s.total_cases,
        s.hypothesis_satisfied,
        s.violations,
        s.runtime.as_secs_f64()
    );
    for t in &s.per_theorem {
        let tight = t.tightness.as_ref();
        println!(
            "  {:<9} satisfied {:>5}  min slack {:+.3e}  median ratio {:.4}  max ratio {:.4}",
            t.theorem.name(),
            t.hypothesis_satisfied,
            t.min_slack.unwrap_or(f64::NAN),
            tight.map_or(f64::NAN, |d| d.median),
            tight.map_or(f64::NAN, |d| d.max),
        );
    }
    if let Some(dir) = std::env::args().nth(1) {
        let files = emit_report(s, &outcome.records, dir.as_ref(), Format::Csv).unwrap();
        println!(
            "wrote {} and {}",
            files.summary.display(),
            files.records.display()
        );
    }
}

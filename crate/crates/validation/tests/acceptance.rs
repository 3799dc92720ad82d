//! Acceptance suite: one pass/fail line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use pnedelec_validation as v;

fn main() -> ExitCode {
    let criteria: [fn() -> v::Verdict; 9] = [
        v::dimensions,
        v::unisolvence,
        v::poincare_inverses,
        v::exact_sequences,
        || v::projectors(50),
        v::trace_locality,
        v::cavity,
        v::interpolation_decay,
        v::anisotropic_material,
    ];
    let mut failed = 0;
    for run in criteria {
        let start = Instant::now();
        let r = run();
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("criterion {}: {status} ({:.1}s) {}", r.id, start.elapsed().as_secs_f64(), r.detail);
        failed += usize::from(!r.passed);
    }
    println!("acceptance: {} of 9 criteria pass", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

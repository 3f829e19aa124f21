//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 1 to 12 run in process through the library self-test with the
//! default seed and tolerances, and must also finish within their runtime
//! budgets. Criterion 13 runs the `selftest` command twice with the same seed
//! and requires byte-identical reports.

use std::process::{Command, ExitCode};
use std::time::Instant;

use oneshot_rsp::selftest::{self, SelftestConfig};

const SEED: &str = "0";

fn selftest_report() -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_oneshot-rsp"))
        .args(["selftest", "--seed", SEED])
        .output()
        .map_err(|e| format!("cannot run the binary: {e}"))?;
    if !out.status.success() {
        return Err(format!("selftest exited with {:?}", out.status.code()));
    }
    Ok(out.stdout)
}

fn determinism() -> (bool, String) {
    match (selftest_report(), selftest_report()) {
        (Ok(a), Ok(b)) if a == b => (true, format!("two runs, {} identical bytes", a.len())),
        (Ok(a), Ok(b)) => {
            let at = a
                .iter()
                .zip(&b)
                .position(|(x, y)| x != y)
                .unwrap_or(a.len().min(b.len()));
            (
                false,
                format!("reports differ at byte {at} ({} vs {} bytes)", a.len(), b.len()),
            )
        }
        (Err(e), _) | (_, Err(e)) => (false, e),
    }
}

fn main() -> ExitCode {
    let config = SelftestConfig::default();
    let mut all = true;
    for id in selftest::CRITERIA {
        let r = selftest::run_criterion(id, config);
        let ok = r.passed && r.within_time();
        all &= ok;
        println!(
            "criterion {:>2} {} {:>8.2}s (budget {:.0}s)  {}: {} checks, {} failures, worst {:.3e}, tol {:.1e}",
            id,
            if ok { "PASS" } else { "FAIL" },
            r.elapsed.as_secs_f64(),
            r.time_limit_s,
            r.name,
            r.checks,
            r.failures,
            r.worst,
            r.tolerance
        );
        for d in &r.details {
            println!("    {d}");
        }
    }
    let start = Instant::now();
    let (ok, detail) = determinism();
    all &= ok;
    println!(
        "criterion 13 {} {:>8.2}s  selftest reports are byte-identical for a fixed seed: {detail}",
        if ok { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    println!("acceptance {}", if all { "passed" } else { "FAILED" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

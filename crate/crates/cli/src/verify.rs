//! `pdd verify`: runs property suites and prints one line per property.

use std::fs;
use std::io::Write;

use anyhow::Result;
use serde_json::json;

use pdd_core::verify::{parse_suites, run_suites_with, VerifyReport};

use crate::args::VerifyArgs;

pub fn run<W: Write>(args: &VerifyArgs, out: &mut W) -> Result<VerifyReport> {
    let suites = parse_suites(&args.suite)?;
    let mut io_err = None;
    let report = run_suites_with(&suites, |o| {
        let status = if o.passed { "PASS" } else { "FAIL" };
        if let Err(e) = writeln!(out, "{status} {} ({:.0} ms): {}", o.id, o.elapsed_ms, o.detail).and_then(|_| out.flush()) {
            io_err.get_or_insert(e);
        }
    });
    if let Some(e) = io_err {
        return Err(e.into());
    }
    writeln!(out)?;
    for suite in report.suites() {
        let of_suite: Vec<_> = report.outcomes.iter().filter(|o| o.suite == suite).collect();
        let passed = of_suite.iter().filter(|o| o.passed).count();
        let ms: f64 = of_suite.iter().map(|o| o.elapsed_ms).sum();
        writeln!(out, "suite {suite}: {passed}/{} passed ({ms:.0} ms)", of_suite.len())?;
    }
    if let Some(path) = &args.json {
        let doc = json!({ "passed": report.passed(), "outcomes": report.outcomes });
        fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")?;
    }
    Ok(report)
}

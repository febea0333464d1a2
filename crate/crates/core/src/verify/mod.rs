//! Runtime property suites: seeded oracle and invariant checks for every
//! module, runnable from the command line against a release build.

mod multicast;
mod numerics;
mod pdd;
mod relay;
mod volmin;

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Numerics,
    PddCore,
    Multicast,
    Relay,
    Volmin,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Numerics, Suite::PddCore, Suite::Multicast, Suite::Relay, Suite::Volmin];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Numerics => "numerics",
            Suite::PddCore => "pdd-core",
            Suite::Multicast => "multicast",
            Suite::Relay => "relay",
            Suite::Volmin => "volmin",
        }
    }

    fn properties(self) -> &'static [Property] {
        match self {
            Suite::Numerics => numerics::PROPERTIES,
            Suite::PddCore => pdd::PROPERTIES,
            Suite::Multicast => multicast::PROPERTIES,
            Suite::Relay => relay::PROPERTIES,
            Suite::Volmin => volmin::PROPERTIES,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses a suite name; `all` expands to every suite.
pub fn parse_suites(name: &str) -> Result<Vec<Suite>, Error> {
    if name == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    Ok(vec![name.parse()?])
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown suite {s:?}; expected numerics, pdd-core, multicast, relay, volmin or all")))
    }
}

/// A property check: `Ok(detail)` on success, `Err(reason)` on failure.
type Check = fn() -> Result<String, String>;

struct Property {
    id: &'static str,
    check: Check,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyOutcome {
    pub suite: &'static str,
    pub id: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifyReport {
    pub outcomes: Vec<PropertyOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyOutcome> {
        self.outcomes.iter().filter(|o| !o.passed)
    }

    /// Suite names in the order they ran, each once.
    pub fn suites(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = Vec::new();
        for o in &self.outcomes {
            if !out.contains(&o.suite) {
                out.push(o.suite);
            }
        }
        out
    }
}

fn run_property(suite: Suite, p: &Property) -> PropertyOutcome {
    let started = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(p.check)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let (passed, detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    PropertyOutcome { suite: suite.name(), id: p.id, passed, detail, elapsed_ms: started.elapsed().as_secs_f64() * 1e3 }
}

/// Runs every property of `suites`, reporting each outcome to `on_result`
/// as soon as it is known.
pub fn run_suites_with<F: FnMut(&PropertyOutcome)>(suites: &[Suite], mut on_result: F) -> VerifyReport {
    let mut report = VerifyReport::default();
    for &suite in suites {
        for p in suite.properties() {
            let outcome = run_property(suite, p);
            on_result(&outcome);
            report.outcomes.push(outcome);
        }
    }
    report
}

pub fn run_suites(suites: &[Suite]) -> VerifyReport {
    run_suites_with(suites, |_| {})
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T>(r: crate::error::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// `‖fd − g‖∞ ≤ tol·max(1, ‖g‖∞)`.
fn gradient_agrees(fd: &[f64], g: &[f64], tol: f64) -> Result<f64, String> {
    let scale = g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let err = fd.iter().zip(g).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale;
    ensure(err <= tol, || format!("finite-difference relative error {err:.3e} > {tol:.0e}"))?;
    Ok(err)
}

/// Schedule invariants shared by every PDD trace: ρ non-increasing and
/// only decreasing on a penalty step, η shrinking by at least `τ`.
fn check_schedule(trace: &crate::pdd::PddTrace, tau: f64) -> Result<(), String> {
    use crate::pdd::Branch;
    for w in trace.records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        ensure(b.rho <= a.rho, || format!("rho increased at k={}", b.k))?;
        let decreased = b.rho < a.rho;
        ensure(decreased == (a.branch != Branch::DualUpdate) || a.rho_floored, || {
            format!("rho changed inconsistently with branch {:?} at k={}", a.branch, a.k)
        })?;
        ensure(b.eta <= tau * a.eta * (1.0 + 1e-15), || format!("eta did not shrink by tau at k={}", b.k))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip_and_all_expands() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!(parse_suites("all").unwrap().len(), 5);
        assert!(parse_suites("bogus").is_err());
    }

    #[test]
    fn property_ids_are_unique() {
        let mut ids: Vec<&str> = Suite::ALL.iter().flat_map(|s| s.properties().iter().map(|p| p.id)).collect();
        let n = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), n);
    }

    #[test]
    fn panicking_property_is_reported_as_failure() {
        fn boom() -> Result<String, String> {
            panic!("boom")
        }
        let out = run_property(Suite::Numerics, &Property { id: "test.boom", check: boom });
        assert!(!out.passed && out.detail.contains("boom"));
    }

    #[test]
    fn numerics_and_pdd_suites_pass() {
        let report = run_suites(&[Suite::Numerics, Suite::PddCore]);
        for f in report.failures() {
            panic!("{}: {}", f.id, f.detail);
        }
        assert_eq!(report.suites(), vec!["numerics", "pdd-core"]);
    }
}

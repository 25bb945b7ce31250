//! Verification reports: a named list of pass/fail checks with optional
//! detail, rendered either as fixed-format text or as JSON.  Output is fully
//! deterministic — checks appear in insertion order and carry no timestamps;
//! timing belongs on stderr, never in the report body.

use serde::Serialize;

/// One check line.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// A verification report for one target.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub target: String,
    pub params: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(target: impl Into<String>, params: impl Into<String>) -> Self {
        Report {
            target: target.into(),
            params: params.into(),
            checks: Vec::new(),
        }
    }

    pub fn pass(&mut self, name: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed: true,
            detail: None,
        });
    }

    pub fn fail(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed: false,
            detail: Some(detail.into()),
        });
    }

    /// A passing check that exists to record an observation (used by
    /// report-only probes); the detail is informational, not a failure.
    pub fn note(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed: true,
            detail: Some(detail.into()),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    /// Merge another report's checks into this one, prefixing their names
    /// with the other report's target.
    pub fn absorb(&mut self, other: Report) {
        for mut c in other.checks {
            c.name = format!("{}: {}", other.target, c.name);
            self.checks.push(c);
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("verify {} ({})\n", self.target, self.params));
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            match &c.detail {
                Some(d) => out.push_str(&format!("  [{mark}] {}: {d}\n", c.name)),
                None => out.push_str(&format!("  [{mark}] {}\n", c.name)),
            }
        }
        let verdict = if self.passed() { "ok" } else { "FAILED" };
        out.push_str(&format!(
            "result: {verdict} ({} checks)\n",
            self.checks.len()
        ));
        out
    }
}

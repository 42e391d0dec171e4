//! Machine-readable pass/fail report.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// The statement being checked.
    pub anchor: String,
    pub status: Status,
    pub measured: String,
    pub expected: String,
    pub tolerance: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub level: String,
    pub version: String,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new(level: &str) -> Self {
        VerificationReport { level: level.into(), version: env!("CARGO_PKG_VERSION").into(), checks: Vec::new() }
    }

    pub fn record(
        &mut self,
        name: &str,
        anchor: &str,
        pass: bool,
        measured: impl ToString,
        expected: impl ToString,
        tolerance: impl ToString,
    ) {
        self.checks.push(Check {
            name: name.into(),
            anchor: anchor.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            measured: measured.to_string(),
            expected: expected.to_string(),
            tolerance: tolerance.to_string(),
        });
    }

    /// Records a check whose computation itself failed.
    pub fn record_error(&mut self, name: &str, anchor: &str, err: impl std::fmt::Display) {
        self.record(name, anchor, false, format!("error: {err}"), "-", "-");
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Fail).count()
    }
}

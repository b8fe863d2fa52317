//! Verification records shared by the library, the CLI and the tests.

use serde::{Deserialize, Serialize};

/// Outcome of checking one identity on one mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub identity: String,
    pub mesh_id: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl VerificationRecord {
    /// A record passes when the residual is finite and within tolerance.
    pub fn new(
        identity: impl Into<String>,
        mesh_id: impl Into<String>,
        max_residual: f64,
        tolerance: f64,
    ) -> Self {
        VerificationRecord {
            identity: identity.into(),
            mesh_id: mesh_id.into(),
            max_residual,
            tolerance,
            passed: max_residual.is_finite() && max_residual <= tolerance,
        }
    }

    /// A record for a yes/no property; the residual is 0 or 1.
    pub fn check(identity: impl Into<String>, mesh_id: impl Into<String>, ok: bool) -> Self {
        VerificationRecord::new(identity, mesh_id, if ok { 0.0 } else { 1.0 }, 0.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub records: Vec<VerificationRecord>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, record: VerificationRecord) {
        self.records.push(record);
    }

    pub fn extend(&mut self, records: impl IntoIterator<Item = VerificationRecord>) {
        self.records.extend(records);
    }

    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerificationRecord> {
        self.records.iter().filter(|r| !r.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Largest absolute entrywise difference.
pub fn max_abs_diff<'a>(a: impl IntoIterator<Item = &'a f64>, b: impl IntoIterator<Item = &'a f64>) -> f64 {
    a.into_iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, |m, d| if d.is_nan() || m.is_nan() { f64::NAN } else { m.max(d) })
}

/// `|a - b| / max(1, |a|, |b|)`.
pub fn scaled_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

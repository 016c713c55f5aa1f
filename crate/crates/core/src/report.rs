//! `BoundReport`, the unit persisted by the CLI, and the input digest helper.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::qmat::CMat;
use crate::sdp::SolveStatus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportStatus {
    Optimal,
    /// Closed-form evaluation, no solver involved.
    Analytic,
    /// Value computed but a verification step was only met loosely.
    Marginal,
    NotApplicable,
    PrimalInfeasible,
    DualInfeasible,
    NumericalFailure,
}

impl ReportStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReportStatus::Optimal => "optimal",
            ReportStatus::Analytic => "analytic",
            ReportStatus::Marginal => "numerically-marginal",
            ReportStatus::NotApplicable => "not-applicable",
            ReportStatus::PrimalInfeasible => "primal-infeasible",
            ReportStatus::DualInfeasible => "dual-infeasible",
            ReportStatus::NumericalFailure => "numerical-failure",
        }
    }

    /// True for values that can be used as bounds without further review.
    pub fn is_ok(&self) -> bool {
        matches!(self, ReportStatus::Optimal | ReportStatus::Analytic)
    }
}

impl From<SolveStatus> for ReportStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Optimal => ReportStatus::Optimal,
            SolveStatus::PrimalInfeasible => ReportStatus::PrimalInfeasible,
            SolveStatus::DualInfeasible => ReportStatus::DualInfeasible,
            SolveStatus::NumericalFailure => ReportStatus::NumericalFailure,
        }
    }
}

impl std::fmt::Display for ReportStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound: String,
    /// Bits. `NaN` (serialized as `null`) when no value could be produced.
    pub value: f64,
    pub status: ReportStatus,
    pub tol: f64,
    pub runtime_ms: u64,
    pub inputs_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundReport {
    pub fn new(bound: &str, value: f64, status: ReportStatus, tol: f64) -> Self {
        Self {
            bound: bound.to_string(),
            value,
            status,
            tol,
            runtime_ms: 0,
            inputs_digest: String::new(),
            note: None,
        }
    }

    pub fn failed(bound: &str, status: ReportStatus, tol: f64, note: impl Into<String>) -> Self {
        Self { note: Some(note.into()), ..Self::new(bound, f64::NAN, status, tol) }
    }

    pub fn with_digest(mut self, digest: String) -> Self {
        self.inputs_digest = digest;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_runtime(mut self, start: web_time::Instant) -> Self {
        self.runtime_ms = start.elapsed().as_millis() as u64;
        self
    }

    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Incremental SHA-256 over the numerical inputs of a bound. Matrices are
/// hashed through their shape and little-endian entry bytes, so equal inputs
/// give equal digests on every platform.
#[derive(Default)]
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn new(tag: &str) -> Self {
        let mut d = Self(Sha256::new());
        d.text(tag);
        d
    }

    pub fn text(&mut self, s: &str) -> &mut Self {
        self.0.update((s.len() as u64).to_le_bytes());
        self.0.update(s.as_bytes());
        self
    }

    pub fn ints(&mut self, v: &[usize]) -> &mut Self {
        self.0.update((v.len() as u64).to_le_bytes());
        for &x in v {
            self.0.update((x as u64).to_le_bytes());
        }
        self
    }

    pub fn floats(&mut self, v: &[f64]) -> &mut Self {
        self.0.update((v.len() as u64).to_le_bytes());
        for &x in v {
            self.0.update(x.to_le_bytes());
        }
        self
    }

    pub fn matrix(&mut self, m: &CMat) -> &mut Self {
        self.ints(&[m.nrows(), m.ncols()]);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                self.0.update(z.re.to_le_bytes());
                self.0.update(z.im.to_le_bytes());
            }
        }
        self
    }

    pub fn finish(&mut self) -> String {
        let out = std::mem::take(&mut self.0).finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

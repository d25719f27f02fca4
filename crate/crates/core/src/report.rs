use serde::{Deserialize, Serialize};

/// Outcome of checking one inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl BoundReport {
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        BoundReport {
            name: name.into(),
            lhs,
            rhs,
            holds: lhs <= rhs,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// Margin `rhs - lhs`; negative when the bound fails.
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

pub fn all_hold(reports: &[BoundReport]) -> bool {
    reports.iter().all(|r| r.holds)
}

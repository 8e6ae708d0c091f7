use serde::Serialize;

use crate::fock::TruncationSpec;

/// Outcome of one numerical check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub gamma: f64,
    pub n_max: usize,
    pub buffer: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, gamma: f64, trunc: &TruncationSpec, max_deviation: f64, tolerance: f64) -> Self {
        CheckReport {
            check: check.into(),
            gamma,
            n_max: trunc.n_max,
            buffer: trunc.buffer,
            max_deviation,
            tolerance,
            // NaN fails
            pass: max_deviation <= tolerance,
        }
    }
}

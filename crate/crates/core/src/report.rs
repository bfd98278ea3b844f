use std::collections::BTreeMap;

use serde::Serialize;

use crate::lattice::Window;
use crate::mc::Moments;

/// A Monte Carlo point estimate with its standard error and diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub method: String,
    pub estimate: f64,
    /// Sample standard deviation over `sqrt(replicates)`.
    pub stderr: f64,
    pub replicates: u64,
    pub window: Option<Window>,
    /// Truncation audits, flag rates, sweeps. Keys are stable identifiers.
    pub diagnostics: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

impl EstimateReport {
    pub fn new(method: impl Into<String>, estimate: f64, stderr: f64, replicates: u64) -> Self {
        EstimateReport {
            method: method.into(),
            estimate,
            stderr,
            replicates,
            window: None,
            diagnostics: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn from_moments(method: impl Into<String>, m: &Moments) -> Self {
        EstimateReport::new(method, m.mean(), m.stderr(), m.count())
    }

    /// A deterministic value (zero standard error).
    pub fn exact(method: impl Into<String>, value: f64) -> Self {
        EstimateReport::new(method, value, 0.0, 0)
    }

    pub fn with_window(mut self, w: &Window) -> Self {
        self.window = Some(w.clone());
        self
    }

    pub fn with_diag(mut self, key: impl Into<String>, value: f64) -> Self {
        self.diagnostics.insert(key.into(), value);
        self
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    /// `sqrt(s1² + s2²)`.
    pub fn combined_stderr(&self, other: &EstimateReport) -> f64 {
        self.stderr.hypot(other.stderr)
    }

    /// Standardized difference of two independent estimates; zero when both
    /// are exact and equal, infinite when both are exact and differ.
    pub fn z_score(&self, other: &EstimateReport) -> f64 {
        z_of(self.estimate - other.estimate, self.combined_stderr(other))
    }

    pub fn agrees_with(&self, other: &EstimateReport, k: f64) -> bool {
        self.z_score(other).abs() <= k
    }

    /// `|estimate − target| ≤ k · stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        z_of(self.estimate - target, self.stderr).abs() <= k
    }

    /// Whether the estimate is a plausible probability: inside `[0, 1]` up
    /// to `k` standard errors. Estimates are never clamped.
    pub fn in_unit_range(&self, k: f64) -> bool {
        self.estimate.is_finite() && self.estimate >= -k * self.stderr && self.estimate <= 1.0 + k * self.stderr
    }
}

pub(crate) fn z_of(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-12 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_scores() {
        let a = EstimateReport::new("a", 0.5, 0.03, 100);
        let b = EstimateReport::new("b", 0.45, 0.04, 100);
        assert!((a.z_score(&b) - 1.0).abs() < 1e-12);
        assert!(a.agrees_with(&b, 3.0));
        let e = EstimateReport::exact("e", 1.0);
        assert_eq!(e.z_score(&EstimateReport::exact("f", 1.0)), 0.0);
        assert!(e.z_score(&EstimateReport::exact("f", 0.9)).is_infinite());
        assert!(e.in_unit_range(3.0));
        assert!(!EstimateReport::new("x", 1.2, 0.01, 10).in_unit_range(3.0));
    }
}

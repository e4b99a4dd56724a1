use std::path::PathBuf;

use serde::Serialize;
use serde_json::Value;

/// How a measured value is compared with its expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|measured - expected| <= tolerance`
    Within,
    /// `measured < tolerance`; `expected` is the ideal value.
    Below,
    /// `measured >= tolerance`
    AtLeast,
}

/// One expected-vs-measured pair with its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        let passed = (measured - expected).abs() <= tolerance;
        Check { name: name.into(), measured, expected, tolerance, comparison: Comparison::Within, passed }
    }

    pub fn below(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        let passed = measured < bound;
        Check { name: name.into(), measured, expected: 0.0, tolerance: bound, comparison: Comparison::Below, passed }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        let passed = measured >= bound;
        Check { name: name.into(), measured, expected: bound, tolerance: bound, comparison: Comparison::AtLeast, passed }
    }

    /// Exact integer comparison.
    pub fn count(name: impl Into<String>, measured: usize, expected: usize) -> Self {
        Check::within(name, measured as f64, expected as f64, 0.0)
    }

    /// A boolean property, recorded as 1 (holds) against 1.
    pub fn holds(name: impl Into<String>, value: bool) -> Self {
        Check::within(name, if value { 1.0 } else { 0.0 }, 1.0, 0.0)
    }
}

/// Result of one scenario run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub config: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub wall_clock_seconds: f64,
    pub artifacts: Vec<PathBuf>,
    pub details: Value,
}

impl RunReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

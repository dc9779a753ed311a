//! Self-validating scenario reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `|computed - expected| <= tol`.
    Equal,
    /// `computed >= expected - tol`.
    AtLeast,
    /// `computed <= expected + tol`.
    AtMost,
}

/// One identity: the value computed by the library against the value the
/// model predicts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub kind: CheckKind,
    pub computed: f64,
    pub expected: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(kind: CheckKind, label: impl Into<String>, computed: f64, expected: f64, tol: f64) -> Check {
        let pass = match kind {
            CheckKind::Equal => (computed - expected).abs() <= tol,
            CheckKind::AtLeast => computed >= expected - tol,
            CheckKind::AtMost => computed <= expected + tol,
        };
        Check {
            label: label.into(),
            kind,
            computed,
            expected,
            tol,
            pass,
        }
    }

    pub fn equal(label: impl Into<String>, computed: f64, expected: f64, tol: f64) -> Check {
        Check::new(CheckKind::Equal, label, computed, expected, tol)
    }

    pub fn at_least(label: impl Into<String>, computed: f64, bound: f64, tol: f64) -> Check {
        Check::new(CheckKind::AtLeast, label, computed, bound, tol)
    }

    pub fn at_most(label: impl Into<String>, computed: f64, bound: f64, tol: f64) -> Check {
        Check::new(CheckKind::AtMost, label, computed, bound, tol)
    }

    /// A boolean condition recorded as `1 == 1`.
    pub fn holds(label: impl Into<String>, ok: bool) -> Check {
        Check::equal(label, if ok { 1.0 } else { 0.0 }, 1.0, 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub scenario: String,
    pub parameters: serde_json::Value,
    /// Checks grouped by the identity they exercise.
    pub checks: BTreeMap<String, Vec<Check>>,
    /// Scenario-specific output (distributions, tables, estimates).
    pub data: serde_json::Value,
    pub pass: bool,
}

impl ScenarioReport {
    pub fn new(scenario: &str, parameters: serde_json::Value) -> Self {
        ScenarioReport {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.to_string(),
            parameters,
            checks: BTreeMap::new(),
            data: serde_json::Value::Null,
            pass: true,
        }
    }

    pub fn push(&mut self, identity: &str, check: Check) {
        self.pass &= check.pass;
        self.checks.entry(identity.to_string()).or_default().push(check);
    }

    pub fn failures(&self) -> Vec<(&str, &Check)> {
        self.checks
            .iter()
            .flat_map(|(k, v)| v.iter().filter(|c| !c.pass).map(move |c| (k.as_str(), c)))
            .collect()
    }

    /// Every check under `identity`.
    pub fn group(&self, identity: &str) -> &[Check] {
        self.checks.get(identity).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn find(&self, identity: &str, label: &str) -> Option<&Check> {
        self.group(identity).iter().find(|c| c.label == label)
    }

    /// Largest `|computed - expected|` among equality checks of a group.
    pub fn max_deviation(&self, identity: &str) -> f64 {
        self.group(identity)
            .iter()
            .filter(|c| c.kind == CheckKind::Equal)
            .map(|c| (c.computed - c.expected).abs())
            .fold(0.0, f64::max)
    }
}

/// Tolerance names read anywhere in the library.
pub const TOLERANCE_NAMES: &[&str] = &[
    "app",
    "band",
    "binomial",
    "consistency",
    "exact",
    "injected",
    "jump_total",
    "moment",
    "monotonicity",
    "orthonormal",
    "outcome",
    "proper_time",
    "restriction",
    "sigmas",
];

/// Named tolerance overrides. Names not present fall back to the default
/// passed at the use site.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tolerances(pub BTreeMap<String, f64>);

impl Tolerances {
    pub fn get(&self, name: &str, default: f64) -> f64 {
        self.0.get(name).copied().unwrap_or(default)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !TOLERANCE_NAMES.contains(&name) {
            return Err(Error::Config(format!(
                "unknown tolerance `{name}` (known: {})",
                TOLERANCE_NAMES.join(", ")
            )));
        }
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Config(format!("tolerance {name} must be positive, got {value}")));
        }
        self.0.insert(name.to_string(), value);
        Ok(())
    }

    /// Parses `name=value`.
    pub fn parse_assignment(&mut self, s: &str) -> Result<()> {
        let (name, value) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected name=value, got `{s}`")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad tolerance value `{value}`")))?;
        self.set(name.trim(), v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_assignments() {
        let mut t = Tolerances::default();
        t.parse_assignment("app = 1e-6").unwrap();
        assert_eq!(t.get("app", 1.0), 1e-6);
        assert_eq!(t.get("exact", 0.5), 0.5);
        assert!(t.parse_assignment("apps=1e-6").is_err());
        assert!(t.parse_assignment("app").is_err());
        assert!(t.parse_assignment("app=-1").is_err());
        assert!(t.parse_assignment("app=inf").is_err());
    }
}

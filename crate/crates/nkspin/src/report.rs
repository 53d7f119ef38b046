//! Assertions, observations and suite reports.
//!
//! Reports hold no timings or host data, so identical inputs serialize to
//! identical bytes.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "1.0.0";

/// Thresholds used by the suites.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Pointwise algebraic identities.
    pub identity: f64,
    /// Operator-matrix identities.
    pub operator: f64,
    /// Relative singular-value cutoff for rank decisions.
    pub rank: f64,
    /// Eigenvalue matching.
    pub eigen: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { identity: 1e-9, operator: 1e-8, rank: 1e-8, eigen: 1e-6 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("identity", self.identity), ("operator", self.operator), ("rank", self.rank), ("eigen", self.eigen)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("tolerance `{name}` must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Value stated in the source literature.
    Published,
    /// Value obtained from an independent computation.
    Derived,
    /// Holds by construction or definition.
    Structural,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|value − expected| ≤ tolerance`
    Within,
    /// `value ≥ expected − tolerance`
    AtLeast,
    /// `value ≤ expected + tolerance`
    AtMost,
}

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub id: String,
    pub space: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub provenance_tag: Provenance,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Assertion {
    pub fn new(id: &str, space: &str, value: f64, expected: f64, tolerance: f64, comparison: Comparison, prov: Provenance) -> Self {
        let pass = value.is_finite()
            && match comparison {
                Comparison::Within => (value - expected).abs() <= tolerance,
                Comparison::AtLeast => value >= expected - tolerance,
                Comparison::AtMost => value <= expected + tolerance,
            };
        Assertion {
            id: id.to_string(),
            space: space.to_string(),
            value,
            expected,
            tolerance,
            comparison,
            provenance_tag: prov,
            pass,
            note: None,
        }
    }

    /// A residual that must vanish.
    pub fn residual(id: &str, space: &str, value: f64, tolerance: f64, prov: Provenance) -> Self {
        Self::new(id, space, value, 0.0, tolerance, Comparison::AtMost, prov)
    }

    pub fn equals(id: &str, space: &str, value: f64, expected: f64, tolerance: f64, prov: Provenance) -> Self {
        Self::new(id, space, value, expected, tolerance, Comparison::Within, prov)
    }

    pub fn count(id: &str, space: &str, value: usize, expected: usize, prov: Provenance) -> Self {
        Self::new(id, space, value as f64, expected as f64, 0.0, Comparison::Within, prov)
    }

    pub fn at_least(id: &str, space: &str, value: f64, bound: f64, tolerance: f64, prov: Provenance) -> Self {
        Self::new(id, space, value, bound, tolerance, Comparison::AtLeast, prov)
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.to_string());
        self
    }
}

/// A measured quantity reported without a pass/fail decision.
#[derive(Clone, Debug, Serialize)]
pub struct Observation {
    pub id: String,
    pub space: String,
    pub value: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Observation {
    pub fn new<V: Serialize>(id: &str, space: &str, value: V) -> Self {
        Observation {
            id: id.to_string(),
            space: space.to_string(),
            value: serde_json::to_value(value).expect("observation serializes"),
            note: None,
        }
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.to_string());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub metric: String,
    pub pass: bool,
    pub assertions: Vec<Assertion>,
    pub observations: Vec<Observation>,
}

impl SuiteReport {
    pub fn new(suite: &str, metric: &str) -> Self {
        SuiteReport { suite: suite.to_string(), metric: metric.to_string(), pass: true, assertions: vec![], observations: vec![] }
    }

    pub fn assert(&mut self, a: Assertion) {
        self.pass &= a.pass;
        self.assertions.push(a);
    }

    pub fn extend(&mut self, items: impl IntoIterator<Item = Assertion>) {
        for a in items {
            self.assert(a);
        }
    }

    pub fn observe(&mut self, o: Observation) {
        self.observations.push(o);
    }

    pub fn failures(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.pass).collect()
    }

    /// Largest value among assertions whose id starts with `prefix`.
    pub fn max_value(&self, prefix: &str) -> f64 {
        self.assertions.iter().filter(|a| a.id.starts_with(prefix)).map(|a| a.value).fold(0.0, f64::max)
    }

    pub fn find(&self, id: &str, space: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.id == id && a.space == space)
    }

    pub fn text(&self) -> String {
        let mut s = format!("== {} [{}] {}\n", self.suite, self.metric, if self.pass { "PASS" } else { "FAIL" });
        for a in &self.assertions {
            s.push_str(&format!(
                "  {:4} {:<28} {:<10} value={:<12.4e} expected={:<10.4e} tol={:.1e}{}\n",
                if a.pass { "ok" } else { "FAIL" },
                a.id,
                a.space,
                a.value,
                a.expected,
                a.tolerance,
                a.note.as_ref().map(|n| format!("  ({n})")).unwrap_or_default()
            ));
        }
        for o in &self.observations {
            s.push_str(&format!("  obs  {:<28} {:<10} {}\n", o.id, o.space, o.value));
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema_version: String,
    pub config: serde_json::Value,
    pub pass: bool,
    pub suites: Vec<SuiteReport>,
}

impl RunReport {
    pub fn new(config: serde_json::Value, suites: Vec<SuiteReport>) -> Self {
        let pass = suites.iter().all(|s| s.pass);
        RunReport { schema_version: SCHEMA_VERSION.to_string(), config, pass, suites }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("schema_version {}\n", self.schema_version);
        for r in &self.suites {
            s.push_str(&r.text());
        }
        s.push_str(if self.pass { "overall PASS\n" } else { "overall FAIL\n" });
        s
    }
}

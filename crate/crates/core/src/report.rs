//! Verification and spectrum reports.

use crate::params::ModelParams;
use crate::tensor_core::C64;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Complex number serialised as `{"re": .., "im": ..}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for Cx {
    fn from(z: C64) -> Self {
        Cx { re: z.re, im: z.im }
    }
}

impl From<Cx> for C64 {
    fn from(z: Cx) -> Self {
        C64::new(z.re, z.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalar: Option<Cx>,
    pub pass: bool,
    pub millis: u64,
}

/// Snapshot of every input that shaped a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsSnapshot {
    pub n: usize,
    pub sites: usize,
    pub mu: Cx,
    pub m: Cx,
    pub zeta: Cx,
    pub gauge: String,
    pub left: String,
    pub right: String,
    pub diag_block: usize,
    pub xi: Cx,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl ParamsSnapshot {
    pub fn from_params(p: &ModelParams, samples: usize, seed: u64, tol: f64) -> Self {
        ParamsSnapshot {
            n: p.n,
            sites: p.sites,
            mu: p.mu.into(),
            m: p.m.into(),
            zeta: p.zeta.into(),
            gauge: "homogeneous".into(),
            left: "identity".into(),
            right: "explicit".into(),
            diag_block: 1,
            xi: C64::new(0.3, 0.0).into(),
            samples,
            seed,
            tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub params: ParamsSnapshot,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(suite: &str, params: ParamsSnapshot, mut checks: Vec<Check>) -> Self {
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        let pass = checks.iter().all(|c| c.pass);
        VerificationReport { suite: suite.to_string(), params, checks, pass }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn worst_residual(&self, prefix: &str) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.id.starts_with(prefix))
            .map(|c| c.residual)
            .fold(0.0, f64::max)
    }

    /// Drop wall-clock timings so output depends only on the inputs.
    pub fn strip_timings(&mut self) {
        for c in &mut self.checks {
            c.millis = 0;
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "suite {}  n={} N={}  {}\n",
            self.suite,
            self.params.n,
            self.params.sites,
            if self.pass { "PASS" } else { "FAIL" }
        );
        for c in &self.checks {
            let scalar = c
                .scalar
                .map(|z| format!("  scalar {:+.6e}{:+.6e}i", z.re, z.im))
                .unwrap_or_default();
            s.push_str(&format!(
                "  {:<4} {:<48} {:.3e}{}\n",
                if c.pass { "ok" } else { "FAIL" },
                c.id,
                c.residual,
                scalar
            ));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub value: Cx,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub params: ParamsSnapshot,
    pub eigenvalues: Vec<Cx>,
    pub clusters: Vec<Cluster>,
    pub cluster_tol: f64,
    pub hermitian_defect: f64,
}

impl SpectrumReport {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "spectrum n={} N={}  size {}  hermitian defect {:.3e}\n",
            self.params.n,
            self.params.sites,
            self.eigenvalues.len(),
            self.hermitian_defect
        );
        for c in &self.clusters {
            s.push_str(&format!("  {:+.10e}{:+.10e}i  x{}\n", c.value.re, c.value.im, c.multiplicity));
        }
        s
    }
}

/// How a residual is judged.
#[derive(Clone, Copy, Debug)]
pub enum Rule {
    /// pass when residual ≤ bound
    AtMost(f64),
    /// pass when residual > bound (the quantity must be genuinely nonzero)
    Exceeds(f64),
    /// informational: always passes
    Info,
}

impl Rule {
    pub fn judge(self, residual: f64) -> bool {
        match self {
            Rule::AtMost(t) => residual.is_finite() && residual <= t,
            Rule::Exceeds(t) => residual.is_finite() && residual > t,
            Rule::Info => true,
        }
    }
}

/// Collects checks with their timings.
#[derive(Default)]
pub struct CheckList {
    pub checks: Vec<Check>,
}

impl CheckList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, id: impl Into<String>, residual: f64, scalar: Option<C64>, rule: Rule, start: Instant) {
        self.checks.push(Check {
            id: id.into(),
            residual,
            scalar: scalar.map(Cx::from),
            pass: rule.judge(residual),
            millis: start.elapsed().as_millis() as u64,
        });
    }

    /// Run `f`, time it, and record its residual (and optional scalar).
    pub fn run<F>(&mut self, id: impl Into<String>, rule: Rule, f: F)
    where
        F: FnOnce() -> (f64, Option<C64>),
    {
        let start = Instant::now();
        let (r, s) = f();
        self.push(id, r, s, rule, start);
    }

    /// Record a failed construction as a failing check rather than aborting the suite.
    pub fn error(&mut self, id: impl Into<String>, err: &crate::error::Error) {
        let id = id.into();
        self.checks.push(Check {
            id: format!("{id}.error: {err}"),
            residual: f64::INFINITY,
            scalar: None,
            pass: false,
            millis: 0,
        });
    }

    pub fn extend(&mut self, other: CheckList) {
        self.checks.extend(other.checks);
    }

    pub fn into_report(self, suite: &str, params: ParamsSnapshot) -> VerificationReport {
        VerificationReport::new(suite, params, self.checks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap() -> ParamsSnapshot {
        ParamsSnapshot::from_params(&ModelParams::default(), 5, 1, 1e-9)
    }

    #[test]
    fn empty_report_passes() {
        let r = VerificationReport::new("x", snap(), vec![]);
        assert!(r.pass);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["checks"].as_array().unwrap().len(), 0);
        assert_eq!(v["pass"], true);
        assert_eq!(v["suite"], "x");
    }

    #[test]
    fn one_failure_fails_report() {
        let mut l = CheckList::new();
        l.run("a.b.c", Rule::AtMost(1e-9), || (1e-12, None));
        l.run("a.b.d", Rule::AtMost(1e-9), || (1e-3, Some(C64::new(2.0, 0.0))));
        let r = l.into_report("x", snap());
        assert!(!r.pass);
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn json_round_trip() {
        let mut l = CheckList::new();
        l.run("a.b.c", Rule::AtMost(1e-9), || (1e-12, Some(C64::new(0.5, -1.0))));
        let r = l.into_report("x", snap());
        let s = serde_json::to_string(&r).unwrap();
        let back: VerificationReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn rules() {
        assert!(Rule::AtMost(1e-9).judge(1e-10));
        assert!(!Rule::AtMost(1e-9).judge(f64::NAN));
        assert!(Rule::Exceeds(1e-3).judge(0.1));
        assert!(!Rule::Exceeds(1e-3).judge(1e-4));
        assert!(Rule::Info.judge(5.0));
    }
}

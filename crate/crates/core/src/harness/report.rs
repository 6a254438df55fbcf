//! Machine-readable reports. Field order is fixed and maps are sorted, so equal
//! inputs give byte-identical output; timings are only written on request.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::ideal::FractionalIdeal;

pub const REPORT_SCHEMA: &str = "equifit-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    ReportOnly,
}

impl Verdict {
    pub fn of(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub detail: Value,
}

/// Canonical form of an ideal: `scale · (row lattice of hnf)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdealRecord {
    pub name: String,
    pub ring: String,
    pub scale: String,
    pub hnf: Vec<Vec<String>>,
    pub generators: Vec<String>,
}

impl IdealRecord {
    pub fn new(name: &str, ideal: &FractionalIdeal) -> IdealRecord {
        let c = ideal.canonical();
        let kind = if ideal.ring().is_minus() { "Z[1/2][G]^-" } else { "Z[G]" };
        IdealRecord {
            name: name.into(),
            ring: format!("{kind}, G = {:?}", ideal.ring().group().parts()),
            scale: c.scale.to_string(),
            hnf: c.basis.to_strings(),
            generators: ideal.generator_strings(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub inputs: Value,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    pub ideals: Vec<IdealRecord>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, u64>>,
}

impl Report {
    pub fn new(command: &str, inputs: Value) -> Report {
        Report {
            schema: REPORT_SCHEMA,
            command: command.into(),
            inputs,
            verdict: Verdict::ReportOnly,
            checks: Vec::new(),
            ideals: Vec::new(),
            notes: Vec::new(),
            timings_ms: None,
        }
    }

    pub fn check(&mut self, name: &str, verdict: Verdict, detail: Value) {
        self.checks.push(Check { name: name.into(), verdict, detail });
        self.verdict = overall(self.checks.iter().map(|c| c.verdict));
    }

    pub fn ideal(&mut self, name: &str, ideal: &FractionalIdeal) {
        self.ideals.push(IdealRecord::new(name, ideal));
    }

    pub fn timing(&mut self, name: &str, ms: u64) {
        self.timings_ms.get_or_insert_with(BTreeMap::new).insert(name.into(), ms);
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Fail if anything failed, pass if something passed, otherwise report-only.
pub fn overall(vs: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut out = Verdict::ReportOnly;
    for v in vs {
        match v {
            Verdict::Fail => return Verdict::Fail,
            Verdict::Pass => out = Verdict::Pass,
            Verdict::ReportOnly => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn verdict_folding() {
        assert_eq!(overall([]), Verdict::ReportOnly);
        assert_eq!(overall([Verdict::ReportOnly, Verdict::Pass]), Verdict::Pass);
        assert_eq!(overall([Verdict::Pass, Verdict::Fail, Verdict::Pass]), Verdict::Fail);
    }

    #[test]
    fn report_json_is_stable() {
        let mut r = Report::new("x", json!({"b": 1, "a": "2"}));
        r.check("c", Verdict::Pass, json!({}));
        let s = r.to_json();
        assert_eq!(s, r.clone().to_json());
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(!s.contains("timings_ms"));
        assert!(s.contains("\"verdict\": \"pass\""));
    }
}

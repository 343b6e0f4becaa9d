//! Verification reports: `{"suite", "cases": [{"inputs", "residual", "pass"}], "pass"}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub inputs: BTreeMap<String, String>,
    pub residual: String,
    pub pass: bool,
}

impl Case {
    pub fn new<I, K, V>(inputs: I, residual: impl Into<String>, pass: bool) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Case {
            inputs: inputs.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
            residual: residual.into(),
            pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub cases: Vec<Case>,
    pub pass: bool,
}

impl Report {
    pub fn new(suite: &str) -> Self {
        Report { suite: suite.to_string(), cases: Vec::new(), pass: true }
    }

    pub fn push(&mut self, c: Case) {
        self.pass &= c.pass;
        self.cases.push(c);
    }

    pub fn from_cases(suite: &str, cases: Vec<Case>) -> Self {
        let mut r = Report::new(suite);
        for c in cases {
            r.push(c);
        }
        r
    }

    pub fn failures(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

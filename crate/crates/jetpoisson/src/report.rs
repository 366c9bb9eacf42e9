//! Verification records and their JSON / text rendering.

use crate::coeffpoly::Poly;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// Where a check failed and what was left over. Empty on success.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Witness {
    pub indices: Vec<i64>,
    pub residual: String,
}

/// One check outcome. Field order is the serialisation order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub check: String,
    pub params: BTreeMap<String, String>,
    pub status: Status,
    pub witness: Witness,
}

impl Record {
    pub fn pass(check: &str) -> Self {
        Record {
            check: check.to_string(),
            params: BTreeMap::new(),
            status: Status::Pass,
            witness: Witness { indices: vec![], residual: "0".into() },
        }
    }

    pub fn fail(check: &str, indices: Vec<i64>, residual: String) -> Self {
        Record {
            check: check.to_string(),
            params: BTreeMap::new(),
            status: Status::Fail,
            witness: Witness { indices, residual },
        }
    }

    pub fn param<V: ToString>(mut self, key: &str, value: V) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{}={}", k, v)).collect();
        match self.status {
            Status::Pass => write!(f, "PASS {} {}", self.check, params.join(" ")),
            Status::Fail => write!(
                f,
                "FAIL {} {} at {:?}: {}",
                self.check,
                params.join(" "),
                self.witness.indices,
                self.witness.residual
            ),
        }
    }
}

/// Runs over many indexed identities, keeping the first non-zero residual.
#[derive(Default)]
pub struct Tally {
    pub checked: usize,
    pub skipped: usize,
    pub failures: usize,
    first: Option<(Vec<i64>, String)>,
}

impl Tally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, indices: &[i64], residual: &Poly) {
        self.checked += 1;
        if !residual.is_zero() {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some((indices.to_vec(), residual.to_string()));
            }
        }
    }

    /// Records a failure that is not a polynomial residual.
    pub fn observe_text(&mut self, indices: &[i64], residual: Option<String>) {
        self.checked += 1;
        if let Some(r) = residual {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some((indices.to_vec(), r));
            }
        }
    }

    pub fn skip(&mut self) {
        self.skipped += 1;
    }

    pub fn is_clean(&self) -> bool {
        self.failures == 0
    }

    pub fn first_failure(&self) -> Option<&(Vec<i64>, String)> {
        self.first.as_ref()
    }

    /// Record with the counts attached. Zero checked identities count as a failure.
    pub fn record(self, check: &str) -> Record {
        let rec = match (&self.first, self.checked) {
            (Some((idx, res)), _) => Record::fail(check, idx.clone(), res.clone()),
            (None, 0) => Record::fail(check, vec![], "no identities checked".into()),
            (None, _) => Record::pass(check),
        };
        let rec = rec.param("checked", self.checked);
        if self.skipped > 0 {
            rec.param("skipped", self.skipped)
        } else {
            rec
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub records: Vec<Record>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn extend(&mut self, other: Report) {
        self.records.extend(other.records);
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(Record::passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.records).expect("records serialise")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        Ok(Report { records: serde_json::from_str(s)? })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        let failed = self.records.iter().filter(|r| !r.passed()).count();
        out.push_str(&format!("{} checks, {} failed\n", self.records.len(), failed));
        out
    }
}

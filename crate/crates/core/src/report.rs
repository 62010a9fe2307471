//! Structured pass/fail reports shared by the verification entry points.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    /// Failure witness (a point, an overlap interval, a length), when any.
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct Report {
    pub title: String,
    pub checks: Vec<CheckRecord>,
    /// Free-form observations that are not pass/fail checks.
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn pass(&mut self, name: impl Into<String>) {
        self.checks.push(CheckRecord {
            name: name.into(),
            passed: true,
            witness: None,
        });
    }

    pub fn fail(&mut self, name: impl Into<String>, witness: impl Into<String>) {
        self.checks.push(CheckRecord {
            name: name.into(),
            passed: false,
            witness: Some(witness.into()),
        });
    }

    pub fn check(&mut self, name: impl Into<String>, ok: bool, witness: impl Into<String>) {
        if ok {
            self.pass(name);
        } else {
            self.fail(name, witness);
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn merge(&mut self, other: Report) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "== {} ==", self.title)?;
        for c in &self.checks {
            match (&c.passed, &c.witness) {
                (true, _) => writeln!(f, "  [PASS] {}", c.name)?,
                (false, Some(w)) => writeln!(f, "  [FAIL] {} -- {}", c.name, w)?,
                (false, None) => writeln!(f, "  [FAIL] {}", c.name)?,
            }
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        writeln!(
            f,
            "  {} checks, {} failed",
            self.checks.len(),
            self.checks.iter().filter(|c| !c.passed).count()
        )
    }
}

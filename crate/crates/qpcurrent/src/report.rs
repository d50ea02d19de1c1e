//! Run reports: the deterministic text format used by golden files and the
//! versioned JSON schema (`docs/report-schema.json`).

use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "qpcurrent.report/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Field {
    pub name: String,
    pub value: String,
}

/// Output of one command.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub command: String,
    pub subject: String,
    /// 1-based source line of the command.
    pub line: usize,
    pub fields: Vec<Field>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_us: Option<u64>,
}

impl Entry {
    pub fn new(command: &str, subject: String, line: usize) -> Self {
        Entry { command: command.into(), subject, line, fields: Vec::new(), error: None, elapsed_us: None }
    }

    pub fn field(&mut self, name: impl Into<String>, value: impl Into<String>) {
        self.fields.push(Field { name: name.into(), value: value.into() });
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.fields.iter().find(|f| f.name == name).map(|f| f.value.as_str())
    }
}

/// Output of one scenario or file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub source: String,
    pub entries: Vec<Entry>,
    /// Diagnostics that stopped the run before any command executed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_us: Option<u64>,
}

impl RunReport {
    pub fn entry(&self, command: &str, subject: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.command == command && e.subject == subject)
    }

    /// `command subject :: field = value`, one line per field, no timing.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for d in &self.diagnostics {
            out.push_str(d);
            out.push('\n');
        }
        out.push_str(&self.entries_text());
        out
    }

    /// The text form without the leading diagnostics.
    pub fn entries_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let head = if e.subject.is_empty() { e.command.clone() } else { format!("{} {}", e.command, e.subject) };
            for f in &e.fields {
                out.push_str(&format!("{head} :: {} = {}\n", f.name, f.value));
            }
            if let Some(err) = &e.error {
                out.push_str(&format!("{head} :: error = {err}\n"));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diff {
    /// 1-based line of the first difference.
    pub line: usize,
    pub expected: Option<String>,
    pub actual: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub scenario: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diff: Option<Diff>,
}

/// Top-level document emitted with `--json`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub runs: Vec<RunReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub verification: Vec<Verdict>,
    pub ok: bool,
}

impl Report {
    pub fn new(runs: Vec<RunReport>, verification: Vec<Verdict>) -> Self {
        let ok = runs.iter().all(|r| r.ok) && verification.iter().all(|v| v.passed);
        Report { schema: SCHEMA.into(), runs, verification, ok }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<Report, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// First line where `actual` differs from `expected`, if any.
pub fn first_diff(expected: &str, actual: &str) -> Option<Diff> {
    let mut e = expected.lines();
    let mut a = actual.lines();
    let mut line = 0;
    loop {
        line += 1;
        match (e.next(), a.next()) {
            (None, None) => {
                // identical lines; only a trailing newline can differ
                return (expected.ends_with('\n') != actual.ends_with('\n')).then_some(Diff {
                    line,
                    expected: None,
                    actual: None,
                });
            }
            (x, y) if x == y => continue,
            (x, y) => {
                return Some(Diff { line, expected: x.map(String::from), actual: y.map(String::from) });
            }
        }
    }
}

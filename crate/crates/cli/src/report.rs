use std::fmt::Write as _;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// Nothing failed, but the answer holds only up to a search bound.
    BoundRelative,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::BoundRelative => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Finding {
    /// Name of the violated condition, e.g. `gluing/cocycle-scalar`.
    pub clause: String,
    pub locus: String,
    pub witness: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub findings: Vec<Finding>,
    /// Free-form result lines (counts, bases, certificates).
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            status: Status::Pass,
            findings: Vec::new(),
            notes: Vec::new(),
            output: None,
        }
    }

    pub fn fail(&mut self, clause: impl ToString, locus: impl ToString, witness: impl ToString) {
        self.findings.push(Finding {
            clause: clause.to_string(),
            locus: locus.to_string(),
            witness: witness.to_string(),
        });
        self.status = Status::Fail;
    }

    /// Downgrades a passing report; failures stay failures.
    pub fn bound_relative(&mut self, note: impl ToString) {
        if self.status == Status::Pass {
            self.status = Status::BoundRelative;
        }
        self.notes.push(note.to_string());
    }

    pub fn note(&mut self, s: impl ToString) {
        self.notes.push(s.to_string());
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let status = match self.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::BoundRelative => "bound-relative",
        };
        let mut s = format!("{}: {status}\n", self.command);
        for f in &self.findings {
            let _ = writeln!(s, "  [{}] {}: {}", f.clause, f.locus, f.witness);
        }
        for n in &self.notes {
            let _ = writeln!(s, "  {n}");
        }
        if let Some(o) = &self.output {
            let _ = writeln!(s, "  wrote {o}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failures_outrank_bounds() {
        let mut r = Report::new("x");
        r.bound_relative("searched to 2");
        assert_eq!(r.status.exit_code(), 3);
        r.fail("gluing/coverage", "{0}", "missing");
        r.bound_relative("again");
        assert_eq!(r.status, Status::Fail);
        assert_eq!(r.status.exit_code(), 1);
    }

    #[test]
    fn json_uses_kebab_case_status() {
        let mut r = Report::new("x");
        r.bound_relative("b");
        let v: serde_json::Value = serde_json::from_str(&r.render_json()).unwrap();
        assert_eq!(v["status"], "bound-relative");
        assert!(r.render_text().starts_with("x: bound-relative"));
    }
}

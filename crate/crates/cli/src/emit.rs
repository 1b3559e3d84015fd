//! Rendering a command outcome as human text or as a `relsite-report/1`
//! JSON document.

use serde::Serialize;

use relsite_core::{Check, Guards, Status, VerificationReport};

pub const SCHEMA: &str = "relsite-report/1";

/// How a command failed before producing a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Syntax,
    Resolution,
    Input,
    Guard,
    Precondition,
    Usage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommandError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CommandError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        CommandError { kind, message: message.into() }
    }
}

impl From<relsite_core::Error> for CommandError {
    fn from(e: relsite_core::Error) -> Self {
        let kind = match e {
            relsite_core::Error::Input(_) => ErrorKind::Input,
            relsite_core::Error::Guard { .. } => ErrorKind::Guard,
            relsite_core::Error::Precondition(_) => ErrorKind::Precondition,
        };
        CommandError::new(kind, e.to_string())
    }
}

/// Everything a command produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub report: VerificationReport,
    /// Bundle text of a constructed object, if the command builds one.
    pub result: Option<String>,
    pub error: Option<CommandError>,
    pub seed: Option<u64>,
}

impl Outcome {
    pub fn failed(e: impl Into<CommandError>) -> Self {
        Outcome { error: Some(e.into()), ..Outcome::default() }
    }

    /// 0 when every check passes, 1 when one fails, 2 on an error, 3 when
    /// nothing fails but something is undecided.
    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            return 2;
        }
        let checks = &self.report.checks;
        if checks.iter().any(|c| c.status.is_failure()) {
            1
        } else if checks.iter().any(|c| matches!(c.status, Status::Inconclusive | Status::Sampled)) {
            3
        } else {
            0
        }
    }

    pub fn status(&self) -> &'static str {
        match self.exit_code() {
            0 => "pass",
            1 => "fail",
            2 => "error",
            _ => "inconclusive",
        }
    }
}

/// Invocation data echoed into the report.
#[derive(Debug, Clone)]
pub struct Meta {
    pub command: Vec<String>,
    pub guards: Guards,
    pub timing_ms: Option<u128>,
}

#[derive(Serialize)]
struct JsonGuards {
    sieve_arrows: usize,
    sections: usize,
    ideals: usize,
    search_budget: u64,
    sample_budget: usize,
}

#[derive(Serialize)]
struct JsonWitness<'a> {
    role: &'a str,
    value: &'a str,
}

#[derive(Serialize)]
struct JsonCheck<'a> {
    name: &'a str,
    status: &'static str,
    cites: &'a str,
    witness: Option<Vec<JsonWitness<'a>>>,
    guard: Option<&'a str>,
    note: Option<&'a str>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    schema: &'static str,
    command: &'a [String],
    seed: Option<u64>,
    guards: JsonGuards,
    status: &'static str,
    exit_code: i32,
    checks: Vec<JsonCheck<'a>>,
    result: Option<&'a str>,
    error: Option<&'a CommandError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing_ms: Option<u128>,
}

fn json_check(c: &Check) -> JsonCheck<'_> {
    JsonCheck {
        name: &c.name,
        status: c.status.as_str(),
        cites: &c.cites,
        witness: c.witness.as_ref().map(|w| w.items.iter().map(|(role, value)| JsonWitness { role, value }).collect()),
        guard: c.guard.as_deref(),
        note: c.note.as_deref(),
    }
}

pub fn render_json(o: &Outcome, meta: &Meta) -> String {
    let g = &meta.guards;
    let doc = JsonReport {
        schema: SCHEMA,
        command: &meta.command,
        seed: o.seed,
        guards: JsonGuards {
            sieve_arrows: g.sieve_arrows,
            sections: g.sections,
            ideals: g.ideals,
            search_budget: g.search_budget,
            sample_budget: g.sample_budget,
        },
        status: o.status(),
        exit_code: o.exit_code(),
        checks: o.report.checks.iter().map(json_check).collect(),
        result: o.result.as_deref(),
        error: o.error.as_ref(),
        timing_ms: meta.timing_ms,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

pub fn render_human(o: &Outcome, meta: &Meta) -> String {
    let mut out = String::new();
    if let Some(e) = &o.error {
        let kind = serde_json::to_value(e.kind).expect("kind");
        out.push_str(&format!("error ({}): {}\n", kind.as_str().unwrap_or("error"), e.message));
        return out;
    }
    for c in &o.report.checks {
        out.push_str(&format!("{} {} ({})\n", c.status.as_str().to_uppercase(), c.name, c.cites));
        if let Some(w) = &c.witness {
            out.push_str(&format!("    witness: {w}\n"));
        }
        if let Some(g) = &c.guard {
            out.push_str(&format!("    guard: {g}\n"));
        }
        if let Some(n) = &c.note {
            out.push_str(&format!("    note: {n}\n"));
        }
    }
    let count = |s: Status| o.report.checks.iter().filter(|c| c.status == s).count();
    let mut parts = vec![format!("{} checks", o.report.checks.len())];
    for s in [Status::Pass, Status::Fail, Status::Inconclusive, Status::Sampled, Status::Skipped, Status::Discrepancy] {
        if count(s) > 0 {
            parts.push(format!("{} {}", count(s), s.as_str()));
        }
    }
    if let Some(seed) = o.seed {
        parts.push(format!("seed {seed}"));
    }
    if let Some(ms) = meta.timing_ms {
        parts.push(format!("{ms} ms"));
    }
    out.push_str(&format!("{}: {}\n", o.status(), parts.join(", ")));
    if let Some(r) = &o.result {
        out.push('\n');
        out.push_str(r);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use relsite_core::Witness;

    fn meta() -> Meta {
        Meta { command: vec!["check".into()], guards: Guards::default(), timing_ms: None }
    }

    fn outcome(checks: Vec<Check>) -> Outcome {
        let mut report = VerificationReport::new();
        for c in checks {
            report.push(c);
        }
        Outcome { report, ..Outcome::default() }
    }

    #[test]
    fn human_pass_line_cites_the_statement() {
        let o = outcome(vec![Check::pass("relative-bc", "∃ commutes with pullback")]);
        let text = render_human(&o, &meta());
        assert!(text.starts_with("PASS relative-bc (∃ commutes with pullback)\n"));
        assert_eq!(o.exit_code(), 0);
    }

    #[test]
    fn json_fail_has_witness_block() {
        let w = Witness::new().with("object", "b").with("arrow", "f");
        let o = outcome(vec![Check::fail("topology-maximal", "maximal sieves cover", w)]);
        let v: serde_json::Value = serde_json::from_str(&render_json(&o, &meta())).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["status"], "fail");
        assert_eq!(v["checks"][0]["witness"][1]["role"], "arrow");
        assert_eq!(v["checks"][0]["witness"][1]["value"], "f");
        assert_eq!(o.exit_code(), 1);
        assert!(v.get("timing_ms").is_none());
    }

    #[test]
    fn json_inconclusive_names_the_guard() {
        let o = outcome(vec![Check::new("stack", "descent", Status::Inconclusive).with_guard("sieve_arrows")]);
        let v: serde_json::Value = serde_json::from_str(&render_json(&o, &meta())).unwrap();
        assert_eq!(v["checks"][0]["status"], "inconclusive");
        assert_eq!(v["checks"][0]["guard"], "sieve_arrows");
        assert_eq!(o.exit_code(), 3);
    }

    #[test]
    fn errors_exit_two() {
        let o = Outcome::failed(CommandError::new(ErrorKind::Resolution, "1:1: unresolved"));
        assert_eq!(o.exit_code(), 2);
        assert!(render_human(&o, &meta()).starts_with("error (resolution): "));
        let v: serde_json::Value = serde_json::from_str(&render_json(&o, &meta())).unwrap();
        assert_eq!(v["error"]["kind"], "resolution");
    }
}

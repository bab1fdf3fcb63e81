//! Command reports: claims with pass/fail verdicts, witnesses and timings.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub claim: String,
    pub pass: bool,
    /// Serialized evidence: a cycle, a violated constraint, a gap.
    pub witness: Value,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub command: String,
    pub verdicts: Vec<Verdict>,
    /// Command output that is not a verdict (plans, values, trajectories).
    pub details: Map<String, Value>,
    pub timings: Vec<(String, Duration)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { command: command.to_string(), ..Default::default() }
    }

    pub fn verdict(&mut self, claim: impl Into<String>, pass: bool, witness: Value) -> bool {
        self.verdicts.push(Verdict { claim: claim.into(), pass, witness });
        pass
    }

    pub fn detail(&mut self, key: &str, value: Value) {
        self.details.insert(key.to_string(), value);
    }

    /// Runs `f` and records its wall time under `stage`.
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push((stage.to_string(), start.elapsed()));
        out
    }

    pub fn verdict_for(&self, claim: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.claim == claim)
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// 0 when every verdict passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "passed": self.passed(),
            "verdicts": self
                .verdicts
                .iter()
                .map(|v| json!({"claim": v.claim, "pass": v.pass, "witness": v.witness}))
                .collect::<Vec<_>>(),
            "details": self.details,
            "timings_ms": self
                .timings
                .iter()
                .map(|(s, d)| json!({"stage": s, "ms": d.as_secs_f64() * 1e3}))
                .collect::<Vec<_>>(),
        })
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "== {} ==", self.command);
        for (k, v) in &self.details {
            let _ = writeln!(out, "{k}: {}", compact(v));
        }
        for v in &self.verdicts {
            let mark = if v.pass { "PASS" } else { "FAIL" };
            let _ = write!(out, "[{mark}] {}", v.claim);
            if !v.witness.is_null() {
                let _ = write!(out, "  witness: {}", compact(&v.witness));
            }
            out.push('\n');
        }
        let stages: Vec<String> = self
            .timings
            .iter()
            .map(|(s, d)| format!("{s} {:.1}ms", d.as_secs_f64() * 1e3))
            .collect();
        if !stages.is_empty() {
            let _ = writeln!(out, "timings: {}", stages.join(", "));
        }
        out
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_and_rendering() {
        let mut r = Report::new("check");
        r.verdict("first", true, Value::Null);
        assert_eq!(r.exit_code(), 0);
        let v = r.time("stage", || 7);
        assert_eq!(v, 7);
        r.verdict("second", false, json!({"gap": "1/2"}));
        assert_eq!(r.exit_code(), 1);
        let text = r.render_text();
        assert!(text.contains("[PASS] first\n"));
        assert!(text.contains("[FAIL] second  witness: {\"gap\":\"1/2\"}"));
        let j = r.to_json();
        assert_eq!(j["passed"], json!(false));
        assert_eq!(j["verdicts"][1]["witness"]["gap"], json!("1/2"));
        assert_eq!(j["timings_ms"][0]["stage"], json!("stage"));
    }
}

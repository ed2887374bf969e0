//! The report every command prints: `{command, verdict, witnesses,
//! diagnostics, timing}`. Keys serialize in sorted order, so equal reports
//! are byte-identical.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Refuted,
    Supported,
    Infeasible,
    Error,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Refuted => "refuted",
            Verdict::Supported => "supported",
            Verdict::Infeasible => "infeasible",
            Verdict::Error => "error",
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Verdict::Holds | Verdict::Supported => 0,
            Verdict::Refuted | Verdict::Infeasible => 1,
            Verdict::Error => 2,
        }
    }

    pub fn holds_if(ok: bool) -> Self {
        if ok {
            Verdict::Holds
        } else {
            Verdict::Refuted
        }
    }

    pub fn supported_if(ok: bool) -> Self {
        if ok {
            Verdict::Supported
        } else {
            Verdict::Refuted
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub verdict: Verdict,
    pub witnesses: Map<String, Value>,
    pub diagnostics: Vec<String>,
    /// Wall-clock milliseconds; left out unless requested so that reports
    /// stay reproducible.
    pub timing: Option<u128>,
}

impl Report {
    pub fn new(command: impl Into<String>, verdict: Verdict) -> Self {
        Report {
            command: command.into(),
            verdict,
            witnesses: Map::new(),
            diagnostics: Vec::new(),
            timing: None,
        }
    }

    pub fn witness(mut self, key: &str, value: Value) -> Self {
        self.witnesses.insert(key.to_string(), value);
        self
    }

    pub fn diagnostic(mut self, msg: impl Into<String>) -> Self {
        self.diagnostics.push(msg.into());
        self
    }

    pub fn to_value(&self) -> Value {
        json!({
            "command": self.command,
            "verdict": self.verdict.as_str(),
            "witnesses": self.witnesses,
            "diagnostics": self.diagnostics,
            "timing": self.timing.map(|ms| json!({ "wall_ms": ms })).unwrap_or(Value::Null),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}: {}", self.command, self.verdict.as_str()).unwrap();
        for (k, v) in &self.witnesses {
            render(&mut out, k, v, 1);
        }
        for d in &self.diagnostics {
            writeln!(out, "note: {d}").unwrap();
        }
        if let Some(ms) = self.timing {
            writeln!(out, "time: {ms} ms").unwrap();
        }
        out
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| scalar_leaf(x)) => {
            Some(format!("[{}]", a.iter().map(|x| scalar(x).unwrap()).collect::<Vec<_>>().join(", ")))
        }
        _ => None,
    }
}

fn scalar_leaf(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

/// Rows of flat objects sharing one key set print as a table.
fn table(rows: &[Value]) -> Option<(Vec<String>, Vec<Vec<String>>)> {
    let first = rows.first()?.as_object()?;
    let keys: Vec<String> = first.keys().cloned().collect();
    let mut cells = Vec::new();
    for r in rows {
        let o = r.as_object()?;
        if o.len() != keys.len() {
            return None;
        }
        let row = keys
            .iter()
            .map(|k| o.get(k).and_then(scalar))
            .collect::<Option<Vec<_>>>()?;
        cells.push(row);
    }
    Some((keys, cells))
}

fn render(out: &mut String, key: &str, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    if let Some(s) = scalar(v) {
        writeln!(out, "{pad}{key}: {s}").unwrap();
        return;
    }
    match v {
        Value::Object(o) => {
            writeln!(out, "{pad}{key}:").unwrap();
            for (k, x) in o {
                render(out, k, x, depth + 1);
            }
        }
        Value::Array(a) => {
            if let Some((keys, rows)) = table(a) {
                writeln!(out, "{pad}{key}:").unwrap();
                let widths: Vec<usize> = keys
                    .iter()
                    .enumerate()
                    .map(|(i, k)| rows.iter().map(|r| r[i].len()).chain([k.len()]).max().unwrap())
                    .collect();
                let line = |cells: &[String]| {
                    cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:<w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                };
                writeln!(out, "{pad}  {}", line(&keys).trim_end()).unwrap();
                for r in &rows {
                    writeln!(out, "{pad}  {}", line(r).trim_end()).unwrap();
                }
            } else {
                writeln!(out, "{pad}{key}:").unwrap();
                for (i, x) in a.iter().enumerate() {
                    render(out, &format!("[{i}]"), x, depth + 1);
                }
            }
        }
        _ => unreachable!("scalars handled above"),
    }
}

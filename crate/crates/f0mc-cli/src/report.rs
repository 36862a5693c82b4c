//! Line-oriented run reports. The estimate always prints first as
//! `estimate <value>`; the optional report repeats it under a stable key set
//! either as `key=value` lines or as one JSON object per line.

use clap::ValueEnum;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    /// `key=value`, one per line.
    Kv,
    /// One JSON object per line.
    JsonLines,
}

enum Value {
    Int(u64),
    Float(f64),
    Text(String),
}

pub struct Report {
    estimate: Option<f64>,
    pairs: Vec<(&'static str, Value)>,
    extra: String,
}

impl Report {
    pub fn new() -> Self {
        Report { estimate: None, pairs: Vec::new(), extra: String::new() }
    }

    pub fn estimate(&mut self, value: f64) {
        self.estimate = Some(value);
    }

    pub fn push(&mut self, key: &'static str, value: u64) {
        self.pairs.push((key, Value::Int(value)));
    }

    pub fn push_str(&mut self, key: &'static str, value: impl Into<String>) {
        self.pairs.push((key, Value::Text(value.into())));
    }

    pub fn push_front(&mut self, key: &'static str, value: u64) {
        self.pairs.insert(0, (key, Value::Int(value)));
    }

    pub fn push_front_f64(&mut self, key: &'static str, value: f64) {
        self.pairs.insert(0, (key, Value::Float(value)));
    }

    /// Free-form pre-formatted lines (ledger breakdowns, bench tables).
    pub fn extra(&mut self, text: impl Into<String>) {
        self.extra.push_str(&text.into());
    }

    pub fn render(&self, format: ReportFormat, include_report: bool) -> String {
        let mut out = String::new();
        if let Some(est) = self.estimate {
            out.push_str(&format!("estimate {est}\n"));
        }
        if include_report {
            match format {
                ReportFormat::Kv => {
                    if let Some(est) = self.estimate {
                        out.push_str(&format!("estimate={est}\n"));
                    }
                    for (k, v) in &self.pairs {
                        match v {
                            Value::Int(i) => out.push_str(&format!("{k}={i}\n")),
                            Value::Float(f) => out.push_str(&format!("{k}={f}\n")),
                            Value::Text(s) => out.push_str(&format!("{k}={s}\n")),
                        }
                    }
                }
                ReportFormat::JsonLines => {
                    let mut fields = Vec::new();
                    if let Some(est) = self.estimate {
                        fields.push(format!("\"estimate\":{est}"));
                    }
                    for (k, v) in &self.pairs {
                        match v {
                            Value::Int(i) => fields.push(format!("\"{k}\":{i}")),
                            Value::Float(f) => fields.push(format!("\"{k}\":{f}")),
                            Value::Text(s) => fields.push(format!("\"{k}\":\"{s}\"")),
                        }
                    }
                    out.push_str(&format!("{{{}}}\n", fields.join(",")));
                }
            }
        }
        out.push_str(&self.extra);
        out
    }
}

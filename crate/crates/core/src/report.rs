//! Flat report records and their JSON-lines / CSV renderings.
//!
//! Floats are written in scientific notation with 17 significant digits
//! (`{:.16e}`), which round-trips every `f64`. Non-finite values become
//! `null` in JSON and `nan`/`inf`/`-inf` in CSV.

use std::fmt::Write as _;
use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    UInt(u64),
    Float(f64),
    Bool(bool),
    Str(String),
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::UInt(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::UInt(x as u64)
    }
}

impl From<i64> for Value {
    fn from(x: i64) -> Self {
        Value::Int(x)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Str(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Str(x)
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Value {
    fn json(&self, out: &mut String) {
        match self {
            Value::Int(x) => write!(out, "{x}").unwrap(),
            Value::UInt(x) => write!(out, "{x}").unwrap(),
            Value::Float(x) if x.is_finite() => out.push_str(&format_float(*x)),
            Value::Float(_) => out.push_str("null"),
            Value::Bool(x) => write!(out, "{x}").unwrap(),
            Value::Str(s) => json_string(s, out),
        }
    }

    fn csv(&self) -> String {
        match self {
            Value::Int(x) => x.to_string(),
            Value::UInt(x) => x.to_string(),
            Value::Float(x) if x.is_finite() => format_float(*x),
            Value::Float(x) if x.is_nan() => "nan".into(),
            Value::Float(x) => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Value::Bool(x) => x.to_string(),
            Value::Str(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Value::Str(s) => s.clone(),
        }
    }
}

fn json_string(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => write!(out, "\\u{:04x}", c as u32).unwrap(),
            c => out.push(c),
        }
    }
    out.push('"');
}

/// An ordered list of named fields.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Record {
    fields: Vec<(String, Value)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    pub fn fields(&self) -> &[(String, Value)] {
        &self.fields
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{");
        for (i, (k, v)) in self.fields.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            json_string(k, &mut out);
            out.push(':');
            v.json(&mut out);
        }
        out.push('}');
        out
    }

    pub fn csv_header(&self) -> String {
        self.fields.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>().join(",")
    }

    pub fn csv_row(&self) -> String {
        self.fields.iter().map(|(_, v)| v.csv()).collect::<Vec<_>>().join(",")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn name(&self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// A complete report: the resolved configuration, homogeneous data rows and
/// an optional summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub config: Record,
    pub rows: Vec<Record>,
    pub summary: Option<Record>,
}

impl Report {
    /// JSON: one object per line, config first, summary last, each tagged
    /// with a `"record"` field. CSV: `# config <json>` comment line, header,
    /// rows, then `# summary <json>`.
    pub fn write(&self, format: Format, out: &mut impl Write) -> io::Result<()> {
        let tagged = |kind: &str, r: &Record| {
            let mut t = Record::new().with("record", kind);
            t.fields.extend(r.fields.iter().cloned());
            t
        };
        match format {
            Format::Json => {
                writeln!(out, "{}", tagged("config", &self.config).to_json())?;
                for row in &self.rows {
                    writeln!(out, "{}", tagged("row", row).to_json())?;
                }
                if let Some(s) = &self.summary {
                    writeln!(out, "{}", tagged("summary", s).to_json())?;
                }
            }
            Format::Csv => {
                writeln!(out, "# config {}", self.config.to_json())?;
                if let Some(first) = self.rows.first() {
                    writeln!(out, "{}", first.csv_header())?;
                }
                for row in &self.rows {
                    writeln!(out, "{}", row.csv_row())?;
                }
                if let Some(s) = &self.summary {
                    writeln!(out, "# summary {}", s.to_json())?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 4.0, 1e-300, 6.02214076e23, -2.5, f64::MIN_POSITIVE] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_float(4.0), "4.0000000000000000e0");
    }

    #[test]
    fn json_line() {
        let r = Record::new().with("a", 1u64).with("ok", true).with("x", 0.5).with("s", "q\"t").with("bad", f64::NAN);
        assert_eq!(r.to_json(), r#"{"a":1,"ok":true,"x":5.0000000000000000e-1,"s":"q\"t","bad":null}"#);
    }

    #[test]
    fn csv_layout() {
        let report = Report {
            config: Record::new().with("command", "farey"),
            rows: vec![Record::new().with("a", 1u64).with("q", 2u64), Record::new().with("a", 1u64).with("q", 1u64)],
            summary: Some(Record::new().with("count", 2u64)),
        };
        let mut buf = Vec::new();
        report.write(Format::Csv, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# config {\"command\":\"farey\"}\na,q\n1,2\n1,1\n# summary {\"count\":2}\n"
        );
        let mut buf = Vec::new();
        report.write(Format::Json, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("{\"record\":\"config\",\"command\":\"farey\"}\n"));
    }
}

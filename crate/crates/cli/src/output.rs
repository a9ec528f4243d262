//! Canonical JSON, CSV and plain-table rendering of command results.

use std::fmt::Write as _;

use serde_json::{Map, Number, Value};

pub const SCHEMA: &str = "efpf-kit/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// A float as JSON: a number, or one of the strings `inf`, `-inf`, `nan`.
pub fn float(x: f64) -> Value {
    match Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None if x.is_nan() => Value::String("nan".into()),
        None if x > 0.0 => Value::String("inf".into()),
        None => Value::String("-inf".into()),
    }
}

pub fn int(x: u64) -> Value {
    Value::Number(x.into())
}

pub fn ints(xs: &[u64]) -> Value {
    Value::Array(xs.iter().map(|&x| int(x)).collect())
}

/// Scalar fields plus an optional table of rows.
#[derive(Clone, Debug, Default)]
pub struct Report {
    fields: Map<String, Value>,
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
    /// Replaces the generic CSV rendering when set.
    csv_override: Option<String>,
    failure: Option<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut fields = Map::new();
        fields.insert("schema".into(), SCHEMA.into());
        fields.insert("command".into(), command.into());
        Report {
            fields,
            ..Report::default()
        }
    }

    pub fn field(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.insert(key.into(), value.into());
        self
    }

    pub fn columns(&mut self, names: &[&str]) -> &mut Self {
        self.columns = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn row(&mut self, values: Vec<Value>) -> &mut Self {
        assert_eq!(
            values.len(),
            self.columns.len(),
            "row width must match the columns"
        );
        self.rows.push(values);
        self
    }

    pub fn csv_override(&mut self, text: String) -> &mut Self {
        self.csv_override = Some(text);
        self
    }

    pub fn fail(&mut self, msg: String) -> &mut Self {
        self.failure = Some(msg);
        self
    }

    pub fn failure(&self) -> Option<&str> {
        self.failure.as_deref()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => write_json(&self.to_value()),
            Format::Csv => match &self.csv_override {
                Some(text) => text.clone(),
                None => self.to_csv(),
            },
            Format::Table => self.to_table(),
        }
    }

    pub fn to_value(&self) -> Value {
        let mut obj = self.fields.clone();
        if !self.columns.is_empty() {
            let rows = self
                .rows
                .iter()
                .map(|r| {
                    Value::Object(
                        self.columns
                            .iter()
                            .cloned()
                            .zip(r.iter().cloned())
                            .collect(),
                    )
                })
                .collect();
            obj.insert("rows".into(), Value::Array(rows));
        }
        Value::Object(obj)
    }

    fn to_csv(&self) -> String {
        let (header, rows): (Vec<String>, Vec<Vec<Value>>) = if self.columns.is_empty() {
            let mut keys = Vec::new();
            let mut vals = Vec::new();
            for (k, v) in self.fields.iter().filter(|(k, _)| *k != "schema") {
                match v {
                    // nested objects become dotted columns
                    Value::Object(inner) => {
                        for (ik, iv) in inner {
                            keys.push(format!("{k}.{ik}"));
                            vals.push(iv.clone());
                        }
                    }
                    _ => {
                        keys.push(k.clone());
                        vals.push(v.clone());
                    }
                }
            }
            (keys, vec![vals])
        } else {
            (self.columns.clone(), self.rows.clone())
        };
        let mut out = header.join(",");
        out.push('\n');
        for r in rows {
            let cells: Vec<String> = r.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn to_table(&self) -> String {
        let mut out = String::new();
        let width = self.fields.keys().map(|k| k.len()).max().unwrap_or(0);
        for (k, v) in &self.fields {
            writeln!(out, "{k:<width$}  {}", scalar_text(v)).unwrap();
        }
        if !self.columns.is_empty() {
            let cells: Vec<Vec<String>> = self
                .rows
                .iter()
                .map(|r| r.iter().map(scalar_text).collect())
                .collect();
            let widths: Vec<usize> = (0..self.columns.len())
                .map(|c| {
                    cells
                        .iter()
                        .map(|r| r[c].len())
                        .chain(std::iter::once(self.columns[c].len()))
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            out.push('\n');
            let line = |items: Vec<&str>| {
                items
                    .iter()
                    .zip(&widths)
                    .map(|(s, w)| format!("{s:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            writeln!(
                out,
                "{}",
                line(self.columns.iter().map(|s| s.as_str()).collect())
            )
            .unwrap();
            for r in &cells {
                writeln!(out, "{}", line(r.iter().map(|s| s.as_str()).collect())).unwrap();
            }
        }
        out
    }
}

/// Floats with 17 significant digits in exponent form; integers verbatim.
fn number_text(n: &Number) -> String {
    if n.is_f64() {
        format!("{:.16e}", n.as_f64().expect("f64 number"))
    } else {
        n.to_string()
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => number_text(n),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar_text).collect::<Vec<_>>().join(";"),
        Value::Object(_) => write_inline(v),
    }
}

fn csv_cell(v: &Value) -> String {
    let text = scalar_text(v);
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text
    }
}

/// Top-level object one field per line; arrays of objects one element per
/// line; everything else inline.
pub fn write_json(v: &Value) -> String {
    let mut out = String::new();
    match v {
        Value::Object(map) => {
            out.push_str("{\n");
            let last = map.len().saturating_sub(1);
            for (i, (k, val)) in map.iter().enumerate() {
                write!(out, "  {}: ", Value::String(k.clone())).unwrap();
                match val {
                    Value::Array(items) if items.iter().any(Value::is_object) => {
                        out.push_str("[\n");
                        let inner_last = items.len() - 1;
                        for (j, item) in items.iter().enumerate() {
                            out.push_str("    ");
                            out.push_str(&write_inline(item));
                            if j != inner_last {
                                out.push(',');
                            }
                            out.push('\n');
                        }
                        out.push_str("  ]");
                    }
                    _ => out.push_str(&write_inline(val)),
                }
                if i != last {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str("}\n");
        }
        other => {
            out.push_str(&write_inline(other));
            out.push('\n');
        }
    }
    out
}

fn write_inline(v: &Value) -> String {
    match v {
        Value::Number(n) => number_text(n),
        Value::Array(items) => {
            format!(
                "[{}]",
                items
                    .iter()
                    .map(write_inline)
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        }
        Value::Object(map) => format!(
            "{{{}}}",
            map.iter()
                .map(|(k, v)| format!("{}: {}", Value::String(k.clone()), write_inline(v)))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        other => other.to_string(),
    }
}

/// Parses emitted JSON and writes it again; identical bytes for any output
/// of [`write_json`].
pub fn reformat_json(text: &str) -> serde_json::Result<String> {
    Ok(write_json(&serde_json::from_str::<Value>(text)?))
}

/// Parses emitted CSV into cells and writes it again.
pub fn reformat_csv(text: &str) -> String {
    let mut out = String::new();
    for line in text.lines() {
        let cells = split_csv_line(line);
        let rendered: Vec<String> = cells
            .iter()
            .map(|c| {
                if c.contains([',', '"']) {
                    format!("\"{}\"", c.replace('"', "\"\""))
                } else {
                    c.clone()
                }
            })
            .collect();
        out.push_str(&rendered.join(","));
        out.push('\n');
    }
    out
}

fn split_csv_line(line: &str) -> Vec<String> {
    let mut cells = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(ch) = chars.next() {
        match (ch, quoted) {
            ('"', true) if chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            ('"', _) => quoted = !quoted,
            (',', false) => cells.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    cells.push(cur);
    cells
}

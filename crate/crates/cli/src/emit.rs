//! Rendering of result tables as aligned text, CSV or JSON.

use clap::ValueEnum;
use num_complex::Complex64;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Real(f64),
    Complex(Complex64),
    Bool(bool),
    Int(u64),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<Complex64> for Cell {
    fn from(z: Complex64) -> Self {
        Cell::Complex(z)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

/// One titled table. Every row has one cell per column.
#[derive(Debug, Clone, PartialEq)]
pub struct Payload {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Payload {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        Payload {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in `{}`", self.title);
        self.rows.push(row);
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A real with 12 significant digits, trailing zeros dropped; scientific
/// notation outside `1e-4 ≤ |v| < 1e12`.
pub fn fmt_real(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp) as usize, v);
        trim_fraction(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_fraction(mantissa))
    }
}

fn json_real(v: f64) -> Value {
    let rounded: f64 = fmt_real(v).parse().unwrap_or(v);
    serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
}

fn scalar_text(cell: &Cell) -> String {
    match cell {
        Cell::Text(s) => s.clone(),
        Cell::Real(v) => fmt_real(*v),
        Cell::Complex(z) => format!("({}, {})", fmt_real(z.re), fmt_real(z.im)),
        Cell::Bool(b) => b.to_string(),
        Cell::Int(n) => n.to_string(),
    }
}

fn render_table(p: &Payload) -> String {
    let body: Vec<Vec<String>> = p.rows.iter().map(|r| r.iter().map(scalar_text).collect()).collect();
    let widths: Vec<usize> = p
        .columns
        .iter()
        .enumerate()
        .map(|(k, c)| body.iter().map(|r| r[k].chars().count()).chain([c.chars().count()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| -> String {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = format!("{}\n", p.title);
    out += &line(&p.columns);
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out += &line(&rule);
    for r in &body {
        out += &line(r);
    }
    out
}

fn render_csv(p: &Payload) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let complex_cols: Vec<bool> = (0..p.columns.len())
        .map(|k| p.rows.iter().any(|r| matches!(r[k], Cell::Complex(_))))
        .collect();
    let mut header = Vec::new();
    for (name, &is_complex) in p.columns.iter().zip(&complex_cols) {
        if is_complex {
            header.push(format!("{name}_re"));
            header.push(format!("{name}_im"));
        } else {
            header.push(name.clone());
        }
    }
    w.write_record(&header).expect("write to memory");
    for row in &p.rows {
        let mut record = Vec::new();
        for (cell, &is_complex) in row.iter().zip(&complex_cols) {
            match (cell, is_complex) {
                (Cell::Complex(z), _) => {
                    record.push(fmt_real(z.re));
                    record.push(fmt_real(z.im));
                }
                (other, true) => {
                    record.push(scalar_text(other));
                    record.push(String::new());
                }
                (other, false) => record.push(scalar_text(other)),
            }
        }
        w.write_record(&record).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

fn json_cell(cell: &Cell) -> Value {
    match cell {
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Real(v) => json_real(*v),
        Cell::Complex(z) => json!({ "re": json_real(z.re), "im": json_real(z.im) }),
        Cell::Bool(b) => Value::Bool(*b),
        Cell::Int(n) => Value::from(*n),
    }
}

fn json_payload(p: &Payload) -> Value {
    let rows: Vec<Value> = p
        .rows
        .iter()
        .map(|r| {
            let record: Map<String, Value> =
                p.columns.iter().cloned().zip(r.iter().map(json_cell)).collect();
            Value::Object(record)
        })
        .collect();
    json!({ "title": p.title, "rows": rows })
}

/// Renders payloads in order. JSON output is a single object for one
/// payload and an array otherwise; CSV and text separate tables by a blank
/// line.
pub fn emit(format: Format, payloads: &[Payload]) -> String {
    match format {
        Format::Json => {
            let value = match payloads {
                [one] => json_payload(one),
                many => Value::Array(many.iter().map(json_payload).collect()),
            };
            serde_json::to_string_pretty(&value).expect("json values serialize") + "\n"
        }
        Format::Csv | Format::Table => {
            let render = if format == Format::Csv { render_csv } else { render_table };
            payloads.iter().map(render).collect::<Vec<_>>().join("\n")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        let cases = [
            (0.0, "0"),
            (-0.0, "0"),
            (0.0625, "0.0625"),
            (-0.25, "-0.25"),
            (1.0 / 3.0, "0.333333333333"),
            (2.0 / 3.0, "0.666666666667"),
            (-999.0, "-999"),
            (1e-6, "1e-6"),
            (1.0 - 1e6, "-999999"),
            (123456789012345.0, "1.23456789012e14"),
            (0.99999999999999, "1"),
            (1e-5, "1e-5"),
            (1.5e-4, "0.00015"),
            (2.5e-7, "2.5e-7"),
        ];
        for (v, want) in cases {
            assert_eq!(fmt_real(v), want, "{v:e}");
        }
    }

    fn sample() -> Payload {
        let mut p = Payload::new("demo", &["name", "z", "ok"]);
        p.push(vec!["a".into(), Complex64::new(0.25, -1.0).into(), true.into()]);
        p.push(vec!["bb".into(), Complex64::new(1.0 / 3.0, 0.0).into(), false.into()]);
        p
    }

    #[test]
    fn csv_splits_complex_columns() {
        let text = emit(Format::Csv, &[sample()]);
        assert_eq!(text, "name,z_re,z_im,ok\na,0.25,-1,true\nbb,0.333333333333,0,false\n");
    }

    #[test]
    fn json_keeps_column_order() {
        let text = emit(Format::Json, &[sample()]);
        let v: Value = serde_json::from_str(&text).unwrap();
        let row = &v["rows"][0];
        let keys: Vec<&String> = row.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["name", "z", "ok"]);
        assert_eq!(row["z"], json!({"re": 0.25, "im": -1.0}));
        assert_eq!(v["rows"][1]["z"]["re"], json!(0.333333333333));
    }

    #[test]
    fn aligned_table() {
        let text = emit(Format::Table, &[sample()]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "demo");
        assert_eq!(lines[1], "name  z                    ok");
        assert_eq!(lines[3], "a     (0.25, -1)           true");
        assert_eq!(lines[4], "bb    (0.333333333333, 0)  false");
    }
}

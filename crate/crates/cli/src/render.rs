//! Text, JSON and CSV rendering with 12 significant digits.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;

pub const SCHEMA: &str = "btl/1";
pub const CSV_HEADER: [&str; 8] = ["family", "param", "fb", "gft", "profit", "ratio", "guaranteed", "passes"];

pub fn sig12(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.11e}").parse().expect("formatted float parses")
    } else {
        x
    }
}

pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = sig12(x);
    if r != 0.0 && (r.abs() < 1e-6 || r.abs() >= 1e15) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = sig12(n.as_f64().unwrap_or(f64::NAN));
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(xs) => xs.iter_mut().for_each(round_json),
        Value::Object(m) => m.values_mut().for_each(round_json),
        _ => {}
    }
}

/// One CSV line in the shared header layout.
#[derive(Debug, Clone, Default)]
pub struct Row {
    pub family: String,
    pub param: Option<f64>,
    pub fb: f64,
    pub gft: f64,
    pub profit: Option<f64>,
    pub ratio: f64,
    pub guaranteed: Option<f64>,
    pub passes: Option<bool>,
}

impl Row {
    fn cells(&self) -> [String; 8] {
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        [
            self.family.clone(),
            opt(self.param),
            num(self.fb),
            num(self.gft),
            opt(self.profit),
            num(self.ratio),
            opt(self.guaranteed),
            self.passes.map(|p| p.to_string()).unwrap_or_default(),
        ]
    }
}

pub struct Report {
    pub command: &'static str,
    pub body: Map<String, Value>,
    pub rows: Vec<Row>,
    /// Render the table as columns of `rows` rather than key/value pairs.
    pub tabular: bool,
    /// False when an asserted bound failed.
    pub passed: bool,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report { command, body: Map::new(), rows: Vec::new(), tabular: false, passed: true }
    }

    pub fn set(&mut self, key: &str, v: impl Serialize) {
        self.body.insert(key.into(), serde_json::to_value(v).expect("report values serialize"));
    }

    /// Merges the fields of a serializable struct into the body.
    pub fn merge(&mut self, v: impl Serialize) {
        if let Value::Object(m) = serde_json::to_value(v).expect("report values serialize") {
            self.body.extend(m);
        }
    }

    pub fn render(&self, fmt: Format) -> String {
        match fmt {
            Format::Json => self.json(),
            Format::Csv => self.csv(),
            Format::Table => self.table(),
        }
    }

    fn json(&self) -> String {
        let mut m = Map::new();
        m.insert("schema".into(), SCHEMA.into());
        m.insert("command".into(), self.command.into());
        m.extend(self.body.clone());
        let mut v = Value::Object(m);
        round_json(&mut v);
        let mut s = serde_json::to_string_pretty(&v).expect("json renders");
        s.push('\n');
        s
    }

    fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.cells()).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    fn table(&self) -> String {
        if self.tabular {
            let mut lines: Vec<[String; 8]> = vec![CSV_HEADER.map(String::from)];
            lines.extend(self.rows.iter().map(Row::cells));
            let widths: Vec<usize> = (0..8).map(|j| lines.iter().map(|l| l[j].len()).max().unwrap_or(0)).collect();
            let mut out = String::new();
            for l in &lines {
                let cells: Vec<String> = l.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                out.push_str(cells.join("  ").trim_end());
                out.push('\n');
            }
            for (k, v) in &self.body {
                if !v.is_array() {
                    out.push_str(&format!("{k}: {}\n", scalar(v)));
                }
            }
            return out;
        }
        let mut flat = Vec::new();
        flatten("", &Value::Object(self.body.clone()), &mut flat);
        let w = flat.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        flat.iter().map(|(k, v)| format!("{k:<w$}  {v}\n")).collect()
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Number(n) => n.as_f64().map(num).unwrap_or_else(|| n.to_string()),
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(1.0 / 12.0), "0.0833333333333");
        assert_eq!(num(1.0 / 6.0), "0.166666666667");
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(2.0 / 3.0 * 1e-9), "6.66666666667e-10");
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_header_is_fixed() {
        let mut r = Report::new("x");
        r.rows.push(Row { family: "general".into(), param: Some(10.0), passes: Some(true), ..Row::default() });
        let s = r.render(Format::Csv);
        assert_eq!(s.lines().next().unwrap(), "family,param,fb,gft,profit,ratio,guaranteed,passes");
        assert_eq!(s.lines().nth(1).unwrap(), "general,10,0,0,,0,,true");
    }

    #[test]
    fn json_rounds_nested_numbers() {
        let mut r = Report::new("x");
        r.set("v", vec![1.0 / 3.0]);
        r.set("n", 7u64);
        let s = r.render(Format::Json);
        assert!(s.contains("0.333333333333") && !s.contains("0.3333333333333"), "{s}");
        assert!(s.contains("\"n\": 7") && s.contains("\"schema\": \"btl/1\""));
    }
}

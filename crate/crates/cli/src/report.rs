//! Reports: `key: value` lines followed by tables, or the same data as JSON.

use crsf::C64;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Complex(C64),
    Text(String),
    Reals(Vec<f64>),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<C64> for Cell {
    fn from(v: C64) -> Self {
        Cell::Complex(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Vec<f64>> for Cell {
    fn from(v: Vec<f64>) -> Self {
        Cell::Reals(v)
    }
}

/// Twelve significant digits, fixed layout.
pub fn real(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0.00000000000e0"
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

pub fn complex(z: C64) -> String {
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    let sign = if im.is_sign_negative() { "-" } else { "+" };
    format!("{}{sign}{}i", real(z.re), real(im.abs()))
}

/// The value that `real` prints, as a JSON number.
fn rounded(x: f64) -> Value {
    real(x)
        .parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map_or(Value::Null, Value::Number)
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => real(*v),
            Cell::Complex(z) => complex(*z),
            Cell::Text(s) => s.clone(),
            Cell::Reals(v) => v.iter().map(|x| real(*x)).collect::<Vec<_>>().join(" "),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Real(v) => rounded(*v),
            Cell::Complex(z) => json!({ "re": rounded(z.re), "im": rounded(z.im) }),
            Cell::Text(s) => json!(s),
            Cell::Reals(v) => Value::Array(v.iter().map(|x| rounded(*x)).collect()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    name: String,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    fields: Vec<(String, Cell)>,
    tables: Vec<Table>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut r = Report::default();
        r.set("command", command);
        r
    }

    pub fn set(&mut self, key: &str, value: impl Into<Cell>) {
        self.fields.push((key.to_string(), value.into()));
    }

    pub fn table(&mut self, t: Table) {
        self.tables.push(t);
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.fields {
            out.push_str(&format!("{k}: {}\n", v.text()));
        }
        for t in &self.tables {
            out.push_str(&format!("\n[{}]\n{}\n", t.name, t.columns.join("\t")));
            for row in &t.rows {
                out.push_str(&row.iter().map(Cell::text).collect::<Vec<_>>().join("\t"));
                out.push('\n');
            }
        }
        out
    }

    pub fn json(&self) -> String {
        let mut obj = Map::new();
        for (k, v) in &self.fields {
            obj.insert(k.clone(), v.json());
        }
        for t in &self.tables {
            let rows = t
                .rows
                .iter()
                .map(|row| {
                    let mut r = Map::new();
                    for (c, v) in t.columns.iter().zip(row) {
                        r.insert(c.clone(), v.json());
                    }
                    Value::Object(r)
                })
                .collect();
            obj.insert(t.name.clone(), Value::Array(rows));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(real(0.951234567891234), "9.51234567891e-1");
        assert_eq!(real(-0.0), "0.00000000000e0");
        assert_eq!(
            complex(C64::new(1.0, -2.5)),
            "1.00000000000e0-2.50000000000e0i"
        );
    }

    #[test]
    fn text_and_json_carry_the_same_fields() {
        let mut r = Report::new("demo");
        r.set("value", 0.25);
        let mut t = Table::new("rows", &["i", "x"]);
        t.row(vec![1usize.into(), 0.5.into()]);
        r.table(t);
        assert_eq!(
            r.text(),
            "command: demo\nvalue: 2.50000000000e-1\n\n[rows]\ni\tx\n1\t5.00000000000e-1\n"
        );
        let v: Value = serde_json::from_str(&r.json()).unwrap();
        assert_eq!(v["value"], json!(0.25));
        assert_eq!(v["rows"][0]["x"], json!(0.5));
    }
}

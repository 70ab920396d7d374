//! Result tables and their CSV/JSON renderings.

use std::io::Write;

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    /// Floats use 17 significant digits so values round-trip exactly.
    fn csv_field(&self) -> String {
        match self {
            Cell::Num(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(x.to_string()),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

pub fn format_float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    format!("{x:.16e}")
}

#[derive(Debug, Clone)]
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Scalars that belong to the whole run (JSON only).
    pub meta: Map<String, Value>,
}

impl Table {
    pub fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Table { command, columns: columns.to_vec(), rows: Vec::new(), meta: Map::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_field))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self, config: Map<String, Value>) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(r) {
                    m.insert((*c).to_string(), v.json());
                }
                Value::Object(m)
            })
            .collect();
        let mut top = Map::new();
        top.insert("schema".into(), json!(crate::SCHEMA_VERSION));
        top.insert("command".into(), json!(self.command));
        top.insert("config".into(), Value::Object(config));
        top.insert("columns".into(), json!(self.columns));
        top.insert("rows".into(), Value::Array(rows));
        if !self.meta.is_empty() {
            top.insert("meta".into(), Value::Object(self.meta.clone()));
        }
        Value::Object(top)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = format_float(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        assert_eq!(format_float(0.0), "0");
    }

    #[test]
    fn csv_quotes_text_with_commas() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push(vec![Cell::from("p,q"), Cell::from(1.5)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n\"p,q\",1.5000000000000000e0\n");
    }

    #[test]
    fn json_keeps_column_order() {
        let mut t = Table::new("x", &["z", "a"]);
        t.push(vec![Cell::from(1.0), Cell::from(2.0)]);
        let v = t.to_json(Map::new());
        let text = serde_json::to_string(&v["rows"][0]).unwrap();
        assert_eq!(text, r#"{"z":1.0,"a":2.0}"#);
    }
}

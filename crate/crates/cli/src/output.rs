use std::fmt::Write as _;

use serde_json::{Map, Number, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Trailing `name = value` records (CSV `#` lines, JSON `footer` object).
    pub footer: Vec<(String, f64)>,
}

/// 17 significant digits, plain ASCII, no locale.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn json_number(v: f64) -> Value {
    Number::from_f64(v).map_or(Value::Null, Value::Number)
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(
            &self
                .columns
                .iter()
                .map(|c| csv_field(c))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => format_number(*v),
                    Cell::Text(s) => csv_field(s),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for (k, v) in &self.footer {
            let _ = writeln!(out, "# {k}={}", format_number(*v));
        }
        out
    }

    fn row_objects(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    let v = match cell {
                        Cell::Num(v) => json_number(*v),
                        Cell::Text(s) => Value::String(s.clone()),
                        Cell::Empty => Value::Null,
                    };
                    obj.insert(name.clone(), v);
                }
                Value::Object(obj)
            })
            .collect()
    }

    /// An array of row objects, or `{rows, footer}` when a footer exists.
    pub fn to_json(&self) -> String {
        let rows = Value::Array(self.row_objects());
        let doc = if self.footer.is_empty() {
            rows
        } else {
            let mut footer = Map::new();
            for (k, v) in &self.footer {
                footer.insert(k.clone(), json_number(*v));
            }
            let mut obj = Map::new();
            obj.insert("rows".into(), rows);
            obj.insert("footer".into(), Value::Object(footer));
            Value::Object(obj)
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("table serialises");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        Table {
            columns: vec!["x".into(), "err".into()],
            rows: vec![
                vec![Cell::Num(0.1), Cell::Empty],
                vec![Cell::Num(-1234567.5), Cell::Text("bad, \"quoted\"".into())],
            ],
            footer: vec![("x_balance".into(), 0.25)],
        }
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,err");
        assert_eq!(lines[1], "1.0000000000000001e-1,");
        assert_eq!(lines[2], "-1.2345675000000000e6,\"bad, \"\"quoted\"\"\"");
        assert_eq!(lines[3], "# x_balance=2.5000000000000000e-1");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300] {
            assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn json_rows_share_column_names() {
        let v: Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v["rows"][1]["err"], "bad, \"quoted\"");
        assert!(v["rows"][0]["err"].is_null());
        assert_eq!(v["footer"]["x_balance"], 0.25);
        let plain = Table {
            footer: vec![],
            ..sample()
        };
        let v: Value = serde_json::from_str(&plain.to_json()).unwrap();
        assert!(v.is_array());
    }
}

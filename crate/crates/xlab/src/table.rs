//! CSV rendering. Floats are written with 17 significant digits so that the
//! text round-trips to the same `f64`.

use serde::Serialize;

use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(x) => x.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Bool(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_owned())
    }
}

/// Named cells of one result row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row(pub Vec<(&'static str, Cell)>);

impl Row {
    pub fn push(&mut self, name: &'static str, value: impl Into<Cell>) -> &mut Self {
        self.0.push((name, value.into()));
        self
    }

    pub fn get(&self, name: &str) -> Option<&Cell> {
        self.0.iter().find(|(n, _)| *n == name).map(|(_, c)| c)
    }

    /// Cells in `columns` order; missing columns render empty.
    pub fn render(&self, columns: &[&str]) -> Vec<String> {
        columns
            .iter()
            .map(|c| self.get(c).map(Cell::render).unwrap_or_default())
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.0
                .iter()
                .map(|(n, c)| {
                    (
                        (*n).to_owned(),
                        serde_json::to_value(c).expect("cells serialize"),
                    )
                })
                .collect(),
        )
    }
}

pub fn write_csv(columns: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(columns)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| crate::error::usage(format!("csv buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

//! CSV tables whose header names the producing operation and every column's source.

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
    /// Operation that produced the column.
    pub source: &'static str,
}

pub fn col(name: &'static str, unit: &'static str, source: &'static str) -> Column {
    Column { name, unit, source }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Num(f64),
    Flag(bool),
    Missing,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => x.to_string(),
            Cell::Flag(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Flag(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }
}

#[derive(Clone, Debug)]
pub struct ResultTable {
    pub name: String,
    pub operation: &'static str,
    pub description: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    /// Row count implied by the requested grid.
    pub expected_rows: usize,
}

impl ResultTable {
    pub fn new(name: &str, operation: &'static str, description: impl Into<String>, columns: Vec<Column>, expected_rows: usize) -> Self {
        Self { name: name.into(), operation, description: description.into(), columns, rows: Vec::new(), expected_rows }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let j = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| &r[j]).collect())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, String> {
        if self.rows.len() != self.expected_rows {
            return Err(format!("table {} has {} rows, the requested grid implies {}", self.name, self.rows.len(), self.expected_rows));
        }
        let mut out = Vec::new();
        out.extend(format!("# operation: {}\n# {}\n", self.operation, self.description).as_bytes());
        for c in &self.columns {
            let unit = if c.unit.is_empty() { String::new() } else { format!(" [{}]", c.unit) };
            out.extend(format!("# column {}{unit}: {}\n", c.name, c.source).as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| e.to_string();
        w.write_record(self.columns.iter().map(|c| c.name)).map_err(err)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).map_err(err)?;
        }
        w.into_inner().map_err(|e| e.to_string())
    }
}

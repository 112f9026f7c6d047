//! Deterministic tabular output in CSV or JSON.

use anyhow::Result;

use crate::config::OutputFormat;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Empty,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.render_csv(),
            OutputFormat::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(render_cell_csv).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(row.iter())
                    .map(|(name, cell)| (name.to_string(), render_cell_json(cell)))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&rows).expect("JSON rendering cannot fail");
        text.push('\n');
        text
    }

    pub fn write(&self, path: &std::path::Path, format: OutputFormat) -> Result<usize> {
        let text = self.render(format);
        std::fs::write(path, &text)?;
        Ok(text.len())
    }
}

/// 17 significant digits, `.` decimal separator, locale independent.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn render_cell_csv(cell: &Cell) -> String {
    match cell {
        Cell::Num(v) => fmt_float(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Bool(v) => v.to_string(),
        Cell::Empty => String::new(),
    }
}

fn render_cell_json(cell: &Cell) -> serde_json::Value {
    match cell {
        // keep the fixed textual float form so both formats are deterministic
        // and carry the full 17 significant digits
        Cell::Num(v) => serde_json::Value::String(fmt_float(*v)),
        Cell::Int(v) => serde_json::Value::from(*v),
        Cell::Bool(v) => serde_json::Value::from(*v),
        Cell::Empty => serde_json::Value::Null,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_fixed_width_significand() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(-0.125), "-1.2500000000000000e-1");
        assert_eq!(fmt_float(std::f64::consts::PI), "3.1415926535897931e0");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(vec!["a", "b", "c"]);
        t.push(vec![Cell::Num(2.0), Cell::Empty, Cell::Bool(true)]);
        assert_eq!(
            t.render(OutputFormat::Csv),
            "a,b,c\n2.0000000000000000e0,,true\n"
        );
    }
}

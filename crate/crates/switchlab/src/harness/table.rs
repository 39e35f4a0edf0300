//! Result tables: declared column schema, typed cells, a `#`-commented
//! metadata header carrying the config echo, and RFC-4180-style CSV output.
//!
//! Table bodies are byte-identical for identical `(config, seed)`.

use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    UInt(u64),
    Float(f64),
    Text(String),
    Bool(bool),
    /// An intentionally empty field, e.g. a rate in an empty bin.
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::UInt(v) => v.to_string(),
            // Default f64 formatting is the shortest round-trip form with a
            // `.` decimal separator: deterministic and lossless.
            Cell::Float(v) => format!("{v}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Cell {
        Cell::Float(v)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Cell {
        Cell::UInt(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Cell {
        Cell::UInt(v as u64)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Cell {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Cell {
        Cell::Text(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Cell {
        Cell::Bool(v)
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Cell {
        v.map(Into::into).unwrap_or(Cell::Empty)
    }
}

fn csv_quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Metadata lines, emitted as leading `# ` comments (config echo,
    /// seed, version tag).
    pub metadata: Vec<String>,
}

impl ResultTable {
    pub fn new(name: &str, columns: &[&str]) -> ResultTable {
        ResultTable {
            name: name.to_string(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row does not match the schema");
        self.rows.push(row);
    }

    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        for line in &self.metadata {
            writeln!(w, "# {line}")?;
        }
        writeln!(
            w,
            "{}",
            self.columns.iter().map(|c| csv_quote(c)).collect::<Vec<_>>().join(",")
        )?;
        for row in &self.rows {
            writeln!(
                w,
                "{}",
                row.iter().map(|c| csv_quote(&c.render())).collect::<Vec<_>>().join(",")
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("tables are valid UTF-8")
    }

    /// Parse the `# key = value` metadata header back out of a CSV dump.
    pub fn parse_metadata(csv: &str) -> Vec<String> {
        csv.lines()
            .take_while(|l| l.starts_with('#'))
            .map(|l| l.trim_start_matches('#').trim().to_string())
            .collect()
    }
}

/// Binomial standard deviation of an empirical rate.
pub fn binomial_sigma(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    let p = successes as f64 / trials as f64;
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_format_and_quoting() {
        let mut t = ResultTable::new("demo", &["a", "b,comma", "c"]);
        t.metadata.push("seed = 3".into());
        t.push(vec![Cell::UInt(1), Cell::Text("x\"y".into()), Cell::Empty]);
        t.push(vec![Cell::Float(0.125), Cell::Text("plain".into()), Cell::Float(1e-9)]);
        let csv = t.to_csv_string();
        let expected = "# seed = 3\na,\"b,comma\",c\n1,\"x\"\"y\",\n0.125,plain,0.000000001\n";
        assert_eq!(csv, expected);
        assert_eq!(ResultTable::parse_metadata(&csv), vec!["seed = 3".to_string()]);
    }

    #[test]
    fn deterministic_rendering() {
        let mk = || {
            let mut t = ResultTable::new("d", &["x"]);
            t.push(vec![Cell::Float(1.0 / 3.0)]);
            t.to_csv_string()
        };
        assert_eq!(mk(), mk());
    }

    #[test]
    fn sigma_formula() {
        assert_eq!(binomial_sigma(0, 100), 0.0);
        let s = binomial_sigma(50, 100);
        assert!((s - 0.05).abs() < 1e-12);
    }
}

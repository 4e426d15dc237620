//! The small CSV dialect shared by every command: `# key=value` metadata
//! lines, one column-name line, then numeric rows. Empty cells are allowed.

use std::fmt::Write as _;

use crate::error::CliError;

/// Metadata key whose line changes from run to run.
pub const TIMESTAMP_KEY: &str = "generated_unix";

/// Shortest round-trip decimal inside [1e-3, 1e6), scientific outside.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if (1e-3..1e6).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvDocument {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl CsvDocument {
    pub fn new(columns: &[&str]) -> Self {
        CsvDocument {
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.metadata.push((key.into(), value.into()));
    }

    pub fn push_row(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.map(format_number).unwrap_or_default())
                .collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut doc = CsvDocument::default();
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut header = None;
        for (n, line) in lines.by_ref() {
            match line.strip_prefix('#') {
                Some(comment) => {
                    if let Some((k, v)) = comment.trim().split_once('=') {
                        doc.metadata.push((k.trim().to_string(), v.trim().to_string()));
                    }
                }
                None => {
                    header = Some((n, line));
                    break;
                }
            }
        }
        let (_, header) = header.ok_or_else(|| CliError::usage("CSV has no column-name line"))?;
        doc.columns = header.split(',').map(|c| c.trim().to_string()).collect();
        for (n, line) in lines {
            if line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|cell| {
                    let cell = cell.trim();
                    if cell.is_empty() {
                        Ok(None)
                    } else {
                        cell.parse::<f64>().map(Some).map_err(|_| {
                            CliError::usage(format!("line {}: '{cell}' is not a number", n + 1))
                        })
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != doc.columns.len() {
                return Err(CliError::usage(format!(
                    "line {}: expected {} cells, found {}",
                    n + 1,
                    doc.columns.len(),
                    row.len()
                )));
            }
            doc.rows.push(row);
        }
        Ok(doc)
    }
}

/// `text` without its timestamp metadata line, for run-to-run comparison.
pub fn without_timestamp(text: &str) -> String {
    let prefix = format!("# {TIMESTAMP_KEY}=");
    text.lines()
        .filter(|l| !l.starts_with(&prefix))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_switches_at_the_window_edges() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(1e-3), "0.001");
        assert_eq!(format_number(9.99e-4), "9.99e-4");
        assert_eq!(format_number(999999.5), "999999.5");
        assert_eq!(format_number(1e6), "1e6");
        assert_eq!(format_number(-2e12), "-2e12");
        assert_eq!(format_number(1e-12), "1e-12");
    }

    #[test]
    fn round_trip_preserves_values() {
        let mut doc = CsvDocument::new(&["a", "b"]);
        doc.meta("tool", "x");
        let vals = [0.1 + 0.2, -1.234567890123e-14, 3.0e15, 7.0, f64::MIN_POSITIVE];
        for &v in &vals {
            doc.push_row(vec![Some(v), None]);
        }
        let back = CsvDocument::parse(&doc.render()).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn malformed_rows_are_rejected() {
        assert!(CsvDocument::parse("a,b\n1,2,3\n").is_err());
        assert!(CsvDocument::parse("a,b\n1,x\n").is_err());
        assert!(CsvDocument::parse("# only=comments\n").is_err());
    }

    #[test]
    fn timestamp_line_is_dropped() {
        let text = "# tool=x\n# generated_unix=17\na\n1\n";
        assert_eq!(without_timestamp(text), "# tool=x\na\n1\n");
    }
}

//! Deterministic report rendering: ordered key-value scalars plus an
//! optional table, rendered as text, JSON (key order = insertion order),
//! or CSV (stable header order, `\n` line endings). Identical inputs give
//! byte-identical output.

use std::fmt::Display;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "text" => Some(Format::Text),
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Table {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    scalars: Vec<(String, String)>,
    table: Option<Table>,
    blob: Option<String>,
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.scalars.push((key.to_string(), value.to_string()));
    }

    pub fn set_table(&mut self, table: Table) {
        self.table = Some(table);
    }

    /// Free-form payload (partition stanzas, DOT, copy listings); rendered
    /// after the table in text mode, as a "payload" string in JSON, and
    /// omitted from CSV.
    pub fn set_blob(&mut self, blob: String) {
        self.blob = Some(blob);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.render_text(),
            Format::Json => self.render_json(),
            Format::Csv => self.render_csv(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.scalars {
            let _ = writeln!(out, "{}: {}", k, v);
        }
        if let Some(table) = &self.table {
            let _ = writeln!(out, "{}", table.header.join(","));
            for row in &table.rows {
                let _ = writeln!(out, "{}", row.join(","));
            }
        }
        if let Some(blob) = &self.blob {
            out.push_str(blob);
            if !blob.ends_with('\n') {
                out.push('\n');
            }
        }
        out
    }

    fn render_json(&self) -> String {
        let mut out = String::from("{");
        let mut first = true;
        for (k, v) in &self.scalars {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{}:{}", json_string(k), json_string(v));
        }
        if let Some(table) = &self.table {
            if !first {
                out.push(',');
            }
            out.push_str("\"header\":[");
            for (i, h) in table.header.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&json_string(h));
            }
            out.push_str("],\"rows\":[");
            for (i, row) in table.rows.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('[');
                for (j, cell) in row.iter().enumerate() {
                    if j > 0 {
                        out.push(',');
                    }
                    out.push_str(&json_string(cell));
                }
                out.push(']');
            }
            out.push(']');
        }
        if let Some(blob) = &self.blob {
            if !first || self.table.is_some() {
                out.push(',');
            }
            let _ = write!(out, "\"payload\":{}", json_string(blob));
        }
        out.push_str("}\n");
        out
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        match &self.table {
            Some(table) => {
                let _ = writeln!(out, "{}", table.header.join(","));
                for row in &table.rows {
                    let _ = writeln!(out, "{}", row.join(","));
                }
            }
            None => {
                let _ = writeln!(out, "key,value");
                for (k, v) in &self.scalars {
                    let _ = writeln!(out, "{},{}", k, v);
                }
            }
        }
        out
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

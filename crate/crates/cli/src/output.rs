//! Data tables, the output directory, and SVG line plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;
use crate::error::{CliError, Result};

/// Version of every table schema written by this release.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => v.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(v) => {
                serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, Into::into)
            }
            Cell::Int(v) => (*v).into(),
            Cell::Bool(v) => (*v).into(),
            Cell::Text(v) => v.clone().into(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Header line, which doubles as the schema name.
    pub fn schema(&self) -> String {
        self.columns.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.schema();
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| serde_json::Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let doc = serde_json::json!({
            "schema": self.schema(),
            "schema_version": SCHEMA_VERSION,
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }

    /// `(x, y)` pairs from two numeric columns.
    pub fn series(&self, x: usize, y: usize) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| match (&r[x], &r[y]) {
                (Cell::Num(a), Cell::Num(b)) => Some((*a, *b)),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub schema: String,
    pub schema_version: u32,
    pub rows: Option<usize>,
}

/// Files written by one run; [`Outputs::discard`] removes them again.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    format: Format,
    created_dir: bool,
    written: Vec<PathBuf>,
    entries: Vec<FileEntry>,
}

impl Outputs {
    pub fn create(dir: &Path, format: Format) -> Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            created_dir,
            written: Vec::new(),
            entries: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write_raw(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        self.written.push(path.clone());
        fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
    }

    /// Writes `stem.csv` or `stem.json` according to the run format.
    pub fn table(&mut self, stem: &str, table: &Table) -> Result<()> {
        let (name, body) = match self.format {
            Format::Csv => (format!("{stem}.csv"), table.to_csv()),
            Format::Json => (format!("{stem}.json"), table.to_json()),
        };
        self.write_raw(&name, &body)?;
        self.entries.push(FileEntry {
            path: name,
            schema: table.schema(),
            schema_version: SCHEMA_VERSION,
            rows: Some(table.rows.len()),
        });
        Ok(())
    }

    /// Writes a non-tabular file under the given schema label.
    pub fn document(&mut self, name: &str, schema: &str, contents: &str) -> Result<()> {
        self.write_raw(name, contents)?;
        self.entries.push(FileEntry {
            path: name.to_string(),
            schema: schema.to_string(),
            schema_version: SCHEMA_VERSION,
            rows: None,
        });
        Ok(())
    }

    pub fn entries(&self) -> &[FileEntry] {
        &self.entries
    }

    /// Writes the report last; it is not listed in its own manifest.
    pub fn finish(&mut self, report_json: &str) -> Result<PathBuf> {
        self.write_raw("report.json", report_json)?;
        Ok(self.dir.join("report.json"))
    }

    /// Removes everything this run wrote.
    pub fn discard(self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

fn nice(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-3 && v.abs() < 1e4) {
        format!("{}", (v * 1e4).round() / 1e4)
    } else {
        format!("{v:.2e}")
    }
}

/// A self-contained SVG line plot of one or more series.
pub fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(&str, Vec<(f64, f64)>)],
) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const L: f64 = 70.0;
    const R: f64 = 20.0;
    const T: f64 = 40.0;
    const B: f64 = 50.0;
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

    let pts = series
        .iter()
        .flat_map(|s| s.1.iter())
        .filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    y0 = y0.min(0.0);
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| L + (x - x0) / (x1 - x0) * (W - L - R);
    let sy = |y: f64| H - B - (y - y0) / (y1 - y0) * (H - T - B);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#,
        W / 2.0
    );
    let _ = writeln!(
        s,
        r#"<rect x="{L}" y="{T}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - L - R,
        H - T - B
    );
    for (v, anchor_x) in [(x0, sx(x0)), (x1, sx(x1))] {
        let _ = writeln!(
            s,
            r#"<text x="{anchor_x}" y="{}" text-anchor="middle">{}</text>"#,
            H - B + 16.0,
            nice(v)
        );
    }
    for (v, anchor_y) in [(y0, sy(y0)), (y1, sy(y1))] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            L - 6.0,
            anchor_y + 4.0,
            nice(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        (L + W - R) / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{y_label}</text>"#,
        (T + H - B) / 2.0,
        (T + H - B) / 2.0
    );
    for (i, (name, data)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = data
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}" text-anchor="end">{name}</text>"#,
            W - R - 6.0,
            T + 16.0 + 14.0 * i as f64
        );
    }
    s.push_str("</svg>\n");
    s
}

//! CSV tables and their JSON metadata sidecars, written atomically.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use tempfile::NamedTempFile;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Flag(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_f64(*x),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    data_file: String,
    config: &'a RunConfig,
    summary: &'a Value,
    generated_unix: u64,
}

/// Writes `<stem>.csv` and `<stem>.json` into the configured output
/// directory. Both go to temporary files first so a failed run leaves
/// nothing behind.
pub fn write_outputs(
    cfg: &RunConfig,
    command: &str,
    stem: &str,
    table: &Table,
    summary: &Value,
) -> Result<PathBuf, CliError> {
    let dir = cfg.out_dir.as_path();
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));

    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed: cfg.seed,
        data_file: format!("{stem}.csv"),
        config: cfg,
        summary,
        generated_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    let mut json = serde_json::to_vec_pretty(&meta)?;
    json.push(b'\n');

    let csv_tmp = staged(dir, &table.to_csv()?)?;
    let json_tmp = staged(dir, &json)?;
    csv_tmp
        .persist(&csv_path)
        .map_err(|e| CliError::Io(e.error))?;
    json_tmp
        .persist(&json_path)
        .map_err(|e| CliError::Io(e.error))?;
    Ok(csv_path)
}

fn staged(dir: &Path, bytes: &[u8]) -> Result<NamedTempFile, CliError> {
    let mut f = NamedTempFile::new_in(dir)?;
    f.write_all(bytes)?;
    f.as_file().sync_all()?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_f64(1.0), "1.0000000000000000e0");
        assert_eq!(format_f64(f64::NAN), "NaN");
    }

    #[test]
    fn csv_quotes_and_terminates() {
        let mut t = Table::new(&["name", "x"]);
        t.push(vec!["a,b".into(), 2.0.into()]);
        assert_eq!(
            String::from_utf8(t.to_csv().unwrap()).unwrap(),
            "name,x\r\n\"a,b\",2.0000000000000000e0\r\n"
        );
    }

    #[test]
    fn writes_both_files_and_no_leftovers() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            out_dir: dir.path().to_path_buf(),
            ..RunConfig::default()
        };
        let mut t = Table::new(&["x"]);
        t.push(vec![1.5.into()]);
        write_outputs(&cfg, "test", "out", &t, &serde_json::json!({"ok": true})).unwrap();
        let mut names: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert_eq!(names, ["out.csv", "out.json"]);
        let meta: Value =
            serde_json::from_slice(&fs::read(dir.path().join("out.json")).unwrap()).unwrap();
        assert_eq!(meta["command"], "test");
        assert_eq!(meta["summary"]["ok"], true);
    }
}

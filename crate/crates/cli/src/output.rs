use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::args::{Format, OutputArgs};
use crate::error::CliError;

/// Writes into the `--out` directory, creating it on first use.
pub struct Sink {
    dir: PathBuf,
    pub format: Format,
}

impl Sink {
    pub fn new(args: &OutputArgs) -> Self {
        Sink {
            dir: args.out.clone(),
            format: args.format,
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path(name);
        fs::write(&path, contents)?;
        Ok(path)
    }

    pub fn write_json(&self, name: &str, value: &impl Serialize) -> Result<PathBuf, CliError> {
        let text = serde_json::to_string_pretty(value).expect("report serializes");
        self.write(name, &(text + "\n"))
    }

    /// Rows as `<stem>.csv` with a `<stem>.meta.json` sidecar, or everything
    /// in `<stem>.json` under `--format json`.
    pub fn table(
        &self,
        stem: &str,
        header: &[&str],
        rows: &[Vec<Cell>],
        meta: serde_json::Value,
    ) -> Result<Vec<PathBuf>, CliError> {
        match self.format {
            Format::Csv => {
                let mut text = header.join(",");
                text.push('\n');
                for row in rows {
                    let cells: Vec<String> = row.iter().map(Cell::to_csv).collect();
                    text.push_str(&cells.join(","));
                    text.push('\n');
                }
                Ok(vec![
                    self.write(&format!("{stem}.csv"), &text)?,
                    self.write_json(&format!("{stem}.meta.json"), &meta)?,
                ])
            }
            Format::Json => {
                let columns: serde_json::Map<String, serde_json::Value> = header
                    .iter()
                    .enumerate()
                    .map(|(k, name)| {
                        let column: Vec<serde_json::Value> = rows.iter().map(|r| r[k].to_json()).collect();
                        (name.to_string(), column.into())
                    })
                    .collect();
                let doc = serde_json::json!({ "meta": meta, "columns": columns });
                Ok(vec![self.write_json(&format!("{stem}.json"), &doc)?])
            }
        }
    }
}

/// One table entry; `Missing` marks excluded nodes.
#[derive(Clone, Debug)]
pub enum Cell {
    Num(f64),
    Text(String),
    Missing,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Missing, Cell::Num)
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:e}"),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::Num(v) if v.is_finite() => (*v).into(),
            Cell::Text(s) => s.clone().into(),
            _ => serde_json::Value::Null,
        }
    }
}

pub fn announce(paths: &[PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", display(p));
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value as Json};

use crate::Format;

/// Exit 2 for bad input, 1 for numerical failure.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numeric(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numeric(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<reeb_spectra::Error> for Failure {
    fn from(e: reeb_spectra::Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

pub struct Series {
    pub name: String,
    pub x: &'static str,
    pub y: &'static str,
    pub points: Vec<(f64, f64)>,
}

pub struct Report {
    pub command: &'static str,
    pub json: Json,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub series: Vec<Series>,
}

/// Metadata block attached to every JSON document.
pub fn meta(command: &str, exact: bool, tolerances: Json) -> Json {
    json!({
        "tool": "reeb-spectra",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "arithmetic": if exact { "exact" } else { "float" },
        "tolerances": tolerances,
    })
}

impl Report {
    pub fn emit(self, format: Format, plot_dir: &Path) -> Result<(), Failure> {
        let stdout = std::io::stdout();
        match format {
            Format::Json => {
                let mut lock = stdout.lock();
                serde_json::to_writer_pretty(&mut lock, &self.json).map_err(|e| Failure::Numeric(e.to_string()))?;
                writeln!(lock)?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(stdout.lock());
                w.write_record(&self.header).map_err(csv_err)?;
                for r in &self.rows {
                    w.write_record(r).map_err(csv_err)?;
                }
                w.flush()?;
            }
            Format::Plot => {
                std::fs::create_dir_all(plot_dir)?;
                let mut files = Vec::new();
                for s in &self.series {
                    let path = plot_dir.join(format!("{}_{}.csv", self.command, s.name));
                    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
                    w.write_record([s.x, s.y]).map_err(csv_err)?;
                    for (x, y) in &s.points {
                        w.write_record([x.to_string(), y.to_string()]).map_err(csv_err)?;
                    }
                    w.flush()?;
                    files.push(path.display().to_string());
                }
                println!("{}", json!({ "files": files }));
            }
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Failure {
    Failure::Input(e.to_string())
}

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Provenance written at the top of every CSV.
#[derive(Debug, Clone)]
pub struct Metadata {
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl Metadata {
    pub fn new(command: &str, config_text: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            config_sha256: hex::encode(Sha256::digest(config_text.as_bytes())),
            seed,
        }
    }
}

/// A CSV table built in memory and written in one go.
pub struct Table {
    name: String,
    extra: Vec<String>,
    header: Vec<String>,
    body: String,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            extra: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            body: String::new(),
        }
    }

    pub fn with_header(name: &str, header: Vec<String>) -> Self {
        Self {
            name: name.to_string(),
            extra: Vec::new(),
            header,
            body: String::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.extra.push(format!("{key}: {value}"));
    }

    pub fn row(&mut self, cells: &[Cell]) {
        debug_assert_eq!(cells.len(), self.header.len());
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.body.push(',');
            }
            match c {
                Cell::Int(v) => write!(self.body, "{v}").unwrap(),
                Cell::Float(v) => write!(self.body, "{v:e}").unwrap(),
                Cell::Empty => {}
                Cell::Text(s) => self.body.push_str(s),
            }
        }
        self.body.push('\n');
    }

    pub fn write(&self, dir: &Path, meta: &Metadata) -> Result<PathBuf, CliError> {
        let mut text = String::new();
        writeln!(text, "# spopo {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(text, "# command: {}", meta.command).unwrap();
        writeln!(text, "# config_sha256: {}", meta.config_sha256).unwrap();
        writeln!(text, "# seed: {}", meta.seed).unwrap();
        for line in &self.extra {
            writeln!(text, "# {line}").unwrap();
        }
        writeln!(text, "{}", self.header.join(",")).unwrap();
        text.push_str(&self.body);
        let path = dir.join(format!("{}.csv", self.name));
        fs::write(&path, text).map_err(|e| CliError::Output {
            path: path.clone(),
            message: e.to_string(),
        })?;
        Ok(path)
    }
}

pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

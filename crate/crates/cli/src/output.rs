use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::Value;
use star_radon::Direction;

/// Twelve significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn xi_header(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("xi_{i}")).collect()
}

pub fn xi_cells(xi: &Direction) -> Vec<String> {
    xi.as_slice().iter().map(|&x| num(x)).collect()
}

/// Comma-separated table with a header row.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Csv {
        let mut c = Csv { text: String::new() };
        c.row(header);
        c
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        let line: Vec<&str> = cells.iter().map(|s| s.as_ref()).collect();
        let _ = writeln!(self.text, "{}", line.join(","));
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        fs::write(path, &self.text)
    }
}

pub struct OutDir(pub PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> io::Result<OutDir> {
        fs::create_dir_all(path)?;
        Ok(OutDir(path.to_path_buf()))
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn csv(&self, name: &str, csv: &Csv) -> io::Result<PathBuf> {
        let p = self.file(name);
        csv.write(&p)?;
        Ok(p)
    }

    pub fn summary(&self, name: &str, command: &str, config: Value, results: Value) -> io::Result<PathBuf> {
        let doc = serde_json::json!({
            "command": command,
            "config_echo": config,
            "results": results,
        });
        let p = self.file(name);
        let mut text = serde_json::to_string_pretty(&doc).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(&p, text)?;
        Ok(p)
    }
}

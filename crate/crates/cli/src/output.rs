use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

pub const PARAMS_HEADER: &str = "parameter,value,unit";

/// Named scalar outputs, written as `parameter,value,unit` rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamTable {
    rows: Vec<(String, f64, &'static str)>,
}

impl ParamTable {
    pub fn push(&mut self, name: impl Into<String>, value: f64, unit: &'static str) -> &mut Self {
        self.rows.push((name.into(), value, unit));
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.0 == name).map(|r| r.1)
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, f64, &str)> {
        self.rows.iter().map(|(n, v, u)| (n.as_str(), *v, *u))
    }

    /// Values in shortest round-trip form, so the text is byte-stable.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(PARAMS_HEADER);
        out.push('\n');
        for (name, value, unit) in &self.rows {
            let _ = writeln!(out, "{name},{value},{unit}");
        }
        out
    }

    /// Aligned listing with six significant digits.
    pub fn to_summary(&self) -> String {
        let width = self.rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (name, value, unit) in &self.rows {
            let line = format!("  {name:<width$}  {} {unit}", sig(*value, 6));
            let line = if *unit == "1" {
                line.strip_suffix(" 1").unwrap_or(&line)
            } else {
                &line
            };
            let _ = writeln!(out, "{line}");
        }
        out
    }
}

/// `v` rounded to `digits` significant digits, without trailing zeros.
pub fn sig(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i64;
    if !(-4..15).contains(&magnitude) {
        return format!("{:.*e}", digits.saturating_sub(1), v);
    }
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Collects files written by one command.
pub struct Emitter {
    dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl Emitter {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        self.files.push(path);
        Ok(())
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

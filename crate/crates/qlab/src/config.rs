//! Flat `key=value` experiment configuration.
//!
//! | key          | default | meaning                                              |
//! |--------------|---------|------------------------------------------------------|
//! | `seed`       | 7       | base seed for every random scale, form and connection |
//! | `torus_n`    | 32      | nodes per axis for the `T⁴` transformation law        |
//! | `torus6_n`   | 16      | nodes per active axis of the `T⁶` coupled test        |
//! | `harmonic_n` | 16      | nodes per axis for harmonics and pair quantities      |
//! | `sphere_n`   | 48      | Gauss-Legendre latitudes on `S²`                      |
//! | `out`        | unset   | report path                                           |
//! | `format`     | json    | `json`, `csv` or `text`                               |
//! | `tol.<id>`   | per check | tolerance override for check `<id>`               |
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }
}

impl FromStr for Format {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "text",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub seed: u64,
    pub torus_n: usize,
    pub torus6_n: usize,
    pub harmonic_n: usize,
    pub sphere_n: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 7,
            torus_n: 32,
            torus6_n: 16,
            harmonic_n: 16,
            sphere_n: 48,
            out: None,
            format: Format::Json,
            tolerances: BTreeMap::new(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

fn grid_size(key: &str, value: &str, min: usize) -> Result<usize> {
    let n: usize = parse(key, value)?;
    if n < min || n % 2 != 0 {
        return Err(Error::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(n)
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(Error::Syntax { line: i + 1 })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Applies a `key=value` override as given on the command line.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv.split_once('=').ok_or(Error::Syntax { line: 0 })?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = parse(key, value)?,
            "torus_n" => self.torus_n = grid_size(key, value, 8)?,
            "torus6_n" => self.torus6_n = grid_size(key, value, 8)?,
            "harmonic_n" => self.harmonic_n = grid_size(key, value, 8)?,
            "sphere_n" => self.sphere_n = grid_size(key, value, 16)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => {
                self.format = value.parse().map_err(|_| Error::InvalidValue {
                    key: key.to_string(),
                    value: value.to_string(),
                })?
            }
            _ => {
                let Some(id) = key.strip_prefix("tol.") else {
                    return Err(Error::UnknownKey(key.to_string()));
                };
                let experiment = id.split('.').next().unwrap_or("");
                if !crate::experiments::names().contains(&experiment) || id.len() <= experiment.len() + 1 {
                    return Err(Error::UnknownKey(key.to_string()));
                }
                let tol: f64 = parse(key, value)?;
                if !(tol.is_finite() && tol >= 0.0) {
                    return Err(Error::InvalidValue {
                        key: key.to_string(),
                        value: value.to_string(),
                    });
                }
                self.tolerances.insert(id.to_string(), tol);
            }
        }
        Ok(())
    }

    /// All settings as strings, in key order.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("seed".into(), self.seed.to_string());
        m.insert("torus_n".into(), self.torus_n.to_string());
        m.insert("torus6_n".into(), self.torus6_n.to_string());
        m.insert("harmonic_n".into(), self.harmonic_n.to_string());
        m.insert("sphere_n".into(), self.sphere_n.to_string());
        m.insert("format".into(), self.format.to_string());
        if let Some(out) = &self.out {
            m.insert("out".into(), out.display().to_string());
        }
        for (id, tol) in &self.tolerances {
            m.insert(format!("tol.{id}"), format!("{tol:e}"));
        }
        m
    }
}

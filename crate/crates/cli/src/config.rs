//! Flat TOML config files. Keys are the long flag names of the subcommand
//! (`r0 = 2.0`, `phi = "0.1,0.2,0.3"` or `phi = [0.1, 0.2, 0.3]`,
//! `physical-units = true`). A flag on the command line wins over the file.

use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::Failure;

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: Table,
    origin: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let values: Table = text
            .parse()
            .map_err(|e| Failure::Usage(format!("bad config {}: {e}", path.display())))?;
        if let Some((key, _)) = values.iter().find(|(_, v)| v.is_table()) {
            return Err(Failure::Usage(format!(
                "config must be flat; `{key}` is a table"
            )));
        }
        Ok(Self {
            values,
            origin: Some(path.to_path_buf()),
        })
    }

    /// Rejects keys that the running subcommand does not know.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), Failure> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(key) => Err(self.bad(key, "is not a setting of this subcommand")),
            None => Ok(()),
        }
    }

    fn bad(&self, key: &str, what: &str) -> Failure {
        let origin = self
            .origin
            .as_deref()
            .map(|p| p.display().to_string())
            .unwrap_or_default();
        Failure::Usage(format!("config {origin}: `{key}` {what}"))
    }

    pub fn float(&self, key: &str) -> Result<Option<f64>, Failure> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(n)) => Ok(Some(*n as f64)),
            Some(Value::String(s)) => s
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| self.bad(key, "must be a number")),
            Some(_) => Err(self.bad(key, "must be a number")),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, Failure> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Integer(n)) if *n >= 0 => Ok(Some(*n as usize)),
            Some(_) => Err(self.bad(key, "must be a non-negative integer")),
        }
    }

    pub fn string(&self, key: &str) -> Result<Option<String>, Failure> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(Value::Float(_) | Value::Integer(_)) => Ok(Some(self.values[key].to_string())),
            Some(_) => Err(self.bad(key, "must be a string")),
        }
    }

    pub fn flag(&self, key: &str) -> Result<Option<bool>, Failure> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(self.bad(key, "must be true or false")),
        }
    }

    /// A list of numbers, written as an array or a comma-separated string.
    pub fn list(&self, key: &str) -> Result<Option<String>, Failure> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(Value::Array(items)) => {
                let parts: Result<Vec<String>, Failure> = items
                    .iter()
                    .map(|v| match v {
                        Value::Float(x) => Ok(format!("{x:e}")),
                        Value::Integer(n) => Ok(n.to_string()),
                        _ => Err(self.bad(key, "must hold numbers")),
                    })
                    .collect();
                Ok(Some(parts?.join(",")))
            }
            Some(_) => Err(self.bad(key, "must be a list of numbers")),
        }
    }
}

/// Parses `"a,b,c"` into exactly `N` numbers.
pub fn parse_numbers<const N: usize>(name: &str, text: &str) -> Result<[f64; N], Failure> {
    let values: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("--{name}: cannot parse `{text}` as numbers")))?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Failure::Usage(format!("--{name}: values must be finite")));
    }
    values.try_into().map_err(|v: Vec<f64>| {
        Failure::Usage(format!("--{name}: expected {N} values, got {}", v.len()))
    })
}

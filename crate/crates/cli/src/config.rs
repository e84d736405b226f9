//! Run configuration and the `key = value` config file format.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use refram::tower::{ExtensionSpec, OmegaChoice};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parse::{parse_list, parse_omega, parse_polynomial, reduce_mod, ParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    MissingEquals { line: usize },
    #[error("line {line}: empty key")]
    EmptyKey { line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {value:?}")]
    BadValue { key: String, value: String },
    #[error("`{0}` is required for this command")]
    Missing(&'static str),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Parses `key = value` lines. Blank lines and lines starting with `#` are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigError::MissingEquals { line: i + 1 })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::EmptyKey { line: i + 1 });
        }
        if out.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(ConfigError::Duplicate { line: i + 1, key: key.to_string() });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(format!("unknown format `{other}` (json, csv, text)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub p: u64,
    pub f: usize,
    pub m: usize,
    pub b: Option<usize>,
    pub t: usize,
    pub r: i64,
    pub e_k: Option<usize>,
    pub omega: String,
    pub poly: Option<String>,
    pub precision: Option<usize>,
    pub format: Option<Format>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub b_max: Option<usize>,
    /// Primes of the verify grid.
    pub primes: Vec<u64>,
    /// Tame indices of the verify grid.
    pub ms: Vec<usize>,
    pub resamples: usize,
    pub changes: usize,
    pub inject_fault: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 3,
            f: 2,
            m: 1,
            b: None,
            t: 0,
            r: 0,
            e_k: None,
            omega: "generator".into(),
            poly: None,
            precision: None,
            format: None,
            seed: 0,
            out: None,
            b_max: None,
            primes: vec![2, 3],
            ms: vec![1, 2, 3],
            resamples: 3,
            changes: 10,
            inject_fault: false,
        }
    }
}

fn value<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: v.into() })
}

fn list<T: TryFrom<u64>>(key: &str, v: &str) -> Result<Vec<T>, ConfigError> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    parse_list(v)?
        .into_iter()
        .map(|x| T::try_from(x).map_err(|_| ConfigError::BadValue { key: key.into(), value: v.into() }))
        .collect()
}

impl RunConfig {
    /// Sets one field from its textual form; keys match the long flag names.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "p" => self.p = value(key, v)?,
            "f" => self.f = value(key, v)?,
            "m" => self.m = value(key, v)?,
            "b" => self.b = Some(value(key, v)?),
            "t" => self.t = value(key, v)?,
            "r" => self.r = value(key, v)?,
            "eK" | "e_k" | "e_K" => self.e_k = Some(value(key, v)?),
            "omega" => {
                parse_omega(v)?;
                self.omega = v.to_string();
            }
            "poly" => {
                parse_polynomial(v, 'x')?;
                self.poly = Some(v.to_string());
            }
            "precision" => self.precision = Some(value(key, v)?),
            "format" => self.format = Some(value(key, v)?),
            "seed" => self.seed = value(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            "b-max" | "b_max" => self.b_max = Some(value(key, v)?),
            "primes" => self.primes = list(key, v)?,
            "ms" => self.ms = list(key, v)?,
            "resamples" => self.resamples = value(key, v)?,
            "changes" => self.changes = value(key, v)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    pub fn apply(&mut self, entries: &BTreeMap<String, String>) -> Result<(), ConfigError> {
        entries.iter().try_for_each(|(k, v)| self.set(k, v))
    }

    pub fn require_b(&self) -> Result<usize, ConfigError> {
        self.b.ok_or(ConfigError::Missing("b"))
    }

    /// `e_K` for the closed-form commands: `--eK`, else `m (p - 1)`.
    pub fn closed_form_e_k(&self) -> usize {
        self.e_k.unwrap_or(self.m * (self.p as usize).saturating_sub(1))
    }

    pub fn omega_choice(&self) -> Result<OmegaChoice, ConfigError> {
        Ok(parse_omega(&self.omega)?)
    }

    /// The tower spec for the constructive commands.
    pub fn extension_spec(&self) -> Result<ExtensionSpec, ConfigError> {
        let mut spec = ExtensionSpec::new(self.p, self.f, self.m, self.require_b()?, self.t);
        spec.omega = self.omega_choice()?;
        if let Some(poly) = &self.poly {
            spec.poly = Some(reduce_mod(&parse_polynomial(poly, 'x')?, self.p.max(1)));
        }
        spec.horizon = self.precision;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let text = "# grid\np = 3\n\nb=2\n  omega = 1,1  \n";
        let map = parse_config(text).unwrap();
        assert_eq!(map.len(), 3);
        let mut cfg = RunConfig::default();
        cfg.apply(&map).unwrap();
        assert_eq!((cfg.p, cfg.b), (3, Some(2)));
        assert_eq!(cfg.omega_choice().unwrap(), OmegaChoice::Coeffs(vec![1, 1]));
    }

    #[test]
    fn config_errors() {
        assert_eq!(parse_config("p 3"), Err(ConfigError::MissingEquals { line: 1 }));
        assert_eq!(parse_config("=3"), Err(ConfigError::EmptyKey { line: 1 }));
        assert!(matches!(parse_config("p=2\np=3"), Err(ConfigError::Duplicate { line: 2, .. })));
        let mut cfg = RunConfig::default();
        assert!(matches!(cfg.set("q", "2"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(cfg.set("p", "two"), Err(ConfigError::BadValue { .. })));
        assert!(cfg.set("omega", "[1").is_err());
    }

    #[test]
    fn poly_is_reduced_mod_p() {
        let mut cfg = RunConfig { b: Some(2), ..RunConfig::default() };
        cfg.set("poly", "x^2 - x - 1").unwrap();
        assert_eq!(cfg.extension_spec().unwrap().poly, Some(vec![2, 2, 1]));
    }

    #[test]
    fn empty_lists() {
        let mut cfg = RunConfig::default();
        cfg.set("primes", "").unwrap();
        assert!(cfg.primes.is_empty());
        cfg.set("ms", "1,2").unwrap();
        assert_eq!(cfg.ms, vec![1, 2]);
    }
}

//! Layered run settings: each subcommand's checked-in defaults, optionally
//! overridden by a `--config` file, overridden in turn by explicit flags.
//! Config files are `key = value` lines mirroring the flags, `#` comments.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::table::Format;
use crate::CliError;

#[derive(Debug, Clone, Default)]
pub struct Overlay {
    map: BTreeMap<String, String>,
}

impl Overlay {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::input(format!(
                    "{origin}:{}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            map.insert(key.trim().replace('-', "_"), value.trim().to_string());
        }
        Ok(Self { map })
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.map.insert(key.to_string(), value);
    }

    pub fn merge(&mut self, other: Overlay) {
        self.map.extend(other.map);
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|e| CliError::input(format!("bad `{key}` value `{tok}`: {e}")))
                })
                .collect::<Result<Vec<f64>, CliError>>()
                .map(Some),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.f64_list(key)? {
            None => Ok(None),
            Some(values) if values.len() == 1 => Ok(Some(values[0])),
            Some(_) => Err(CliError::input(format!("`{key}` takes a single value here"))),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s
                .trim()
                .parse::<usize>()
                .map(Some)
                .map_err(|e| CliError::input(format!("bad `{key}` value `{s}`: {e}"))),
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key) {
            None => Ok(false),
            Some("true") | Some("1") => Ok(true),
            Some("false") | Some("0") => Ok(false),
            Some(other) => Err(CliError::input(format!("bad `{key}` value `{other}`"))),
        }
    }

    pub fn format(&self) -> Result<Format, CliError> {
        match self.raw("format") {
            None => Ok(Format::Csv),
            Some(s) => Format::parse(s).map_err(CliError::input),
        }
    }

    pub fn out_dir(&self, subdir: &str) -> PathBuf {
        PathBuf::from(self.raw("out").unwrap_or("out")).join(subdir)
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_layers() {
        let mut base = Overlay::parse("g0 = 0.8\nnb = 0,0.5 # list\n", "base").unwrap();
        let over = Overlay::parse("nb = 2\ndt-out = 0.1\n", "over").unwrap();
        base.merge(over);
        assert_eq!(base.f64("g0").unwrap(), Some(0.8));
        assert_eq!(base.f64_list("nb").unwrap(), Some(vec![2.0]));
        assert_eq!(base.f64("dt_out").unwrap(), Some(0.1));
        assert_eq!(base.f64("tmax").unwrap(), None);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(Overlay::parse("g0 0.8", "x").is_err());
        let o = Overlay::parse("g0 = zebra", "x").unwrap();
        assert!(o.f64("g0").is_err());
    }
}

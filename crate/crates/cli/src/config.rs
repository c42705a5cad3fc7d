//! Flat `key = value` configuration files. Keys mirror the long flag names
//! (with `_` or `-`); a flag given on the command line wins over the file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

pub const KEYS: &[&str] = &[
    "n", "p", "d", "model", "seed", "gamma", "tmax", "steps", "out", "jobs", "w", "i", "j", "a",
    "b", "bins", "task", "size", "p_list",
];

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected `key = value`", k + 1))?;
            let key = key.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                bail!("config line {}: unknown key `{key}`", k + 1);
            }
            if values.insert(key.clone(), value.trim().to_owned()).is_some() {
                bail!("config line {}: key `{key}` given twice", k + 1);
            }
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    /// `flag` if present, else the file's value for `key`.
    pub fn get<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("invalid value `{raw}` for `{key}`: {e}")),
        }
    }

    pub fn require<T>(&self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.get(key, flag)?
            .ok_or_else(|| anyhow!("missing required parameter `{key}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let cfg = ConfigFile::parse("# comment\nn = 100\np=0.2 # trailing\n\np-list = 0.1,0.2\n").unwrap();
        assert_eq!(cfg.get::<usize>("n", None).unwrap(), Some(100));
        assert_eq!(cfg.get::<usize>("n", Some(7)).unwrap(), Some(7));
        assert_eq!(cfg.get::<f64>("p", None).unwrap(), Some(0.2));
        assert_eq!(cfg.get::<String>("p_list", None).unwrap().as_deref(), Some("0.1,0.2"));
        assert_eq!(cfg.get::<u64>("seed", None).unwrap(), None);
        assert!(cfg.require::<u64>("seed", None).unwrap_err().to_string().contains("`seed`"));
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(ConfigFile::parse("n 100").is_err());
        assert!(ConfigFile::parse("colour = red").unwrap_err().to_string().contains("colour"));
        assert!(ConfigFile::parse("n = 1\nn = 2").is_err());
        let cfg = ConfigFile::parse("n = many").unwrap();
        let err = cfg.get::<usize>("n", None).unwrap_err().to_string();
        assert!(err.contains("`n`"), "{err}");
    }
}

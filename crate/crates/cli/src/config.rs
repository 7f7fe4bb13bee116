use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};

/// Overrides the directory that relative input and output paths resolve against.
pub const DATA_DIR_ENV: &str = "ECRANK_DATA_DIR";

/// Raised for bad flags, config files and inputs; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// `path` joined onto the data directory when it is relative and the
/// override is set.
pub fn data_path(path: &Path) -> PathBuf {
    match std::env::var_os(DATA_DIR_ENV) {
        Some(dir) if path.is_relative() && !dir.is_empty() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Existing input file, resolved through [`data_path`].
pub fn input_path(path: &Path) -> Result<PathBuf> {
    let p = data_path(path);
    if !p.is_file() {
        return Err(usage(format!("input file {} does not exist", p.display())));
    }
    Ok(p)
}

/// Output file, resolved through [`data_path`]; parent directories are created.
pub fn output_path(path: &Path) -> Result<PathBuf> {
    let p = data_path(path);
    if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(p)
}

/// `key = value` settings from a config file. Command-line flags take
/// precedence; keys never asked for are reported as errors.
#[derive(Debug, Default)]
pub struct Settings {
    kv: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(usage(format!("config line {}: expected `key = value`", i + 1)));
            };
            let key = k.trim().replace('-', "_");
            if kv.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(usage(format!("config line {}: duplicate key `{key}`", i + 1)));
            }
        }
        Ok(Self { kv, used: RefCell::default() })
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let p = input_path(p)?;
                let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                Self::parse(&text)
            }
        }
    }

    /// Flag value if given, else the config entry, else `None`.
    pub fn get<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.used.borrow_mut().insert(key.to_string());
        if flag.is_some() {
            return Ok(flag);
        }
        match self.kv.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| usage(format!("config key `{key}` = `{v}`: {e}"))),
        }
    }

    pub fn or<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }

    pub fn required<T>(&self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.get(key, flag)?.ok_or_else(|| usage(format!("missing required setting `{key}`")))
    }

    /// Fails on config keys the command never looked up.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&String> = self.kv.keys().filter(|k| !used.contains(*k)).collect();
        if !unknown.is_empty() {
            bail!(UsageError(format!("unknown config keys: {unknown:?}")));
        }
        Ok(())
    }
}

/// Evenly spaced grid from `lo:hi:count`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || usage(format!("grid `{spec}` must look like lo:hi:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !(lo.is_finite() && hi.is_finite()) || (n > 1 && hi <= lo) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let s = Settings::parse("epochs = 5\n# comment\nlr-max = 0.002 # trailing\n").unwrap();
        assert_eq!(s.or("epochs", Some(7usize), 40).unwrap(), 7);
        assert_eq!(s.or("lr_max", None, 1e-3).unwrap(), 0.002);
        assert_eq!(s.or("seed", None, 3u64).unwrap(), 3);
        s.finish().unwrap();
    }

    #[test]
    fn unknown_and_malformed_keys() {
        let s = Settings::parse("epochs = 5\ntypo = 1\n").unwrap();
        s.or("epochs", None, 1usize).unwrap();
        assert!(s.finish().is_err());
        assert!(Settings::parse("no equals sign").is_err());
        assert!(Settings::parse("a = 1\na = 2").is_err());
        let s = Settings::parse("epochs = many").unwrap();
        assert!(s.or("epochs", None, 1usize).is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("2:2:1").unwrap(), vec![2.0]);
        assert!(parse_grid("1:0:3").is_err());
        assert!(parse_grid("0:1").is_err());
    }
}

//! Flat configuration files: `[section]` headers, `key = value` lines,
//! comma-separated lists, `#` or `;` comment lines.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, String>>,
    /// Effective values of every key read so far, defaults included.
    echo: RefCell<BTreeMap<String, BTreeMap<String, String>>>,
    used: RefCell<BTreeSet<(String, String)>>,
}

fn err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        let mut current: Option<String> = None;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("line {}: unterminated section header", no + 1)))?
                    .trim();
                if name.is_empty() || name.contains(['[', ']']) {
                    return Err(err(format!("line {}: bad section name", no + 1)));
                }
                cfg.sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("line {}: expected `key = value`", no + 1)))?;
            let section = current
                .as_ref()
                .ok_or_else(|| err(format!("line {}: key outside of any section", no + 1)))?;
            let key = k.trim();
            if key.is_empty() {
                return Err(err(format!("line {}: empty key", no + 1)));
            }
            let map = cfg.sections.get_mut(section).expect("section exists");
            if map.insert(key.to_string(), v.trim().to_string()).is_some() {
                return Err(err(format!("line {}: duplicate key {section}.{key}", no + 1)));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Insert or replace a value (command-line overrides).
    pub fn set(&mut self, section: &str, key: &str, value: impl Into<String>) {
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), value.into());
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(|s| s.as_str())
    }

    fn record(&self, section: &str, key: &str, value: String) {
        self.used
            .borrow_mut()
            .insert((section.to_string(), key.to_string()));
        self.echo
            .borrow_mut()
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), value);
    }

    fn lookup<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(s) => s.parse::<T>().map(Some).map_err(|_| {
                err(format!("{section}.{key}: cannot parse {s:?}"))
            }),
        }
    }

    /// Required or defaulted scalar value.
    pub fn get<T: FromStr + ToString>(&self, section: &str, key: &str, default: Option<T>) -> Result<T> {
        let v = match self.lookup::<T>(section, key)? {
            Some(v) => v,
            None => default.ok_or_else(|| err(format!("missing required key {section}.{key}")))?,
        };
        self.record(section, key, v.to_string());
        Ok(v)
    }

    pub fn f64(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        let v = self.get(section, key, Some(default))?;
        if !v.is_finite() {
            return Err(err(format!("{section}.{key} must be finite")));
        }
        Ok(v)
    }

    pub fn usize(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        self.get(section, key, Some(default))
    }

    pub fn u64(&self, section: &str, key: &str, default: u64) -> Result<u64> {
        self.get(section, key, Some(default))
    }

    pub fn bool(&self, section: &str, key: &str, default: bool) -> Result<bool> {
        self.get(section, key, Some(default))
    }

    pub fn string(&self, section: &str, key: &str, default: &str) -> Result<String> {
        self.get(section, key, Some(default.to_string()))
    }

    pub fn required_string(&self, section: &str, key: &str) -> Result<String> {
        self.get::<String>(section, key, None)
    }

    pub fn list<T: FromStr + ToString + Clone>(
        &self,
        section: &str,
        key: &str,
        default: &[T],
    ) -> Result<Vec<T>> {
        let v: Vec<T> = match self.raw(section, key) {
            None => default.to_vec(),
            Some(s) if s.trim().is_empty() => Vec::new(),
            Some(s) => s
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<T>()
                        .map_err(|_| err(format!("{section}.{key}: cannot parse item {:?}", p.trim())))
                })
                .collect::<Result<_>>()?,
        };
        self.record(
            section,
            key,
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "),
        );
        Ok(v)
    }

    /// Keys present in the file that no reader asked for.
    pub fn unused_keys(&self) -> Vec<String> {
        let used = self.used.borrow();
        self.sections
            .iter()
            .flat_map(|(s, m)| m.keys().map(move |k| (s.clone(), k.clone())))
            .filter(|sk| !used.contains(sk))
            .map(|(s, k)| format!("{s}.{k}"))
            .collect()
    }

    pub fn reject_unused(&self) -> Result<()> {
        let unused = self.unused_keys();
        if unused.is_empty() {
            Ok(())
        } else {
            Err(err(format!("unknown keys: {}", unused.join(", "))))
        }
    }

    /// Effective configuration (every key read, defaults expanded) in the
    /// same file format.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for (s, m) in self.echo.borrow().iter() {
            out.push_str(&format!("[{s}]\n"));
            for (k, v) in m {
                out.push_str(&format!("{k} = {v}\n"));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "
# comment
[scenario]
kind = lemma_l2
seed = 42

[kernel]
family = riesz
exponents = 3, 0 ,0
";

    #[test]
    fn parse_and_echo() {
        let c = Config::parse(TEXT).unwrap();
        assert_eq!(c.required_string("scenario", "kind").unwrap(), "lemma_l2");
        assert_eq!(c.u64("scenario", "seed", 0).unwrap(), 42);
        assert_eq!(c.list::<u32>("kernel", "exponents", &[]).unwrap(), vec![3, 0, 0]);
        assert_eq!(c.f64("kernel", "c0", 1.5).unwrap(), 1.5);
        assert_eq!(c.unused_keys(), vec!["kernel.family".to_string()]);
        assert!(c.reject_unused().is_err());
        let e = c.echo();
        assert!(e.contains("[kernel]\nc0 = 1.5\nexponents = 3, 0, 0\n"));
        let again = Config::parse(&e).unwrap();
        assert_eq!(again.f64("kernel", "c0", 0.0).unwrap(), 1.5);
    }

    #[test]
    fn errors() {
        assert!(Config::parse("key = 1").is_err());
        assert!(Config::parse("[a]\nk = 1\nk = 2").is_err());
        assert!(Config::parse("[a\nk = 1").is_err());
        assert!(Config::parse("[a]\nnovalue").is_err());
        let c = Config::parse("[a]\nk = x").unwrap();
        assert!(c.f64("a", "k", 0.0).is_err());
        assert!(c.required_string("a", "missing").is_err());
    }
}

//! Job configuration, selectors and external newform files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numth::{is_prime, is_squarefree};

/// Environment variable naming the default cache directory.
pub const CACHE_ENV: &str = "SHIMURA_CACHE_DIR";

/// Which newform to use: a position in the candidate list, or a prefix of
/// prescribed eigenvalues `b_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    Index(usize),
    Prefix(BTreeMap<u64, i64>),
}

impl Default for Selector {
    fn default() -> Self {
        Selector::Index(0)
    }
}

impl FromStr for Selector {
    type Err = Error;

    /// `"0"` selects by index; `"2=-1,3=-1,5=1"` by eigenvalue prefix.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Ok(i) = t.parse::<usize>() {
            return Ok(Selector::Index(i));
        }
        let mut map = BTreeMap::new();
        for part in t.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (p, b) = part.split_once('=').ok_or_else(|| Error::BadSelector(s.into()))?;
            let p: u64 = p.trim().parse().map_err(|_| Error::BadSelector(s.into()))?;
            let b: i64 = b.trim().parse().map_err(|_| Error::BadSelector(s.into()))?;
            if !is_prime(p) || map.insert(p, b).is_some() {
                return Err(Error::BadSelector(s.into()));
            }
        }
        if map.is_empty() {
            return Err(Error::BadSelector(s.into()));
        }
        Ok(Selector::Prefix(map))
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::Index(i) => write!(f, "{i}"),
            Selector::Prefix(m) => {
                let parts: Vec<String> = m.iter().map(|(p, b)| format!("{p}={b}")).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "text" => Ok(OutputFormat::Text),
            _ => Err(Error::InvalidConfig(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobConfig {
    pub level: u64,
    pub selector: Option<Selector>,
    /// Coefficients `a_n` are produced for `1 <= n <= precision`.
    pub precision: u64,
    pub format: OutputFormat,
    pub cache_dir: Option<PathBuf>,
    pub newform_file: Option<PathBuf>,
}

impl JobConfig {
    pub fn new(level: u64, precision: u64) -> Self {
        JobConfig {
            level,
            selector: None,
            precision,
            format: OutputFormat::Json,
            cache_dir: None,
            newform_file: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.level;
        if n < 3 || n % 2 == 0 || !is_squarefree(n) {
            return Err(Error::InvalidConfig(format!("level {n} must be odd, square-free and at least 3")));
        }
        if self.precision == 0 {
            return Err(Error::InvalidConfig("precision must be at least 1".into()));
        }
        Ok(())
    }

    /// The effective selector after merging an external newform file.
    pub fn effective_selector(&self) -> Result<(Selector, bool)> {
        let file = match &self.newform_file {
            Some(path) => ingest_newform(path)?,
            None => BTreeMap::new(),
        };
        let explicit = self.selector.clone();
        if file.is_empty() {
            return Ok((explicit.unwrap_or_default(), false));
        }
        let mut merged = file;
        match explicit {
            None | Some(Selector::Index(_)) => {}
            Some(Selector::Prefix(m)) => {
                for (p, b) in m {
                    if merged.get(&p).is_some_and(|&x| x != b) {
                        return Err(Error::NewformConflict);
                    }
                    merged.insert(p, b);
                }
            }
        }
        Ok((Selector::Prefix(merged), true))
    }
}

/// Reads `p b_p` lines or a JSON object `{"p": b_p}`. An empty file yields
/// an empty map.
pub fn ingest_newform(path: &Path) -> Result<BTreeMap<u64, i64>> {
    let text = std::fs::read_to_string(path)?;
    parse_newform(&text)
}

pub fn parse_newform(text: &str) -> Result<BTreeMap<u64, i64>> {
    let trimmed = text.trim();
    let mut out = BTreeMap::new();
    let mut put = |p: u64, b: i64| -> Result<()> {
        if !is_prime(p) {
            return Err(Error::NewformParse(format!("{p} is not prime")));
        }
        if out.insert(p, b).is_some_and(|old| old != b) {
            return Err(Error::NewformParse(format!("two values for b_{p}")));
        }
        Ok(())
    };
    if trimmed.starts_with('{') {
        let map: BTreeMap<String, i64> =
            serde_json::from_str(trimmed).map_err(|e| Error::NewformParse(e.to_string()))?;
        for (k, b) in map {
            let p = k.trim().parse().map_err(|_| Error::NewformParse(format!("bad prime {k:?}")))?;
            put(p, b)?;
        }
    } else {
        for line in trimmed.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let [p, b] = cols[..] else {
                return Err(Error::NewformParse(format!("expected two columns: {line:?}")));
            };
            let p = p.parse().map_err(|_| Error::NewformParse(format!("bad prime {p:?}")))?;
            let b = b.parse().map_err(|_| Error::NewformParse(format!("bad eigenvalue {b:?}")))?;
            put(p, b)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors_parse() {
        assert_eq!("2".parse::<Selector>().unwrap(), Selector::Index(2));
        let s: Selector = "2=-1, 3=-1,5=1".parse().unwrap();
        assert_eq!(s.to_string(), "2=-1,3=-1,5=1");
        assert!("4=1".parse::<Selector>().is_err());
        assert!("2=1,2=1".parse::<Selector>().is_err());
        assert!("x".parse::<Selector>().is_err());
    }

    #[test]
    fn newform_formats() {
        let a = parse_newform("# F\n2 -1\n3 -1\n\n5 1\n").unwrap();
        let b = parse_newform(r#"{"2": -1, "3": -1, "5": 1}"#).unwrap();
        assert_eq!(a, b);
        assert!(parse_newform("").unwrap().is_empty());
        assert!(parse_newform("2 1 3").is_err());
        assert!(parse_newform("9 1").is_err());
    }

    #[test]
    fn level_validation() {
        for bad in [1, 2, 9, 20, 45] {
            assert!(JobConfig::new(bad, 10).validate().is_err());
        }
        assert!(JobConfig::new(15, 0).validate().is_err());
        assert!(JobConfig::new(15, 1).validate().is_ok());
    }
}

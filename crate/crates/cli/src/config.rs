use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::UsageError;

/// Flat `key = value` settings; `#` starts a comment.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<KeyValues> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!(UsageError(format!("config line {}: expected `key = value`", i + 1)));
            };
            let key = k.trim().replace('-', "_");
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                bail!(UsageError(format!("config line {}: duplicate key `{}`", i + 1, key)));
            }
        }
        Ok(KeyValues { entries })
    }

    pub fn load(path: &Path) -> Result<KeyValues> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        KeyValues::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Parses `key` if present.
    pub fn value<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| UsageError(format!("config key `{}`: {}", key, e)).into()),
        }
    }

    /// Fails on keys outside `known`.
    pub fn check_keys(&self, known: &[&str]) -> Result<()> {
        for k in self.entries.keys() {
            if !known.contains(&k.as_str()) {
                bail!(UsageError(format!("unknown config key `{}`", k)));
            }
        }
        Ok(())
    }
}

/// A fraction written as a decimal or as `a/b`.
pub fn parse_fraction(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let v = match t.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad fraction `{}`", t))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad fraction `{}`", t))?;
            a / b
        }
        None => t.parse().map_err(|_| format!("bad number `{}`", t))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("bad number `{}`", t))
    }
}

/// A grid size that may depend on `k`: `40`, `k`, or `k/10`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Size {
    Fixed(usize),
    OfK { divisor: usize },
}

impl Size {
    pub fn parse(text: &str) -> Result<Size, String> {
        let t = text.trim();
        if t == "k" {
            return Ok(Size::OfK { divisor: 1 });
        }
        if let Some(d) = t.strip_prefix("k/") {
            let divisor: usize = d.trim().parse().map_err(|_| format!("bad size `{}`", t))?;
            if divisor == 0 {
                return Err(format!("bad size `{}`", t));
            }
            return Ok(Size::OfK { divisor });
        }
        t.parse().map(Size::Fixed).map_err(|_| format!("bad size `{}`", t))
    }

    /// Sizes relative to `k` are rounded down but kept at least 1, except
    /// that a fixed 0 stays 0.
    pub fn resolve(&self, k: usize) -> usize {
        match *self {
            Size::Fixed(n) => n,
            Size::OfK { divisor } => (k / divisor).max(1),
        }
    }
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Size::Fixed(n) => write!(f, "{}", n),
            Size::OfK { divisor: 1 } => f.write_str("k"),
            Size::OfK { divisor } => write!(f, "k/{}", divisor),
        }
    }
}

fn list<T>(kv: &KeyValues, key: &str, default: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>> {
    let raw = kv.get(key).unwrap_or(default);
    let items = raw
        .split(',')
        .map(|s| parse(s).map_err(|e| UsageError(format!("sweep key `{}`: {}", key, e))))
        .collect::<Result<Vec<_>, _>>()?;
    if items.is_empty() {
        bail!(UsageError(format!("sweep key `{}` is empty", key)));
    }
    Ok(items)
}

/// Parameter grid of a sweep: the cartesian product of `k`, `kw`, `ks` and `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub search: Vec<String>,
    pub k: Vec<usize>,
    pub kw: Vec<Size>,
    pub ks: Vec<Size>,
    pub p: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub search: String,
    pub k: usize,
    pub kw: Size,
    pub ks: Size,
    pub p: f64,
}

impl Grid {
    pub const KEYS: &'static [&'static str] = &["search", "k", "kw", "ks", "p", "max_open", "max_struct", "jobs"];

    pub fn from_config(kv: &KeyValues) -> Result<Grid> {
        Ok(Grid {
            search: list(kv, "search", "word", |s| match s.trim() {
                v @ ("word" | "action") => Ok(v.to_string()),
                v => Err(format!("unknown search `{}`", v)),
            })?,
            k: list(kv, "k", "2000", |s| {
                s.trim().parse().map_err(|_| format!("bad beam size `{}`", s.trim()))
            })?,
            kw: list(kv, "kw", "k/10", Size::parse)?,
            ks: list(kv, "ks", "k/100", Size::parse)?,
            p: list(kv, "p", "1", parse_fraction)?,
        })
    }

    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for search in &self.search {
            for &k in &self.k {
                for kw in &self.kw {
                    for ks in &self.ks {
                        for &p in &self.p {
                            out.push(GridPoint {
                                search: search.clone(),
                                k,
                                kw: kw.clone(),
                                ks: ks.clone(),
                                p,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

//! Flat `key = value` configuration files merged under command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;
use std::sync::Mutex;

use ftsm_core::kernel::KernelParams;
use ftsm_core::measure::{InnerMeasure, MeasureSpec};

/// Invalid or missing configuration; exits with status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

const KNOWN_KEYS: &[&str] = &[
    "H", "alpha", "rho", "T", "grid-n", "terms", "seed", "reps", "kind", "tail", "h", "out", "y-grid", "t", "s",
    "s-n", "p", "process", "theta1", "theta2", "t-grid", "suite", "threads", "json",
];

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> anyhow::Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("config line {}: expected key = value, got {raw:?}", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KNOWN_KEYS.contains(&k) {
            return Err(config_err(format!("config line {}: unknown key {k:?}", n + 1)));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(config_err(format!("config line {}: duplicate key {k:?}", n + 1)));
        }
    }
    Ok(map)
}

/// Resolves settings (flag, then file, then default) and records what was used.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    used: Mutex<BTreeMap<String, String>>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Self { file, used: Mutex::new(BTreeMap::new()) }
    }

    pub fn get<T>(&self, key: &str, flag: Option<T>) -> anyhow::Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(s) => Some(s.parse::<T>().map_err(|e| config_err(format!("setting {key} = {s:?}: {e}")))?),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.used.lock().expect("resolver lock").insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    pub fn or<T>(&self, key: &str, flag: Option<T>, default: T) -> anyhow::Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        match self.get(key, flag)? {
            Some(v) => Ok(v),
            None => {
                self.used.lock().expect("resolver lock").insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    pub fn req<T>(&self, key: &str, flag: Option<T>) -> anyhow::Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.get(key, flag)?.ok_or_else(|| config_err(format!("missing required setting {key}")))
    }

    /// Reads a setting without recording it; for output locations, which are not part of a run's identity.
    pub fn peek<T>(&self, key: &str, flag: Option<T>) -> anyhow::Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => match self.file.get(key) {
                Some(s) => Ok(Some(s.parse::<T>().map_err(|e| config_err(format!("setting {key} = {s:?}: {e}")))?)),
                None => Ok(None),
            },
        }
    }

    /// Every setting read so far, in key order.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        self.used.lock().expect("resolver lock").clone()
    }
}

pub fn kernel_params(h: f64, alpha: f64) -> anyhow::Result<KernelParams> {
    KernelParams::new(h, alpha).map_err(|e| config_err(e.to_string()))
}

pub fn measure(spec: &MeasureSpec, alpha: f64) -> anyhow::Result<InnerMeasure> {
    spec.resolve(alpha).map_err(|e| config_err(e.to_string()))
}

/// Evenly spaced `a:b:n` (n points) or log-spaced `log:a:b:n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Span {
    pub log: bool,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Span {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n)
            .map(|k| {
                let f = k as f64 / (self.n - 1) as f64;
                if self.log {
                    self.lo * (self.hi / self.lo).powf(f)
                } else {
                    self.lo + (self.hi - self.lo) * f
                }
            })
            .collect()
    }
}

impl FromStr for Span {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (log, body) = match s.strip_prefix("log:") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let parts: Vec<&str> = body.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected a:b:n or log:a:b:n, got {s:?}"));
        }
        let lo: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
        let hi: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
        let n: usize = parts[2].trim().parse().map_err(|e| format!("{e}"))?;
        if n == 0 || !(lo.is_finite() && hi.is_finite()) || (n > 1 && !(hi > lo)) || (log && !(lo > 0.0)) {
            return Err(format!("invalid span {s:?}"));
        }
        Ok(Self { log, lo, hi, n })
    }
}

impl Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}:{}:{}", if self.log { "log:" } else { "" }, self.lo, self.hi, self.n)
    }
}

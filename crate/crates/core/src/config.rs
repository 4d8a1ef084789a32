//! Sweep configuration: a flat `key=value` file overridden by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{boundary_epsilon, check_probability};

/// Keys accepted in a config file.
pub const KNOWN_KEYS: &[&str] = &[
    "q", "eps", "eps_start", "eps_stop", "eps_step", "n", "trials", "seed", "mode", "out",
];

/// Raw `key=value` pairs. Blank lines and `#` comments are ignored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues(BTreeMap<String, String>);

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("config line {}: expected key=value, got {raw:?}", lineno + 1))
            })?;
            let key = k.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::InvalidArgument(format!("config line {}: unknown key {key:?}", lineno + 1)));
            }
            map.insert(key, v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(key.to_string(), value.into());
    }

    pub fn remove(&mut self, key: &str) {
        self.0.remove(key);
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::InvalidArgument(format!("cannot parse {key} = {v:?}")))
            })
            .transpose()
    }
}

/// How the decoder and the analytic solver treat regime boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeFlag {
    /// Commensurate arithmetic exactly when the point classifies as a boundary.
    #[default]
    Auto,
    Incommensurate,
    /// Evaluate only at the boundary `h = 2J/m`, with exact tie arithmetic.
    Boundary(u32),
}

impl FromStr for ModeFlag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(ModeFlag::Auto),
            "incommensurate" => Ok(ModeFlag::Incommensurate),
            other => {
                let m = other
                    .strip_prefix("boundary:")
                    .and_then(|m| m.parse::<u32>().ok())
                    .filter(|&m| m >= 1)
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "mode {other:?}: expected auto, incommensurate or boundary:M with M >= 1"
                        ))
                    })?;
                Ok(ModeFlag::Boundary(m))
            }
        }
    }
}

impl fmt::Display for ModeFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeFlag::Auto => f.write_str("auto"),
            ModeFlag::Incommensurate => f.write_str("incommensurate"),
            ModeFlag::Boundary(m) => write!(f, "boundary:{m}"),
        }
    }
}

/// Grid of error probabilities.
#[derive(Debug, Clone, PartialEq)]
pub enum EpsGrid {
    List(Vec<f64>),
    /// Inclusive of `stop` when it lies on the grid.
    Range { start: f64, stop: f64, step: f64 },
}

impl EpsGrid {
    /// Parse `a:b:step`.
    pub fn parse_range(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidArgument(format!("eps range {s:?}: expected start:stop:step"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        Ok(EpsGrid::Range {
            start: nums[0],
            stop: nums[1],
            step: nums[2],
        })
    }

    /// Parse a comma-separated list.
    pub fn parse_list(s: &str) -> Result<Self> {
        let values = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("cannot parse epsilon {p:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EpsGrid::List(values))
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let values = match *self {
            EpsGrid::List(ref v) => v.clone(),
            EpsGrid::Range { start, stop, step } => {
                if !(step > 0.0 && step.is_finite()) {
                    return Err(Error::InvalidArgument(format!("eps step {step} must be positive")));
                }
                if stop < start {
                    return Err(Error::InvalidArgument(format!("eps range stop {stop} is below start {start}")));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|k| start + k as f64 * step).collect()
            }
        };
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty epsilon grid".into()));
        }
        for &e in &values {
            check_probability("epsilon", e)?;
        }
        Ok(values)
    }
}

/// Everything a sweep needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub q: f64,
    pub grid: EpsGrid,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: ModeFlag,
    pub out: Option<PathBuf>,
}

impl SweepConfig {
    pub const DEFAULT_Q: f64 = 0.24;
    pub const DEFAULT_N: usize = 10_000;
    pub const DEFAULT_TRIALS: usize = 100;
    pub const DEFAULT_SEED: u64 = 2024;

    /// Build from merged key/values; missing keys take defaults.
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let q = kv.parsed::<f64>("q")?.unwrap_or(Self::DEFAULT_Q);
        check_probability("q", q)?;
        let mode = kv.parsed::<ModeFlag>("mode")?.unwrap_or_default();

        let grid = if let Some(list) = kv.get("eps") {
            EpsGrid::parse_list(list)?
        } else {
            match (kv.get("eps_start"), kv.get("eps_stop"), kv.get("eps_step")) {
                (Some(_), Some(_), Some(_)) => EpsGrid::Range {
                    start: kv.parsed("eps_start")?.unwrap(),
                    stop: kv.parsed("eps_stop")?.unwrap(),
                    step: kv.parsed("eps_step")?.unwrap(),
                },
                (None, None, None) => EpsGrid::Range {
                    start: 0.01,
                    stop: 0.49,
                    step: 0.01,
                },
                _ => {
                    return Err(Error::InvalidArgument(
                        "eps_start, eps_stop and eps_step must be given together".into(),
                    ))
                }
            }
        };

        let n = kv.parsed::<usize>("n")?.unwrap_or(Self::DEFAULT_N);
        let trials = kv.parsed::<usize>("trials")?.unwrap_or(Self::DEFAULT_TRIALS);
        if n == 0 || trials == 0 {
            return Err(Error::InvalidArgument("n and trials must be at least 1".into()));
        }
        let cfg = SweepConfig {
            q,
            grid,
            n,
            trials,
            seed: kv.parsed::<u64>("seed")?.unwrap_or(Self::DEFAULT_SEED),
            mode,
            out: kv.get("out").map(PathBuf::from),
        };
        cfg.epsilons()?;
        Ok(cfg)
    }

    /// Grid values; a `boundary:m` mode replaces the grid by the single boundary point.
    pub fn epsilons(&self) -> Result<Vec<f64>> {
        match self.mode {
            ModeFlag::Boundary(m) => Ok(vec![boundary_epsilon(self.q, m)?]),
            _ => self.grid.values(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_and_defaults() {
        let kv = KeyValues::parse("# sweep\nq = 0.1\neps_start=0.05\neps_stop=0.15\neps_step=0.05\nseed=7 # inline\n").unwrap();
        let cfg = SweepConfig::from_key_values(&kv).unwrap();
        assert_eq!(cfg.q, 0.1);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.n, SweepConfig::DEFAULT_N);
        let eps = cfg.epsilons().unwrap();
        assert_eq!(eps.len(), 3);
        assert!((eps[2] - 0.15).abs() < 1e-15);
    }

    #[test]
    fn flags_override_file() {
        let mut kv = KeyValues::parse("q=0.1\neps=0.2").unwrap();
        kv.set("q", "0.3");
        assert_eq!(SweepConfig::from_key_values(&kv).unwrap().q, 0.3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(KeyValues::parse("q").is_err());
        assert!(KeyValues::parse("colour=blue").is_err());
        for text in ["q=0.6", "eps=0.5", "eps_start=0.1\neps_stop=0.2\neps_step=0", "eps_start=0.1", "n=0", "mode=boundary:0"] {
            let kv = KeyValues::parse(text).unwrap();
            assert!(SweepConfig::from_key_values(&kv).is_err(), "{text}");
        }
    }

    #[test]
    fn mode_flags() {
        assert_eq!("auto".parse::<ModeFlag>().unwrap(), ModeFlag::Auto);
        assert_eq!("boundary:3".parse::<ModeFlag>().unwrap(), ModeFlag::Boundary(3));
        assert!("boundary".parse::<ModeFlag>().is_err());
        let kv = KeyValues::parse("q=0.24\nmode=boundary:2").unwrap();
        let cfg = SweepConfig::from_key_values(&kv).unwrap();
        assert_eq!(cfg.epsilons().unwrap(), vec![boundary_epsilon(0.24, 2).unwrap()]);
    }
}

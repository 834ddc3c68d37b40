//! Experiment configuration files.
//!
//! Grammar (UTF-8, one item per line):
//!
//! ```text
//! file    := line*
//! line    := blank | comment | header | entry
//! comment := ('#' | ';') any*
//! header  := '[' name ']'
//! entry   := key '=' value
//! ```
//!
//! Keys and values are trimmed. Every entry belongs to one of the sections
//! `grid`, `kernel`, `theta`, `exponents`, `run`; unknown sections, unknown
//! keys and repeated keys are errors. Lists are comma separated.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ini::Ini;
use num_rational::Rational64;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::convolve::ThetaVector;
use crate::exponents::Exponent;
use crate::grid::TorusGrid;
use crate::kernels::KernelSpec;
use crate::tolerances;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("unknown key {key:?} in [{section}]")]
    UnknownKey { section: String, key: String },
    #[error("key {key:?} repeated in [{section}]")]
    DuplicateKey { section: String, key: String },
    #[error("missing key {key:?} in [{section}]")]
    MissingKey { section: String, key: String },
    #[error("bad value for {key}: {msg}")]
    BadValue { key: String, msg: String },
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ConfigError>;

const SECTIONS: &[(&str, &[&str])] = &[
    ("grid", &["dim", "period", "points_per_unit"]),
    (
        "kernel",
        &["name", "side", "sigma", "radius", "center", "order", "a"],
    ),
    ("theta", &["values"]),
    (
        "exponents",
        &["theorem1", "case1", "case2", "young", "r", "q"],
    ),
    (
        "run",
        &[
            "seed",
            "instances",
            "bandlimit",
            "lattice_radius",
            "trunc",
            "checks",
            "duality_terms",
            "inequality_slack",
            "duality_tol",
            "spectral_tol",
            "exact_tol",
            "bookkeeping_tol",
        ],
    ),
];

/// Tolerances used by the suite, all overridable from `[run]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub inequality_slack: f64,
    pub duality: f64,
    pub spectral: f64,
    pub exact: f64,
    pub bookkeeping: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            inequality_slack: tolerances::INEQUALITY_SLACK,
            duality: tolerances::DUALITY_TOL,
            spectral: tolerances::SPECTRAL_TOL,
            exact: tolerances::EXACT_EQUALITY,
            bookkeeping: tolerances::BOOKKEEPING_TOL,
        }
    }
}

impl Tolerances {
    /// Every tolerance set to the same value; `0` is used for failure injection.
    pub fn uniform(t: f64) -> Self {
        Tolerances {
            inequality_slack: t,
            duality: t,
            spectral: t,
            exact: t,
            bookkeeping: t,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub grid: TorusGrid,
    pub kernel: KernelSpec,
    pub theta: ThetaVector,
    /// Tuple for the square-function ratio survey.
    pub theorem1: Vec<Exponent>,
    /// Tuple for the `p >= 2` chain.
    pub case1: Vec<Exponent>,
    /// Tuple for the `1 <= p < 2` prefix chain.
    pub case2: Vec<Exponent>,
    /// Tuple for the Young check.
    pub young: Vec<Exponent>,
    pub r: Exponent,
    /// Output exponent for the hull check; defaults to `1/q = (1 + 1/r)/2`.
    pub q: Exponent,
    pub seed: u64,
    pub instances: usize,
    pub bandlimit: usize,
    pub lattice_radius: usize,
    pub trunc: u32,
    pub checks: Vec<String>,
    /// Number of nonzero coefficients in random duality sequences.
    pub duality_terms: usize,
    pub tolerances: Tolerances,
    canonical: String,
}

type Sections = BTreeMap<String, BTreeMap<String, String>>;

fn parse_sections(text: &str) -> Result<Sections> {
    let ini = Ini::load_from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let mut out: Sections = BTreeMap::new();
    for (section, props) in ini.iter() {
        let Some(section) = section else {
            if let Some((k, _)) = props.iter().next() {
                return Err(ConfigError::Syntax(format!(
                    "key {k:?} appears before any section"
                )));
            }
            continue;
        };
        let Some((_, allowed)) = SECTIONS.iter().find(|(s, _)| *s == section) else {
            return Err(ConfigError::UnknownSection(section.to_string()));
        };
        let entries = out.entry(section.to_string()).or_default();
        for (k, v) in props.iter() {
            if !allowed.contains(&k) {
                return Err(ConfigError::UnknownKey {
                    section: section.into(),
                    key: k.into(),
                });
            }
            if entries
                .insert(k.to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(ConfigError::DuplicateKey {
                    section: section.into(),
                    key: k.into(),
                });
            }
        }
    }
    Ok(out)
}

/// Sections and keys in sorted order, one `key=value` per line.
fn canonical_text(sections: &Sections) -> String {
    let mut s = String::new();
    for (name, entries) in sections {
        let _ = writeln!(s, "[{name}]");
        for (k, v) in entries {
            let _ = writeln!(s, "{k}={v}");
        }
    }
    s
}

fn bad(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        msg: msg.into(),
    }
}

struct Reader<'a> {
    sections: &'a Sections,
}

impl Reader<'_> {
    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(String::as_str)
    }

    fn require(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key)
            .ok_or_else(|| ConfigError::MissingKey {
                section: section.into(),
                key: key.into(),
            })
    }

    fn parse<T: std::str::FromStr>(&self, section: &str, key: &str, default: T) -> Result<T> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| bad(key, format!("cannot parse {v:?}"))),
        }
    }

    fn exponents(&self, key: &str, default: Vec<Exponent>) -> Result<Vec<Exponent>> {
        match self.get("exponents", key) {
            None => Ok(default),
            Some(v) => parse_exponent_list(v).map_err(|m| bad(key, m)),
        }
    }
}

pub fn parse_exponent_list(v: &str) -> std::result::Result<Vec<Exponent>, String> {
    v.split(',')
        .map(|s| s.trim().parse::<Exponent>().map_err(|e| e.to_string()))
        .collect()
}

pub fn parse_int_list(v: &str) -> std::result::Result<Vec<i64>, String> {
    v.split(',')
        .map(|s| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| format!("{s:?} is not an integer"))
        })
        .collect()
}

fn uniform(m: usize, p: i64) -> Vec<Exponent> {
    vec![Exponent::integer(p).expect("positive"); m]
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let sections = parse_sections(text)?;
        let rd = Reader {
            sections: &sections,
        };

        let dim = rd.parse("grid", "dim", 1usize)?;
        let period = rd.parse("grid", "period", 4usize)?;
        let ppu = rd.parse("grid", "points_per_unit", 32usize)?;
        let grid = TorusGrid::new(dim, period, ppu).map_err(|e| bad("grid", e.to_string()))?;

        let kernel = {
            let params = sections.get("kernel").cloned().unwrap_or_default();
            let name = rd.require("kernel", "name")?;
            let mut rest = params.clone();
            rest.remove("name");
            KernelSpec::from_name_params(name, &rest).map_err(|e| bad("kernel", e.to_string()))?
        };

        let theta =
            parse_int_list(rd.require("theta", "values")?).map_err(|m| bad("theta.values", m))?;
        let theta = ThetaVector::new(theta).map_err(|e| bad("theta.values", e.to_string()))?;
        let m = theta.m();

        let case1 = rd.exponents("case1", uniform(m, 2 * m as i64))?;
        let theorem1 = rd.exponents("theorem1", case1.clone())?;
        let case2 = rd.exponents("case2", uniform(m, m as i64))?;
        let young = rd.exponents("young", uniform(m, m as i64))?;
        for (key, v) in [
            ("theorem1", &theorem1),
            ("case1", &case1),
            ("case2", &case2),
            ("young", &young),
        ] {
            if v.len() != m {
                return Err(bad(key, format!("expected {m} exponents, got {}", v.len())));
            }
        }
        let r: Exponent = rd.parse("exponents", "r", Exponent::integer(2).expect("2"))?;
        let q = match rd.get("exponents", "q") {
            Some(v) => v
                .parse()
                .map_err(|_| bad("q", format!("cannot parse {v:?}")))?,
            None => {
                let half = Rational64::new(1, 2);
                Exponent::from_reciprocal(half * (Rational64::from_integer(1) + r.reciprocal()))
                    .map_err(|e| bad("q", e.to_string()))?
            }
        };

        let mut tol = Tolerances::default();
        tol.inequality_slack = rd.parse("run", "inequality_slack", tol.inequality_slack)?;
        tol.duality = rd.parse("run", "duality_tol", tol.duality)?;
        tol.spectral = rd.parse("run", "spectral_tol", tol.spectral)?;
        tol.exact = rd.parse("run", "exact_tol", tol.exact)?;
        tol.bookkeeping = rd.parse("run", "bookkeeping_tol", tol.bookkeeping)?;
        for t in [
            tol.inequality_slack,
            tol.duality,
            tol.spectral,
            tol.exact,
            tol.bookkeeping,
        ] {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(bad("run", format!("tolerance {t} must be finite and >= 0")));
            }
        }

        let checks = match rd.get("run", "checks") {
            None => Vec::new(),
            Some(v) => v
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect(),
        };

        let cfg = ExperimentConfig {
            grid,
            kernel,
            theta,
            theorem1,
            case1,
            case2,
            young,
            r,
            q,
            seed: rd.parse("run", "seed", 0u64)?,
            instances: rd.parse("run", "instances", 10usize)?,
            bandlimit: rd.parse("run", "bandlimit", 2usize)?,
            lattice_radius: rd.parse("run", "lattice_radius", 4usize)?,
            trunc: rd.parse("run", "trunc", 10u32)?,
            checks,
            duality_terms: rd.parse("run", "duality_terms", 5usize)?,
            tolerances: tol,
            canonical: canonical_text(&sections),
        };
        if cfg.trunc == 0 {
            return Err(bad("trunc", "must be >= 1"));
        }
        Ok(cfg)
    }

    /// The canonical text hashed by [`Self::digest`].
    pub fn canonical(&self) -> &str {
        &self.canonical
    }

    /// Hex SHA-256 of the canonical text.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical.as_bytes()))
    }

    /// Replaces the seed, keeping the digest in sync.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.set_canonical("run", "seed", &seed.to_string());
        self
    }

    /// Sets every tolerance to `t`, keeping the digest in sync.
    pub fn with_uniform_tolerance(mut self, t: f64) -> Self {
        self.tolerances = Tolerances::uniform(t);
        for key in [
            "inequality_slack",
            "duality_tol",
            "spectral_tol",
            "exact_tol",
            "bookkeeping_tol",
        ] {
            self.set_canonical("run", key, &t.to_string());
        }
        self
    }

    fn set_canonical(&mut self, section: &str, key: &str, value: &str) {
        let mut sections = parse_sections(&self.canonical).expect("canonical text parses");
        sections
            .entry(section.into())
            .or_default()
            .insert(key.into(), value.into());
        self.canonical = canonical_text(&sections);
    }
}

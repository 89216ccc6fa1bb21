//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "experiment": "mstc-scaling",
//!   "n": [5000, 10000, 20000],
//!   "layout": { "r": 0.01, "s": 0.056, "cities": "all" },
//!   "density": "uniform",
//!   "replications": 100,
//!   "seed": 7,
//!   "M": 1.0,
//!   "out": "out/mstc.csv"
//! }
//! ```
//!
//! `layout` is either the string `"unconstrained"` or an object with `r`, `s`
//! and `cities` (`"all"` or a list of `[i, j]` lattice coordinates).
//! `density` is `"uniform"` or `{ "kind": "cosine", "delta": 0.5 }`.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::path::{Path, PathBuf};

use citymst_core::sampling::DensitySpec;
use citymst_core::{CityLayout, GeomError};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const DEFAULT_REPLICATIONS: usize = 100;
pub const DEFAULT_M: f64 = 1.0;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{field}`: {reason}")]
    Validation { field: &'static str, reason: String },
}

impl ConfigError {
    fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Self::Validation {
            field,
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NValues {
    One(u64),
    Many(Vec<u64>),
}

impl NValues {
    pub fn to_vec(&self) -> Vec<u64> {
        match self {
            NValues::One(n) => vec![*n],
            NValues::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CitySelection {
    Named(String),
    List(Vec<(u32, u32)>),
}

impl Default for CitySelection {
    fn default() -> Self {
        CitySelection::Named("all".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CityConfig {
    pub r: f64,
    pub s: f64,
    #[serde(default)]
    pub cities: CitySelection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LayoutConfig {
    Named(String),
    Cities(CityConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TaggedDensity {
    Uniform,
    Cosine { delta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensityConfig {
    Named(String),
    Tagged(TaggedDensity),
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig::Named("uniform".into())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputMode {
    #[default]
    Aggregate,
    Raw,
}

/// The JSON document as written by the user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: String,
    pub n: NValues,
    pub layout: LayoutConfig,
    #[serde(default)]
    pub density: DensityConfig,
    #[serde(default)]
    pub replications: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(rename = "M", default)]
    pub m: Option<f64>,
    pub out: PathBuf,
    #[serde(default)]
    pub output: OutputMode,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LayoutSpec {
    Unconstrained,
    Cities(CityLayout),
}

impl LayoutSpec {
    pub fn city_layout(&self) -> Option<&CityLayout> {
        match self {
            LayoutSpec::Unconstrained => None,
            LayoutSpec::Cities(l) => Some(l),
        }
    }

    /// Whether the per-city lower bound applies (`s > r√2`).
    pub fn lower_bound_enabled(&self) -> bool {
        match self {
            LayoutSpec::Unconstrained => false,
            LayoutSpec::Cities(l) => l.s > l.r * SQRT_2,
        }
    }
}

/// A validated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub n: Vec<u64>,
    pub layout: LayoutSpec,
    pub density: DensitySpec,
    pub replications: usize,
    pub master_seed: u64,
    pub m: f64,
    pub out: PathBuf,
    pub output: OutputMode,
    /// Non-fatal findings, e.g. a disabled lower bound.
    pub warnings: Vec<String>,
    /// The document with defaults filled, as echoed by `--dry-run`.
    pub resolved: RawConfig,
}

impl ExperimentConfig {
    /// First 8 bytes of the SHA-256 of the resolved document, big-endian.
    pub fn hash(&self) -> u64 {
        let bytes = serde_json::to_vec(&self.resolved).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        u64::from_be_bytes(digest[..8].try_into().expect("8 bytes"))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self.resolved.seed = seed;
        self
    }

    pub fn with_out(mut self, out: impl Into<PathBuf>) -> Self {
        self.out = out.into();
        self.resolved.out = self.out.clone();
        self
    }

    pub fn resolved_json(&self) -> String {
        serde_json::to_string_pretty(&self.resolved).expect("config serializes")
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.resolved_json())
    }
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    validate(raw)
}

fn geom_error(e: GeomError) -> ConfigError {
    let field = match e {
        GeomError::NotWellConnected | GeomError::DuplicateCity { .. } | GeomError::OutOfGrid { .. } | GeomError::EmptySelection => {
            "layout.cities"
        }
        _ => "layout",
    };
    ConfigError::invalid(field, format!("{e:?}: {e}"))
}

pub fn validate(mut raw: RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let mut warnings = Vec::new();

    if raw.experiment.trim().is_empty() {
        return Err(ConfigError::invalid("experiment", "must not be empty"));
    }

    let n = raw.n.to_vec();
    if n.is_empty() {
        return Err(ConfigError::invalid("n", "at least one value is required"));
    }
    if n.contains(&0) {
        return Err(ConfigError::invalid("n", "values must be positive"));
    }
    if n.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConfigError::invalid("n", "values must be strictly increasing"));
    }

    let replications = raw.replications.unwrap_or(DEFAULT_REPLICATIONS);
    if replications < 2 {
        return Err(ConfigError::invalid("replications", "must be at least 2"));
    }
    raw.replications = Some(replications);

    let m = raw.m.unwrap_or(DEFAULT_M);
    if !(m > 0.0 && m.is_finite()) {
        return Err(ConfigError::invalid("M", "must be positive and finite"));
    }
    raw.m = Some(m);

    let density = match &raw.density {
        DensityConfig::Named(name) if name == "uniform" => DensitySpec::Uniform,
        DensityConfig::Named(name) => {
            return Err(ConfigError::invalid("density", format!("unknown density `{name}`")));
        }
        DensityConfig::Tagged(TaggedDensity::Uniform) => DensitySpec::Uniform,
        DensityConfig::Tagged(TaggedDensity::Cosine { delta }) => {
            DensitySpec::cosine(*delta).map_err(|e| ConfigError::invalid("density.delta", e.to_string()))?
        }
    };

    let layout = match &raw.layout {
        LayoutConfig::Named(name) if name == "unconstrained" => LayoutSpec::Unconstrained,
        LayoutConfig::Named(name) => {
            return Err(ConfigError::invalid("layout", format!("unknown layout `{name}`")));
        }
        LayoutConfig::Cities(c) => {
            let layout = match &c.cities {
                CitySelection::Named(name) if name == "all" => CityLayout::all(c.r, c.s),
                CitySelection::Named(name) => {
                    return Err(ConfigError::invalid("layout.cities", format!("unknown selection `{name}`")));
                }
                CitySelection::List(list) => CityLayout::new(c.r, c.s, list.clone()),
            }
            .map_err(geom_error)?;
            if !(c.s > c.r * SQRT_2) {
                warnings.push(format!(
                    "s = {} <= r√2 = {}: the per-city lower bound is disabled for this run",
                    c.s,
                    c.r * SQRT_2
                ));
            }
            LayoutSpec::Cities(layout)
        }
    };

    Ok(ExperimentConfig {
        experiment: raw.experiment.clone(),
        n,
        layout,
        density,
        replications,
        master_seed: raw.seed,
        m,
        out: raw.out.clone(),
        output: raw.output,
        warnings,
        resolved: raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config_str(
            r#"{"experiment":"mstc-scaling","n":1000,"layout":{"r":0.1,"s":0.2},"out":"x.csv"}"#,
        )
        .unwrap();
        assert_eq!(cfg.replications, 100);
        assert_eq!(cfg.m, 1.0);
        assert_eq!(cfg.density, DensitySpec::Uniform);
        assert_eq!(cfg.n, vec![1000]);
        assert_eq!(cfg.layout.city_layout().unwrap().city_count(), 16);
        assert!(cfg.warnings.is_empty());
        assert_eq!(cfg.resolved.replications, Some(100));
    }

    #[test]
    fn non_integer_grid() {
        let err = parse_config_str(r#"{"experiment":"sandwich","n":10,"layout":{"r":0.1,"s":0.25},"out":"x"}"#)
            .unwrap_err();
        match err {
            ConfigError::Validation { field, reason } => {
                assert_eq!(field, "layout");
                assert!(reason.contains("NonIntegerGrid"), "{reason}");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn hypothesis_gate_warns() {
        let cfg = parse_config_str(r#"{"experiment":"sandwich","n":10,"layout":{"r":0.2,"s":0.2},"out":"x"}"#).unwrap();
        assert_eq!(cfg.warnings.len(), 1);
        assert!(!cfg.layout.lower_bound_enabled());
    }

    #[test]
    fn parse_error_has_position() {
        let err = parse_config_str("{\n  \"experiment\": \"a\",\n  \"n\": [1,,2]\n}").unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
        let err = parse_config_str(r#"{"experiment":"a","layout":"unconstrained","out":"x"}"#).unwrap_err();
        assert!(err.to_string().contains("missing field `n`"), "{err}");
    }

    #[test]
    fn invariants() {
        let bad = [
            (r#""n":[10,10]"#, "n"),
            (r#""n":[10],"replications":1"#, "replications"),
            (r#""n":[10],"M":0"#, "M"),
            (r#""n":[10],"density":{"kind":"cosine","delta":1.5}"#, "density.delta"),
            (r#""n":[10],"density":"gaussian""#, "density"),
        ];
        for (frag, want) in bad {
            let text = format!(r#"{{"experiment":"unconstrained","layout":"unconstrained","out":"x",{frag}}}"#);
            match parse_config_str(&text) {
                Err(ConfigError::Validation { field, .. }) => assert_eq!(field, want, "{frag}"),
                other => panic!("{frag}: {other:?}"),
            }
        }
        let disconnected = r#"{"experiment":"sandwich","n":10,"layout":{"r":0.2,"s":0.2,"cities":[[0,0],[1,1]]},"out":"x"}"#;
        assert!(matches!(
            parse_config_str(disconnected),
            Err(ConfigError::Validation { field: "layout.cities", .. })
        ));
    }

    #[test]
    fn hash_tracks_content() {
        let text = r#"{"experiment":"unconstrained","n":[10,20],"layout":"unconstrained","out":"x","seed":3}"#;
        let a = parse_config_str(text).unwrap();
        let b = parse_config_str(text).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), a.clone().with_seed(4).hash());
    }
}

//! `--config` TOML files: one table per subcommand whose keys are the
//! subcommand's long flag names. Flags given on the command line win.
//!
//! ```toml
//! [ingest]
//! margin = 250.0
//! density = 1.0
//!
//! [rasterize]
//! x-range = [-50.0, 50.0]
//! palette = "osm"
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::commands::{AlignArgs, EvaluateArgs, IngestArgs, PerturbArgs, PlotArgs, RasterizeArgs};
use crate::error::{CliError, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub ingest: Option<IngestArgs>,
    pub rasterize: Option<RasterizeArgs>,
    pub align: Option<AlignArgs>,
    pub perturb: Option<PerturbArgs>,
    pub evaluate: Option<EvaluateArgs>,
    pub plot: Option<PlotArgs>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

/// Fills every unset field of `self` from the config table.
macro_rules! merge_from_config {
    ($t:ident { $($field:ident),* $(,)? }) => {
        impl $t {
            pub fn merge(self, config: Option<$t>) -> $t {
                let config = config.unwrap_or_default();
                $t { $($field: self.$field.or(config.$field)),* }
            }
        }
    };
}
pub(crate) use merge_from_config;

/// Two comma-separated numbers on the command line, a two-element array in TOML.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(from = "[f64; 2]")]
pub struct Pair(pub f64, pub f64);

impl From<[f64; 2]> for Pair {
    fn from(v: [f64; 2]) -> Self {
        Pair(v[0], v[1])
    }
}

impl FromStr for Pair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        match parts.as_slice() {
            [a, b] => {
                let num = |t: &str| t.parse::<f64>().map_err(|_| format!("'{t}' is not a number"));
                Ok(Pair(num(a)?, num(b)?))
            }
            _ => Err(format!("expected two comma-separated numbers, got '{s}'")),
        }
    }
}

/// Which pose anchors the ego frame: one frame index, or every frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Frame(usize),
    All,
}

impl FromStr for Anchor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "all" {
            return Ok(Anchor::All);
        }
        s.parse().map(Anchor::Frame).map_err(|_| format!("anchor must be a frame index or 'all', got '{s}'"))
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Anchor::Frame(k) => write!(f, "{k}"),
            Anchor::All => f.write_str("all"),
        }
    }
}

impl<'de> Deserialize<'de> for Anchor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Index(usize),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Index(k) => Ok(Anchor::Frame(k)),
            Raw::Name(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

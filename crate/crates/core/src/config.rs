//! Optional JSON file with per-dataset defaults:
//!
//! ```json
//! { "defaults": { "t": 0.02 },
//!   "datasets": { "wine": { "normalize": "minmax", "q": 1.5, "kernel": "gaussian" } } }
//! ```
//!
//! Dataset entries are keyed by file stem and override `defaults`;
//! command-line flags override both.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::dataset::Normalization;
use crate::density::DensityKernel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetDefaults {
    pub t: Option<f64>,
    pub q: Option<f64>,
    pub kernel: Option<DensityKernel>,
    pub normalize: Option<Normalization>,
}

impl DatasetDefaults {
    fn or(self, fallback: &DatasetDefaults) -> DatasetDefaults {
        DatasetDefaults {
            t: self.t.or(fallback.t),
            q: self.q.or(fallback.q),
            kernel: self.kernel.or(fallback.kernel),
            normalize: self.normalize.or(fallback.normalize),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub defaults: DatasetDefaults,
    #[serde(default)]
    pub datasets: BTreeMap<String, DatasetDefaults>,
}

impl ConfigFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("config file: {e}")))
    }

    pub fn for_dataset(&self, name: &str) -> DatasetDefaults {
        self.datasets
            .get(name)
            .cloned()
            .unwrap_or_default()
            .or(&self.defaults)
    }
}

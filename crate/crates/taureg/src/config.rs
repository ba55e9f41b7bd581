//! TOML experiment configuration: one top-level `experiment` key selecting
//! the runner, plus one table per experiment kind.
//!
//! ```toml
//! experiment = "deconv1d"
//!
//! [deconv1d]
//! function = "F1"
//! n = 1001
//! s_blur = 0.1
//! noise_std = 0.05
//! seed = 1
//! taus = [0.0, 2.0, 10.0, 100.0]
//! rules = ["morozov", "optimal"]
//! ```

use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::{DeconvConfig, FiltersConfig, IspConfig};

/// Which experiment a config file drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Filters,
    Deconv1d,
    Isp2d,
}

/// Parsed config file.
#[derive(Debug, Clone, Deserialize)]
pub struct FileConfig {
    pub experiment: ExperimentKind,
    pub filters: Option<FiltersConfig>,
    pub deconv1d: Option<DeconvConfig>,
    pub isp2d: Option<IspConfig>,
    /// Hex SHA-256 of the raw config text, for report provenance.
    #[serde(skip)]
    pub hash: String,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg: FileConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        cfg.hash = hash_hex(text.as_bytes());
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        match self.experiment {
            ExperimentKind::Filters => {
                if let Some(f) = &self.filters {
                    f.validate()?;
                }
            }
            ExperimentKind::Deconv1d => {
                self.deconv1d
                    .as_ref()
                    .ok_or_else(|| Error::Config("missing [deconv1d] table".into()))?
                    .validate()?;
            }
            ExperimentKind::Isp2d => {
                if let Some(i) = &self.isp2d {
                    i.validate()?;
                }
            }
        }
        Ok(())
    }
}

pub fn hash_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

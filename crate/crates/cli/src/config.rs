//! Optional TOML config. Command-line flags and environment variables win
//! over anything set here.
//!
//! ```toml
//! seed = 7
//! limit = 50
//!
//! [ranking]
//! cw = 10.0
//!
//! [serve]
//! bind = "0.0.0.0:8080"
//! cors_origin = "http://localhost:5173"
//! ```

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

use screenseek_core::RankingConfig;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub limit: Option<usize>,
    pub ranking: RankingConfig,
    pub serve: ServeConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeConfig {
    pub bind: Option<String>,
    pub cors_origin: Option<String>,
    pub index: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Config =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.ranking
            .validate()
            .with_context(|| format!("config {}", path.display()))?;
        Ok(cfg)
    }
}

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

/// Optional TOML file consulted after flags and environment variables.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<PathBuf>,
    pub lexicons: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub port: Option<u16>,
    pub bind: Option<String>,
    pub threshold: Option<f64>,
    #[serde(default)]
    pub cors_origins: Vec<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Relative paths in the file resolve against the file's directory.
    pub fn resolve(mut self, path: &Path) -> Self {
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut self.model, &mut self.lexicons, &mut self.catalog]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        self
    }
}

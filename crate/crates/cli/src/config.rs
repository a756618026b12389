use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hardcoref::scoring::SCORE_LAYOUT;
use serde::Deserialize;

pub const CONFIG_ENV: &str = "HARDCOREF_CONFIG";

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub kb: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub web_cache: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
}

/// Experiment settings read from TOML. Command-line flags override them.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub variant: Option<String>,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub tau_margin: Option<f64>,
    pub shards: Option<usize>,
    pub score_layout: Option<String>,
    pub paths: Paths,
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        if let Some(layout) = &cfg.score_layout {
            if layout != SCORE_LAYOUT {
                bail!("config asks for score layout {layout}, this build provides {SCORE_LAYOUT}");
            }
        }
        // relative paths are relative to the config file
        let base = path.parent().unwrap_or(Path::new("."));
        let p = &mut cfg.paths;
        for slot in [
            &mut p.corpus,
            &mut p.train,
            &mut p.test,
            &mut p.kb,
            &mut p.model,
            &mut p.predictions,
            &mut p.web_cache,
            &mut p.lexicon,
        ] {
            if let Some(rel) = slot.as_ref().filter(|p| p.is_relative()) {
                *slot = Some(base.join(rel));
            }
        }
        Ok(cfg)
    }
}

/// Flag value, else config value, else an error naming both.
pub fn pick<T: Clone>(flag: Option<T>, config: &Option<T>, what: &str) -> Result<T> {
    match flag.or_else(|| config.clone()) {
        Some(v) => Ok(v),
        None => bail!("missing {what}: pass the flag or set it in the config file"),
    }
}

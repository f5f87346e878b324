//! Layered experiment configuration: built-in defaults, overridden by a TOML
//! config file, overridden by command-line flags. Flags win.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Failure;

/// Optional values read from `--config <file>`: a flat TOML table whose keys
/// mirror the long flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub word_length: Option<usize>,
    pub displacement: Option<f64>,
    pub max_elements: Option<usize>,
    pub a: Option<f64>,
    pub t_max: Option<f64>,
    pub samples: Option<usize>,
    pub delta: Option<f64>,
    pub deltas: Option<String>,
    pub pair: Option<String>,
    pub speed: Option<String>,
    pub integrator_step: Option<f64>,
    pub trials: Option<usize>,
    pub scan_samples: Option<usize>,
    pub orbits: Option<usize>,
    pub out: Option<PathBuf>,
    pub ball: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig, Failure> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| Failure::usage(format!("bad config {}: {e}", path.display())))
    }
}

/// `flag.or(file).unwrap_or(default)`.
pub fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>, default: T) -> T {
    flag.clone().or_else(|| file.clone()).unwrap_or(default)
}

/// Like [`pick`] but the value stays optional.
pub fn pick_opt<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}

/// Parse a comma-separated list of floats (`"0.05, 0.1"`).
pub fn parse_float_list(text: &str) -> Result<Vec<f64>, Failure> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    trimmed
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| Failure::usage(format!("bad float {part:?} in list {text:?}")))
        })
        .collect()
}

use std::path::Path;

use ner_core::crf::TrainConfig;
use ner_core::svm::SvmConfig;
use serde::Deserialize;

use crate::{CliError, Format};

/// Settings read from an optional TOML file. Command-line flags take
/// precedence over every field.
///
/// ```toml
/// seed = 7
/// split = 0.7
/// k = 10
/// format = "structured"
/// include_o = false
/// constrain_bio = true
///
/// [crf]
/// l1 = 0.1
/// l2 = 0.1
/// max_iterations = 200
///
/// [svm]
/// c = 1.0
/// ```
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Training fraction of a holdout split.
    pub split: f64,
    pub k: usize,
    pub format: Format,
    pub include_o: bool,
    pub constrain_bio: bool,
    pub repair_bio: bool,
    pub crf: TrainConfig,
    pub svm: SvmConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            split: 0.8,
            k: 10,
            format: Format::Table,
            include_o: false,
            constrain_bio: false,
            repair_bio: false,
            crf: TrainConfig::default(),
            svm: SvmConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

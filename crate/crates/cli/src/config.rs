use std::path::{Path, PathBuf};

use scenrisk::basel::BaselConfig;
use serde::Deserialize;

use crate::axioms::AxiomsSection;
use crate::measures::MeasuresSection;
use crate::output::CliError;
use crate::scenarios::ScenariosSection;

/// Per-command sections of a `--config` file. Relative paths inside it are
/// resolved against the file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub data: Option<DataSection>,
    pub basel: Option<BaselConfig>,
    pub measures: Option<MeasuresSection>,
    pub axioms: Option<AxiomsSection>,
    pub scenarios: Option<ScenariosSection>,
    #[serde(skip)]
    pub dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default = "dot")]
    pub dir: PathBuf,
    pub factors: Vec<String>,
    pub units: Vec<f64>,
    #[serde(default = "date_column")]
    pub date_column: String,
    #[serde(default = "value_column")]
    pub value_column: String,
}

fn dot() -> PathBuf {
    PathBuf::from(".")
}

pub fn date_column() -> String {
    "date".into()
}

pub fn value_column() -> String {
    "close".into()
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let mut c: ConfigFile = scenrisk::config::load_config(path)?;
        c.dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(c)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.dir.join(p)
        }
    }
}

/// Flag value, else the config value with its path resolved.
pub fn pick_path(
    flag: Option<PathBuf>,
    config: Option<&ConfigFile>,
    from_config: impl FnOnce(&ConfigFile) -> Option<PathBuf>,
) -> Option<PathBuf> {
    flag.or_else(|| config.and_then(|c| from_config(c).map(|p| c.resolve(&p))))
}

//! Experiment configuration (TOML). Schema: `docs/config.md`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::eval::DEFAULT_K_VALUES;
use crate::forest::ForestParams;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepoConfig {
    /// Local clone; relative paths resolve against the config file.
    pub path: PathBuf,
    /// Glob over tag names, e.g. `rel/commons-io-*`.
    #[serde(default = "default_tag_filter")]
    pub tag_filter: String,
    /// Label used in reports; defaults to the directory name.
    #[serde(default)]
    pub name: Option<String>,
}

impl RepoConfig {
    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            self.path
                .file_name()
                .map_or_else(|| self.path.display().to_string(), |n| n.to_string_lossy().into_owned())
        })
    }
}

fn default_tag_filter() -> String {
    "*".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestConfig {
    #[serde(default = "default_trees")]
    pub n_trees: usize,
    #[serde(default)]
    pub max_features: Option<usize>,
    #[serde(default)]
    pub max_depth: Option<usize>,
}

fn default_trees() -> usize {
    100
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: default_trees(),
            max_features: None,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub repos: Vec<RepoConfig>,
    #[serde(default = "default_k_values")]
    pub k_values: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub forest: ForestConfig,
    /// Also write each release pair's raw datasets.
    #[serde(default)]
    pub dump_datasets: bool,
}

fn default_k_values() -> Vec<usize> {
    DEFAULT_K_VALUES.to_vec()
}

fn default_folds() -> usize {
    10
}

impl ExperimentConfig {
    /// A config with defaults for everything but the repositories and output.
    pub fn new(repos: Vec<RepoConfig>, output_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            repos,
            k_values: default_k_values(),
            seed: 0,
            folds: default_folds(),
            output_dir: output_dir.into(),
            forest: ForestConfig::default(),
            dump_datasets: false,
        }
    }

    /// Parse TOML; relative paths resolve against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for r in &mut cfg.repos {
            if r.path.is_relative() {
                r.path = base_dir.join(&r.path);
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base_dir.join(&cfg.output_dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.repos.is_empty() {
            return Err(Error::Config("at least one repository is required".into()));
        }
        if self.k_values.is_empty() || self.k_values[0] == 0 {
            return Err(Error::Config("k_values must be non-empty and positive".into()));
        }
        if self.k_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("k_values must be strictly increasing".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("folds must be at least 2".into()));
        }
        if self.forest.n_trees == 0 {
            return Err(Error::Config("forest.n_trees must be at least 1".into()));
        }
        Ok(())
    }

    pub fn forest_params(&self) -> ForestParams {
        ForestParams {
            n_trees: self.forest.n_trees,
            max_features: self.forest.max_features,
            max_depth: self.forest.max_depth,
            seed: self.seed,
            ..ForestParams::default()
        }
    }

    /// SHA-256 over the canonical TOML form of the effective config.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
output_dir = "out"

[[repos]]
path = "repos/a"
tag_filter = "v*"
"#;

    #[test]
    fn defaults_and_relative_paths() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL, Path::new("/base")).unwrap();
        assert_eq!(cfg.k_values, vec![100, 500, 1000, 5000, 10000]);
        assert_eq!(cfg.folds, 10);
        assert_eq!(cfg.forest.n_trees, 100);
        assert_eq!(cfg.repos[0].path, Path::new("/base/repos/a"));
        assert_eq!(cfg.output_dir, Path::new("/base/out"));
        assert_eq!(cfg.repos[0].display_name(), "a");
    }

    #[test]
    fn rejects_bad_configs() {
        let base = Path::new("/");
        assert!(ExperimentConfig::from_toml_str("output_dir = \"o\"\nrepos = []\n", base).is_err());
        let unsorted = format!("k_values = [500, 100]\n{MINIMAL}");
        assert!(ExperimentConfig::from_toml_str(&unsorted, base).is_err());
        let unknown = format!("colour = 1\n{MINIMAL}");
        assert!(ExperimentConfig::from_toml_str(&unknown, base).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::from_toml_str(MINIMAL, Path::new("/b")).unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}

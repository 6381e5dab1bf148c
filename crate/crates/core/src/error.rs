use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the mining, dataset and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not a readable git repository: {}", .0.display())]
    NotARepository(PathBuf),

    #[error("git {command} failed: {stderr}")]
    Git { command: String, stderr: String },

    #[error("release `{from}` is not a first-parent ancestor of `{to}`")]
    NotFirstParentAncestor { from: String, to: String },

    #[error("unknown commit or tag `{0}`")]
    UnknownRevision(String),

    #[error("cannot label an empty set of modules")]
    EmptyCounts,

    #[error("feature maps disagree; missing modules: {}", .0.join(", "))]
    MissingModules(Vec<String>),

    #[error("dataset has a single label ({0}); both classes are required")]
    SingleLabel(u8),

    #[error("dataset has {rows} rows but {folds} folds were requested")]
    TooFewRows { rows: usize, folds: usize },

    #[error("feature length mismatch: model expects {expected}, row has {actual}")]
    FeatureLength { expected: usize, actual: usize },

    #[error("invalid forest parameters: {0}")]
    InvalidParams(String),

    #[error("class `{0}` missing from the method membership map")]
    UnknownClass(String),

    #[error("no LOC recorded for module `{0}`")]
    MissingLoc(String),

    #[error("paired samples differ in length ({0} vs {1})")]
    UnpairedSamples(usize, usize),

    #[error("empty sample")]
    EmptySample,

    #[error("invalid input: {0}")]
    InvalidData(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("nothing to report: {0}")]
    EmptyReport(String),

    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

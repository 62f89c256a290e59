use std::path::PathBuf;

/// Errors shared across the analysis pipeline.
///
/// Every failure carries enough context (entity, column, stage) to be
/// actionable without a debugger; downstream layers attach more via
/// `Error::Stage`.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty model: release {release} contains no classes")]
    EmptyModel { release: String },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Cell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("incomplete metric vector for {entity}: missing {metric}")]
    IncompleteVector { entity: String, metric: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("join error: {0}")]
    Join(String),

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("degenerate training data: {0}")]
    DegenerateTraining(String),

    #[error("AUC undefined: {0}")]
    UndefinedAuc(String),

    #[error("stratification error: {0}")]
    Stratification(String),

    #[error("stage {stage} failed on {key}: {source}")]
    Stage {
        stage: String,
        key: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_stage(self, stage: &str, key: &str) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            key: key.to_string(),
            source: Box::new(self),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

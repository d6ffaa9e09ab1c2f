use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid table `{name}`: {reason}")]
    Table { name: String, reason: String },
    #[error("invalid fiber: {0}")]
    Fiber(String),
    #[error("invalid channel plan: {0}")]
    Plan(String),
    #[error("invalid pump set: {0}")]
    Pumps(String),
    #[error("invalid constellation: {0}")]
    Constellation(String),
    #[error("invalid link: {0}")]
    Link(String),
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {reason}")]
    Csv { path: String, reason: String },
}

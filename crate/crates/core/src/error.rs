use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite activations in {layer}")]
    NumericFailure { layer: String },

    #[error("non-finite gradient in `{tensor}`")]
    NonFiniteGradient { tensor: String },

    #[error("weight load failed: {}", describe_load(.missing, .unexpected, .mismatched))]
    WeightLoad {
        missing: Vec<String>,
        unexpected: Vec<String>,
        mismatched: Vec<String>,
    },

    #[error("invalid weight archive: {0}")]
    Archive(String),

    #[error("schedule error: step {step} outside [0, {total}]")]
    Schedule { step: usize, total: usize },

    #[error("freeze policy error: {0}")]
    Policy(String),

    #[error("{metric} is undefined: {reason}")]
    UndefinedMetric { metric: &'static str, reason: String },

    #[error("{metric} cannot be computed: {reason}")]
    MetricDefinition { metric: &'static str, reason: String },

    #[error("ingestion error: {0}")]
    Ingestion(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("cannot decode image {path}: {source}")]
    ImageDecode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn describe_load(missing: &[String], unexpected: &[String], mismatched: &[String]) -> String {
    let mut parts = Vec::new();
    if !missing.is_empty() {
        parts.push(format!("missing [{}]", missing.join(", ")));
    }
    if !unexpected.is_empty() {
        parts.push(format!("unexpected [{}]", unexpected.join(", ")));
    }
    if !mismatched.is_empty() {
        parts.push(format!("mis-shaped [{}]", mismatched.join(", ")));
    }
    parts.join("; ")
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// A TOML parse failure, located by 1-based line.
    pub(crate) fn toml(path: &std::path::Path, text: &str, e: toml::de::Error) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            line: e.span().map(|s| text[..s.start].matches('\n').count() + 1).unwrap_or(0),
            message: e.message().to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

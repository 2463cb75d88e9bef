use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied something that violates an operation's precondition.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Cassette or fixture problem: missing entry, corrupt file, strict-replay miss.
    #[error("fixture error: {0}")]
    Fixture(String),

    #[error("provider error: {0}")]
    Provider(String),

    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },

    #[error("adapter error: {0}")]
    Adapter(String),

    #[error("model has no variables")]
    EmptyModel,

    #[error("brute force refused: {num_vars} variables exceeds the limit of {limit}")]
    LimitExceeded { num_vars: usize, limit: usize },

    #[error("no allowed label found in answer (allowed: {allowed})")]
    UnparsedAnswer { allowed: String },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// Process exit code: 1 validation, 2 fixture/replay, 3 provider/transport, 4 internal.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Input(_)
            | Error::Config(_)
            | Error::EmptyModel
            | Error::LimitExceeded { .. }
            | Error::UnparsedAnswer { .. } => 1,
            Error::Fixture(_) => 2,
            Error::Provider(_) | Error::Transport { .. } | Error::Adapter(_) => 3,
            Error::Io { .. } | Error::Json(_) | Error::Stage { .. } => 4,
        }
    }

    pub fn is_retryable(&self) -> bool {
        matches!(self.root(), Error::Transport { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_wrapping_keeps_exit_code() {
        let e = Error::Fixture("missing".into()).in_stage("sample");
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("sample"));
        let twice = e.in_stage("run");
        assert!(matches!(
            twice,
            Error::Stage {
                stage: "sample",
                ..
            }
        ));
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or mis-shaped input. `path` locates the offending field.
    #[error("input error{}: {message}", path_suffix(.path))]
    Input { path: String, message: String },

    /// A Gram matrix that is not Hermitian positive definite.
    #[error("metric error: {0}")]
    Metric(String),

    /// Parameter count, group size or builder bounds exceeded.
    #[error("resource guard: {0}")]
    Guard(String),

    /// An identity that must hold by construction did not.
    #[error("internal consistency error: {0}")]
    Consistency(String),
}

fn path_suffix(path: &str) -> String {
    if path.is_empty() {
        String::new()
    } else {
        format!(" at {path}")
    }
}

impl Error {
    pub fn input(message: impl Into<String>) -> Self {
        Error::Input { path: String::new(), message: message.into() }
    }

    pub fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Input { path: path.into(), message: message.into() }
    }
}

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An invalid configuration value (non-positive step, bad speed spec, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Group construction failed its self-checks.
    #[error("group construction failed: {0}")]
    Construction(String),

    /// Ball enumeration hit the element cap before finishing.
    #[error("ball enumeration exceeded the element cap ({count} > {cap})")]
    ResourceCap { count: usize, cap: usize },

    /// Two quotient points do not share a group handle.
    #[error("quotient points belong to different groups")]
    GroupMismatch,

    /// A cache file or config value could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

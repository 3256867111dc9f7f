use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested secrecy rate is at or above the alphabet cap, so the
    /// main channel can never support it.
    #[error("outage certain: target rate {rate} bits is not below the alphabet cap of {cap} bits")]
    OutageCertain { rate: f64, cap: f64 },

    /// The binomial sums would exceed the supported antenna-product size.
    #[error("unsupported size: N_A·N_B = {product} exceeds the limit of {limit}")]
    UnsupportedSize { product: u64, limit: u64 },

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 config, 3 numeric domain, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::Domain(_) | Error::OutageCertain { .. } | Error::UnsupportedSize { .. } => 3,
            Error::Io { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

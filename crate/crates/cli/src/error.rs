use crpc_core::CrpcError;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CrpcError),

    #[error("{0}")]
    InvalidArgs(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("certified bounds violated: {0}")]
    BoundsViolated(String),
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    code: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<serde_json::Value>,
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::InvalidArgs(_) => "InvalidArguments",
            CliError::Config(_) => "InvalidConfig",
            CliError::Io { .. } => "IoError",
            CliError::BoundsViolated(_) => "BoundsViolated",
        }
    }

    /// 1 for violated bounds, 2 for invalid input, 3 for domain and numerical
    /// failures, 4 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::BoundsViolated(_) => 1,
            CliError::InvalidArgs(_) | CliError::Config(_) => 2,
            CliError::Core(e) if e.is_invalid_input() => 2,
            CliError::Core(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_json(&self) -> String {
        let detail = match self {
            CliError::Core(CrpcError::DegenerateRatio(case)) => serde_json::to_value(case).ok(),
            _ => None,
        };
        let record = ErrorRecord {
            code: self.code(),
            message: self.to_string(),
            detail,
        };
        serde_json::to_string(&record).unwrap_or_else(|_| format!("{{\"code\":\"{}\"}}", self.code()))
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

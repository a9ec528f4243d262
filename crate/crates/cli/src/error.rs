use efpf_core::EfpfError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] EfpfError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Assert(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Assert(_) => "assert",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(EfpfError::TruncationNotConverged { .. } | EfpfError::Infeasible(_)) => {
                3
            }
            CliError::Assert(_) => 4,
            _ => 2,
        }
    }

    /// `error: kind=<kind> msg="<message>"` on one line.
    pub fn line(&self) -> String {
        let msg = self
            .to_string()
            .replace('\\', "\\\\")
            .replace('"', "\\\"")
            .replace('\n', " ");
        format!("error: kind={} msg=\"{}\"", self.kind(), msg)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn missing(flag: &str, why: &str) -> CliError {
    CliError::Usage(format!("--{flag} is required {why}"))
}

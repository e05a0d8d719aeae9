use thiserror::Error;

/// Failures surfaced by the command-line front end.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", parse_message(*.line, .key.as_deref(), .message))]
    Parse {
        line: Option<usize>,
        key: Option<String>,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("incompatible sweep: {0}")]
    IncompatibleSweep(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("dataset fingerprint mismatch: manifest has {expected}, data hashes to {found}")]
    FingerprintMismatch { expected: String, found: String },
    #[error("{context}: {source}")]
    Data {
        context: String,
        source: rflbat_core::Error,
    },
    #[error("{context}: {source}")]
    Runtime {
        context: String,
        source: rflbat_core::Error,
    },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn parse_message(line: Option<usize>, key: Option<&str>, message: &str) -> String {
    let mut out = String::from("config parse error");
    if let Some(l) = line {
        out.push_str(&format!(" at line {l}"));
    }
    if let Some(k) = key {
        out.push_str(&format!(" (key `{k}`)"));
    }
    out.push_str(": ");
    out.push_str(message);
    out
}

impl CliError {
    /// 2 config, 3 data, 4 runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. }
            | CliError::Validation(_)
            | CliError::IncompatibleSweep(_)
            | CliError::UnknownPreset(_) => 2,
            CliError::FingerprintMismatch { .. } | CliError::Data { .. } | CliError::Io { .. } => 3,
            CliError::Runtime { .. } => 4,
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    /// Sorts an engine error raised while loading or preparing data.
    pub(crate) fn from_core(context: impl Into<String>, e: rflbat_core::Error) -> Self {
        use rflbat_core::Error as E;
        let context = context.into();
        match e {
            E::InvalidConfig(m) => CliError::Validation(m),
            E::EmptyData
            | E::EmptyShard
            | E::BadMagic { .. }
            | E::CountMismatch { .. }
            | E::TruncatedFile(_)
            | E::TooFewSamples { .. }
            | E::Io(_) => CliError::Data { context, source: e },
            other => CliError::Runtime { context, source: other },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

use std::fmt;

use segcodec_core::Error as CoreError;

/// A failed command, classified by exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Unreadable or malformed input, invalid parameters. Exit 2.
    BadInput(String),
    /// Well-formed input the codec cannot handle. Exit 3.
    Domain(String),
    /// Anything else, e.g. an output that cannot be written. Exit 4.
    Internal(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::BadInput(_) => 2,
            Self::Domain(_) => 3,
            Self::Internal(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Self::BadInput(m) | Self::Domain(m) | Self::Internal(m) => m,
        }
    }

    pub fn context(self, what: impl fmt::Display) -> Self {
        match self {
            Self::BadInput(m) => Self::BadInput(format!("{what}: {m}")),
            Self::Domain(m) => Self::Domain(format!("{what}: {m}")),
            Self::Internal(m) => Self::Internal(format!("{what}: {m}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.message())
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = match &e {
            CoreError::GridTooLarge(_) => format!("GridTooLarge: {e}"),
            CoreError::PaletteExhausted { .. } => format!("PaletteExhausted: {e}"),
            _ => e.to_string(),
        };
        match e {
            CoreError::GridTooLarge(_)
            | CoreError::InvalidParameter(_)
            | CoreError::DimensionMismatch { .. }
            | CoreError::BufferSize { .. }
            | CoreError::Overlap { .. }
            | CoreError::EmptyRoi => Self::BadInput(msg),
            CoreError::PaletteExhausted { .. }
            | CoreError::EmptyEntity { .. }
            | CoreError::EmptyMask
            | CoreError::DegenerateSplit
            | CoreError::DegeneratePolygon => Self::Domain(msg),
        }
    }
}

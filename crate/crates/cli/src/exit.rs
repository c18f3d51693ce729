use std::fmt;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PROPERTY: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, or an output location that cannot be written.
    Config(String),
    Property(String),
    Resource(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Property(_) => EXIT_PROPERTY,
            CliError::Resource(_) => EXIT_RESOURCE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Property(m) => write!(f, "property failure: {m}"),
            CliError::Resource(m) => write!(f, "resource guard: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<hamf::Error> for CliError {
    fn from(e: hamf::Error) -> Self {
        use hamf::Error as E;
        match e {
            E::Resource(_) => CliError::Resource(e.to_string()),
            E::Property(_) | E::Diverged(_) | E::Divergent(_) | E::Degenerate(_) => CliError::Property(e.to_string()),
            E::InvalidParameter { .. } | E::LengthMismatch { .. } | E::UnorderedTimes { .. } => {
                CliError::Config(e.to_string())
            }
        }
    }
}

//! CLI error kinds, exit codes, and the machine-readable error record.

use std::fmt;

/// Anything that aborts a run. Each kind maps to a distinct exit code so
/// batch drivers can dispatch on failures without scraping messages.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file, or module input validation. Exit 2.
    Config(String),
    /// Filesystem failure. Exit 3.
    Io(std::io::Error),
    /// Malformed control CSV. Exit 4.
    Parse { line: usize, message: String },
    /// Undefined global phase from the distance gradient. Exit 5.
    UndefinedPhase(String),
    /// Constraint Gramian at a critical point. Exit 6.
    CriticalPoint(String),
    /// Pulse synthesis ran out of budget. Exit 7.
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Parse { .. } => 4,
            CliError::UndefinedPhase(_) => 5,
            CliError::CriticalPoint(_) => 6,
            CliError::NonConvergence(_) => 7,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Parse { .. } => "parse",
            CliError::UndefinedPhase(_) => "undefined-phase",
            CliError::CriticalPoint(_) => "critical-point",
            CliError::NonConvergence(_) => "non-convergence",
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_json(&self) -> String {
        format!(
            "{{\"error\":{{\"kind\":\"{}\",\"exit_code\":{},\"message\":\"{}\"}}}}",
            self.kind(),
            self.exit_code(),
            escape(&self.message())
        )
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) => m.clone(),
            CliError::Io(e) => e.to_string(),
            CliError::Parse { line, message } => format!("line {line}: {message}"),
            CliError::UndefinedPhase(m)
            | CliError::CriticalPoint(m)
            | CliError::NonConvergence(m) => m.clone(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

impl From<pulseopt::Error> for CliError {
    fn from(e: pulseopt::Error) -> Self {
        match e {
            pulseopt::Error::InvalidArgument(m) => CliError::Config(m),
            pulseopt::Error::Io(io) => CliError::Io(io),
            pulseopt::Error::Parse { line, message } => CliError::Parse { line, message },
            other @ pulseopt::Error::UndefinedPhase { .. } => {
                CliError::UndefinedPhase(other.to_string())
            }
            other @ pulseopt::Error::CriticalPoint { .. } => {
                CliError::CriticalPoint(other.to_string())
            }
            other @ pulseopt::Error::NonConvergence { .. } => {
                CliError::NonConvergence(other.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn escape(s: &str) -> String {
    s.chars()
        .flat_map(|c| match c {
            '"' => "\\\"".chars().collect::<Vec<_>>(),
            '\\' => "\\\\".chars().collect(),
            '\n' => "\\n".chars().collect(),
            c if (c as u32) < 0x20 => format!("\\u{:04x}", c as u32).chars().collect(),
            c => vec![c],
        })
        .collect()
}

use std::fmt;

use condldp::LdpError;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent configuration; also output
    /// directories that cannot be written.
    Config(String),
    /// Solver, conjugation or sampling failure.
    Numerical(LdpError),
    /// Checks ran but at least one verdict failed.
    Verification(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(LdpError::SolverStall {
                best_residual,
                iterations,
            }) => write!(
                f,
                "numerical error: tilt equation not solved (residual {best_residual:e} after {iterations} iterations); \
                 x0 may lie outside the range of the free-energy gradient"
            ),
            CliError::Numerical(e) => write!(f, "numerical error: {e}"),
            CliError::Verification(failed) => write!(f, "verification failed: {}", failed.join(", ")),
        }
    }
}

impl std::error::Error for CliError {}

impl From<LdpError> for CliError {
    fn from(e: LdpError) -> Self {
        CliError::Numerical(e)
    }
}

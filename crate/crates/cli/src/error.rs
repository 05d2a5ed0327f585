use shapeholo_core::Error as CoreError;

/// Exit code for malformed or physically invalid input.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit code for a failed numerical invariant.
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit code for I/O failures while writing outputs.
pub const EXIT_IO: i32 = 1;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical { invariant: String, message: String },
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical { .. } => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Numerical { invariant, message } => {
                write!(f, "numerical failure: invariant `{invariant}` violated: {message}")
            }
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let message = e.to_string();
        let invariant = match &e {
            CoreError::InvariantViolation { name, .. } => (*name).to_string(),
            CoreError::TraceOutOfRange { .. } => "trace within [-2, 2]".into(),
            CoreError::NonContracting { .. } => "Dyson contraction".into(),
            CoreError::DegenerateAbelianAngle => "non-degenerate abelian angle".into(),
            CoreError::SteeringInfeasible { .. } => "Hadamard steering feasibility".into(),
            CoreError::NotUnitary(_) => "unitarity".into(),
            CoreError::NonConvergentQuadrature { .. } => "quadrature convergence".into(),
            _ => return CliError::Validation(message),
        };
        CliError::Numerical { invariant, message }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

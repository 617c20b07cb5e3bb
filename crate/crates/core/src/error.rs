use thiserror::Error;

pub type Result<T> = std::result::Result<T, MerminError>;

/// Errors raised by the library.
///
/// Variants group into the three classes the command-line front end maps to
/// stable exit codes: validation problems, size caps, and failed
/// preconditions of the characterization procedures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MerminError {
    #[error("vector ({x}, {y}, {z}) is not unit norm (|norm - 1| = {deviation:.3e})")]
    NonUnitVector {
        x: f64,
        y: f64,
        z: f64,
        deviation: f64,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit index {index} out of range 1..={n}")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("{what} requires n <= {cap}, got n = {n}")]
    CapExceeded {
        what: &'static str,
        n: usize,
        cap: usize,
    },

    #[error("settings not orthogonal: qubit {qubit} has a.a' = {defect:.3e}")]
    NotOrthogonal { qubit: usize, defect: f64 },

    #[error(
        "state is not a maximal violator for these settings: <M_n> = {value}, required >= {required}"
    )]
    NotMaximalViolator { value: f64, required: f64 },

    #[error("extraction check failed ({equation}): {detail}")]
    ExtractionCheck {
        equation: &'static str,
        detail: String,
    },
}

impl MerminError {
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            MerminError::NonUnitVector { .. }
                | MerminError::Invalid(_)
                | MerminError::DimensionMismatch { .. }
                | MerminError::QubitOutOfRange { .. }
                | MerminError::NotHermitian { .. }
        )
    }

    pub fn is_cap(&self) -> bool {
        matches!(self, MerminError::CapExceeded { .. })
    }

    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            MerminError::NotOrthogonal { .. }
                | MerminError::NotMaximalViolator { .. }
                | MerminError::ExtractionCheck { .. }
        )
    }
}

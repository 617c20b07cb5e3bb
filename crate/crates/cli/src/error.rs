use std::fmt;

use mermin_core::MerminError;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;

/// A failed command: message plus its stable exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

impl From<MerminError> for Failure {
    fn from(e: MerminError) -> Self {
        let code = if e.is_cap() {
            EXIT_CAP
        } else if e.is_precondition() {
            EXIT_PRECONDITION
        } else {
            EXIT_VALIDATION
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

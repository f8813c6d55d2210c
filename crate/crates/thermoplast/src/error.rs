//! Error type shared across the crate.

use std::fmt;

#[derive(Debug)]
pub enum SimError {
    /// Configuration problem, with the offending key and line when known.
    Config {
        message: String,
        key: Option<String>,
        line: Option<usize>,
    },
    /// Linear solver failure with the last relative residual.
    Solve {
        context: String,
        residual: f64,
        iterations: usize,
    },
    /// Fixed-point iteration did not converge; carries the update-norm history.
    Picard {
        step: usize,
        history: Vec<f64>,
    },
    /// Mismatched grids or field sizes.
    Mismatch(String),
    Io(std::io::Error),
}

impl SimError {
    pub fn config(message: impl Into<String>) -> Self {
        SimError::Config {
            message: message.into(),
            key: None,
            line: None,
        }
    }

    pub fn config_at(message: impl Into<String>, key: impl Into<String>, line: usize) -> Self {
        SimError::Config {
            message: message.into(),
            key: Some(key.into()),
            line: Some(line),
        }
    }
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Config { message, key, line } => {
                write!(f, "config error")?;
                if let Some(line) = line {
                    write!(f, " (line {line})")?;
                }
                if let Some(key) = key {
                    write!(f, " [{key}]")?;
                }
                write!(f, ": {message}")
            }
            SimError::Solve {
                context,
                residual,
                iterations,
            } => write!(
                f,
                "solver failure: {context} (residual {residual:.3e} after {iterations} iterations)"
            ),
            SimError::Picard { step, history } => write!(
                f,
                "fixed-point iteration failed to converge at step {step} after {} iterations (last update {:.3e})",
                history.len(),
                history.last().copied().unwrap_or(f64::NAN)
            ),
            SimError::Mismatch(msg) => write!(f, "mismatch: {msg}"),
            SimError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for SimError {}

impl From<std::io::Error> for SimError {
    fn from(e: std::io::Error) -> Self {
        SimError::Io(e)
    }
}

use std::path::PathBuf;

use crate::mdp::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch on {axis}: expected {expected}, found {found}")]
    DimensionMismatch {
        axis: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid mdp: {}", format_violations(.0))]
    InvalidMdp(Vec<Violation>),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid option {index}: {reason}")]
    InvalidOption { index: usize, reason: String },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("singular matrix in `{label}`")]
    Singular { label: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("splittings solve different systems (max |A - A'| = {max_diff:e})")]
    DifferentSystems { max_diff: f64 },

    #[error("comparison hypothesis not met: fine N exceeds coarse N by {excess:e}")]
    HypothesisNotMet { excess: f64 },

    #[error("rate ordering violated: rho_fine = {rho_fine} > rho_coarse = {rho_coarse}")]
    OrderingViolated { rho_fine: f64, rho_coarse: f64 },

    #[error("insufficient history: {usable} usable residuals, need {required}")]
    InsufficientHistory { usable: usize, required: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

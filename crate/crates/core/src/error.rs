use thiserror::Error;

use crate::gamma::GammaScan;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("{}", not_hermitian_message(*.residual, *.time))]
    NotHermitian { residual: f64, time: Option<f64> },

    #[error("invalid time grid: {0}")]
    TimeGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("no minimum in range: no interior local minimum for gamma in [0, {max_mhz:.2}] MHz")]
    NoMinimum {
        max_mhz: f64,
        scan: Box<GammaScan>,
    },
}

fn not_hermitian_message(residual: f64, time: Option<f64>) -> String {
    match time {
        Some(t) => format!("Hamiltonian sample at t = {t} ns is not Hermitian (residual {residual:.3e})"),
        None => format!("operator is not Hermitian (residual {residual:.3e})"),
    }
}

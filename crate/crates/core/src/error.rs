use thiserror::Error;

use crate::algebra::AlgebraKind;

#[derive(Debug, Error)]
pub enum YmhError {
    #[error("algebra kind mismatch: {0} vs {1}")]
    KindMismatch(AlgebraKind, AlgebraKind),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("unregistered Fourier symbol `{0}`")]
    UnknownSymbol(String),

    #[error("null form Q_{{{0}{1}}} needs two distinct indices")]
    RepeatedIndex(usize, usize),

    #[error("bilinear symbol is not in tensor-product form")]
    NotTensorProduct,

    #[error("Higgs exponent p = {0} is outside [2, 5); the potential must be energy subcritical (p < 5)")]
    Exponent(f64),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid configuration at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite value encountered; last valid time t = {last_valid_time}")]
    NonFinite { last_valid_time: f64 },

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, YmhError>;

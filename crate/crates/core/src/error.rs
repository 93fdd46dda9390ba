use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("truncation ceiling of {ceiling} levels exceeded (beta = {beta}, y = {length}); temperature too high")]
    TruncationCeiling {
        ceiling: usize,
        beta: f64,
        length: f64,
    },

    #[error("unphysical cancellation in fermionic recursion for n = {n} (result sign {sign})")]
    UnphysicalCancellation { n: usize, sign: i8 },

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("classical ideal gas has no single-particle spectrum; {0} is undefined")]
    ClassicalHasNoSpectrum(&'static str),

    #[error("no bracket found for outcome m = {m}: residual never changes sign on the scan grid\n{dump}")]
    NoBracket { m: usize, dump: String },

    #[error("oracle cap exceeded: {0}")]
    OracleCap(String),

    #[error("optimal work {work} k_BT is negative")]
    NegativeOptimalWork { work: f64 },
}

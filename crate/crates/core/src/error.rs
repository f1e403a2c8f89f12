use alloc::string::String;

use crate::dense::C64;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix entry is not finite")]
    NonFinite,
    #[error(
        "rank deficient block at step {step}, column {column} (relative norm {relative_norm:e})"
    )]
    RankDeficient {
        step: usize,
        column: usize,
        relative_norm: f64,
    },
    #[error("shift {shift} is numerically an eigenvalue (pivot {pivot:e})")]
    SingularShift { shift: C64, pivot: f64 },
    #[error("eigenvector basis is ill-conditioned (condition estimate {condition:e})")]
    IllConditionedEigenbasis { condition: f64 },
    #[error("function is not defined at spectral point {point}")]
    SingularityOnSpectrum { point: C64 },
    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,
    #[error("Markov support end {beta} is not below the spectral window start {omega}")]
    SupportOverlapsSpectrum { beta: f64, omega: f64 },
    #[error("invalid spectral gap ({a}, {b})")]
    InvalidGap { a: f64, b: f64 },
    #[error("pole {pole} lies inside the spectral window")]
    PoleInsideDomain { pole: C64 },
    #[error("Blaschke factor eta = {eta} is not below one")]
    EtaNotContracting { eta: f64 },
    #[error("the last pole of the plan must be infinite")]
    LastPoleNotInfinite,
    #[error("compressed square operator lost positivity (Ritz value {ritz:e})")]
    IndefiniteSquareWindow { ritz: f64 },
    #[error("compressed Sylvester equation is not uniquely solvable")]
    CompressedNotSolvable,
    #[error("spectra of the Sylvester coefficients intersect (gap {gap:e})")]
    SpectraIntersect { gap: f64 },
    #[error("Sherman-Morrison denominator vanishes")]
    DenominatorZero,
    #[error("capacitance matrix of the rank-one rational update is singular")]
    MSingular,
    #[error("reference implementation refused size {n} (limit {limit})")]
    OracleTooLarge { n: usize, limit: usize },
    #[error("function has no Markov representation on the requested support")]
    NotMarkov,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("no admissible subinterval left: {0}")]
    InfeasibleWindow(String),
    #[error("certificate rejected by verification: {0}")]
    CertificateRejected(String),
    #[error("exact resonance ||2θ+nα|| = 0 at n = {n}")]
    DegenerateExactResonance { n: i64 },
    #[error("exact palindrome d(RT^n g, g) = 0 at n = {n}")]
    DegenerateExactPalindrome { n: i64 },
    #[error("site {n} outside stored window [{lo}, {hi}]")]
    OutOfWindow { n: i64, lo: i64, hi: i64 },
    #[error("log scale overflow in cocycle product")]
    Overflow,
    #[error("eigensolver did not converge at index {index}")]
    ConvergenceFailure { index: usize },
    #[error("dimension {dim} exceeds configured maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("too few usable points for a fit: {points}")]
    DegenerateFit { points: usize },
    #[error("eta = {eta} outside [0, ln λ - ε) = [0, {upper})")]
    EtaOutOfRange { eta: f64, upper: f64 },
    #[error("same-side bound requires a certified sine floor")]
    HypothesisNotCertified,
    #[error("grid value {l} exceeds trust region {trust}")]
    GridExceedsTrustRegion { l: i64, trust: i64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("p = {0} is not prime")]
    NotPrime(u32),

    #[error("dimension n must be at least 1")]
    ZeroDimension,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected} coordinates, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("digit window needs {needed} digits but the cap is {cap}")]
    WindowOverflow { needed: usize, cap: usize },

    #[error("value has order {order} below the window floor {low}")]
    BelowWindow { order: i64, low: i64 },

    #[error("symbol certificate violated at shell {shell}: A(p^{shell}) = {value} not in [{lower}, {upper}]")]
    CertificateViolation {
        shell: i64,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("symbol value at shell {shell} must be positive and finite, got {value}")]
    NonPositiveSymbol { shell: i64, value: f64 },

    #[error("symbol table has no entry for shell {0}")]
    MissingShell(i64),

    #[error("weight w(p^j) is not strictly increasing between shells {0} and {1}")]
    WeightNotIncreasing(i64, i64),

    #[error("series diverges: Re(s) must exceed the abscissa {abscissa}")]
    DivergentRegion { abscissa: f64 },

    #[error("s = {re} + {im}i is the pole n/beta + 2 pi i {k} / (beta ln p)")]
    Pole { re: f64, im: f64, k: i64 },

    #[error("no meromorphic continuation available: {0}")]
    NotEventuallyPower(String),

    #[error("need at least {needed} shells below the threshold, found {found}")]
    TooFewShells { found: usize, needed: usize },

    #[error("time parameter must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("multiplicity p^(n m) overflows 128 bits at shell {0}")]
    MultiplicityOverflow(u32),

    #[error("level needs {needed} {what} but the cap is {cap}")]
    LevelCapExceeded {
        what: &'static str,
        needed: u128,
        cap: usize,
    },

    #[error("wavelet at gamma = {gamma} is finer than level K = {level}")]
    ScaleTooFine { gamma: i64, level: u32 },

    #[error("function is not mean-zero: integral = {0:e}")]
    NotMeanZero(f64),

    #[error("series did not reach tolerance {tol:e} within {shells} shells")]
    NoConvergence { tol: f64, shells: u32 },

    #[error("{0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by evaluating outside a function's domain
    /// (poles, divergent series, excluded strips).
    pub fn is_math_domain(&self) -> bool {
        matches!(
            self,
            Error::DivergentRegion { .. }
                | Error::Pole { .. }
                | Error::NotEventuallyPower(_)
                | Error::NoConvergence { .. }
        )
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine can report.
///
/// Variants carrying a `String` hold a rendered certificate (a residual or a
/// remainder) so that callers can print diagnostics without a tower at hand.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid declaration: {0}")]
    InvalidDeclaration(String),
    #[error("operand shape violates precondition: {0}")]
    MixedOperand(String),
    #[error("operator normal form is zero")]
    ZeroOperator,
    #[error("operator is not of the form Dx*Dy + a*Dx + b*Dy + c: {0}")]
    NotSchrodinger(String),
    #[error("Laplace invariant {invariant} vanishes; the {direction} transformation does not exist")]
    VanishingInvariant {
        invariant: &'static str,
        direction: &'static str,
    },
    #[error("element is not in the kernel; residual {residual}")]
    NotInKernel { residual: String },
    #[error("source/target mismatch: {0}")]
    SourceTargetMismatch(String),
    #[error("intertwining relation fails; residual {residual}")]
    IntertwiningFailed { residual: String },
    #[error("no first-order solution; inconsistent constraint {residual}")]
    NoSolution { residual: String },
    #[error("denominator Wronskian vanishes")]
    DegenerateWronskian,
    #[error("kernel element not certified: {0}")]
    NotCertified(String),
    #[error("invalid Wronskian split: {0}")]
    InvalidSplit(String),
    #[error("witness is not a common kernel element; remainder {remainder}")]
    WitnessInvalid { remainder: String },
    #[error("nonzero remainder {remainder} when dividing {what}")]
    NonzeroRemainder { what: &'static str, remainder: String },
    #[error("operator is factorizable (Laplace invariant {invariant} = 0); out of scope")]
    FactorizableOperator { invariant: &'static str },
    #[error("Laplace chain too short: needs {needed_left} left or {needed_right} right, extends {left} left and {right} right")]
    ChainTooShort {
        needed_left: usize,
        needed_right: usize,
        left: usize,
        right: usize,
    },
    #[error("no split applies: {0}")]
    StuckNoSplit(String),
    #[error("transformation of order zero cannot be factored into first-order steps")]
    OrderZero,
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "DivisionByZero",
            Error::InvalidDeclaration(_) => "InvalidDeclaration",
            Error::MixedOperand(_) => "MixedOperandError",
            Error::ZeroOperator => "ZeroOperator",
            Error::NotSchrodinger(_) => "NotSchrodinger",
            Error::VanishingInvariant { .. } => "VanishingInvariant",
            Error::NotInKernel { .. } => "NotInKernel",
            Error::SourceTargetMismatch(_) => "SourceTargetMismatch",
            Error::IntertwiningFailed { .. } => "IntertwiningFailed",
            Error::NoSolution { .. } => "NoSolution",
            Error::DegenerateWronskian => "DegenerateWronskian",
            Error::NotCertified(_) => "NotCertified",
            Error::InvalidSplit(_) => "InvalidSplit",
            Error::WitnessInvalid { .. } => "WitnessInvalid",
            Error::NonzeroRemainder { .. } => "NonzeroRemainder",
            Error::FactorizableOperator { .. } => "FactorizableOperator",
            Error::ChainTooShort { .. } => "ChainTooShort",
            Error::StuckNoSplit(_) => "StuckNoSplit",
            Error::OrderZero => "OrderZero",
        }
    }

    /// Mathematical failures (as opposed to malformed input).
    pub fn is_mathematical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidDeclaration(_)
                | Error::MixedOperand(_)
                | Error::NotSchrodinger(_)
                | Error::InvalidSplit(_)
                | Error::SourceTargetMismatch(_)
        )
    }
}

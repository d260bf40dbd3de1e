use thiserror::Error;

/// Errors raised by the certified computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An enclosure touched a region where the operation is undefined.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// Every escalation step still failed to produce a usable enclosure.
    #[error("precision exhausted after {escalations} escalations (last working precision {bits} bits)")]
    PrecisionExhausted { bits: u32, escalations: u32 },

    /// A certified ceiling or floor stayed indeterminate at the highest precision tried.
    #[error("certified rounding still indeterminate after {escalations} escalations ({bits} bits)")]
    Indeterminate { bits: u32, escalations: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A series would need more terms than the evaluator is willing to sum.
    #[error("truncation limit exceeded: {0}")]
    Truncation(String),

    /// A formula produced a value that its own derivation rules out.
    #[error("formula violated: {0}")]
    FormulaViolated(String),

    #[error("no crossing of h(s) = p_next - 1 for n = {n}: {detail}")]
    NoCrossing { n: usize, detail: String },

    #[error("enclosure of h(s) too wide to decide the sign at s = {s} (n = {n})")]
    EnclosureTooWide { n: usize, s: f64 },

    #[error("step {index} failed: {source}")]
    Step { index: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { op, detail: detail.into() }
    }

    pub(crate) fn at_step(self, index: usize) -> Self {
        Error::Step { index, source: Box::new(self) }
    }

    /// The innermost error, looking through `Step` wrappers.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root_cause(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

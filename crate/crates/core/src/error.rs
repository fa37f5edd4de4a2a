use thiserror::Error;

/// Crate-wide error type. Overflow and budget exhaustion are reported, never
/// silently wrapped or truncated.
#[derive(Debug, Error)]
pub enum Error {
    /// An exact integer result does not fit the widened representation.
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    /// A table would exceed the configured memory budget.
    #[error("memory budget exceeded: need ~{required} bytes, budget {budget}")]
    MemoryBudget { required: u64, budget: u64 },

    /// An enumeration visited more nodes than the configured work budget.
    #[error("work budget exhausted: visited {visited} nodes, budget {budget}")]
    WorkBudget { visited: u64, budget: u64 },

    /// The subset decomposition produced a non-integral factor. This would
    /// falsify the decomposition identity; the offending input is attached.
    #[error("non-integral decomposition factor for subset mask {subset:#b} of tuple {tuple:?}")]
    NonIntegralFactor { tuple: Vec<u64>, subset: u32 },

    /// A verified identity failed on a concrete input. This falsifies the
    /// implementation, not the identity; the counterexample is attached.
    #[error("invariant `{which}` failed for tuple {tuple:?}")]
    InvariantViolation { tuple: Vec<u64>, which: &'static str },

    /// Invalid argument or configuration.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A binary table dump failed validation on load.
    #[error("bad table dump: {0}")]
    BadDump(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the planner library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value (schedule, limits, parameters) is unusable.
    #[error("configuration error: {0}")]
    Config(String),

    /// The instance violates one of its load-time invariants.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// An assignment map does not cover every BTS exactly once, or names unknown sites.
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    /// An assignment overloads a BSC beyond every available capacity.
    #[error("infeasible assignment: BSC {bsc} carries {traffic_erl:.3} Erl, exceeding {limit}")]
    InfeasibleAssignment {
        bsc: u32,
        traffic_erl: f64,
        limit: String,
    },

    /// No assignment satisfies the capacity constraints.
    #[error("instance is infeasible: {0}")]
    Infeasible(String),

    /// A search limit was hit before any feasible design was found.
    #[error("no feasible design found before the search limit")]
    NoSolutionWithinLimits,

    /// The solution handed to an operation is not feasible.
    #[error("infeasible solution: {0}")]
    InfeasibleSolution(String),

    /// Brute-force enumeration would exceed the configured cap.
    #[error("enumeration of {assignments} assignments exceeds the cap of {cap}")]
    EnumerationTooLarge { assignments: f64, cap: u64 },

    #[error("unsupported file format {found:?}, expected {expected:?}")]
    Format { found: String, expected: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

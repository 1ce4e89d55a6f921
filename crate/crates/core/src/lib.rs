//! Cost-optimal design of the GSM base station subsystem.
//!
//! The crate decides which BSC serves each BTS, which controller model every
//! opened BSC receives and how many E1 trunks connect it to the MSC, so that
//! Abis link, trunk and equipment costs are minimal. Trunks are dimensioned
//! with Erlang B ([`traffic`]); designs are solved exactly by branch and bound
//! ([`exact`]) or approximately with greedy construction, local search and a
//! Lagrangian lower bound ([`heuristic`]).
//!
//! ```
//! use bss_core::{exact, generate, GenParams, SolveLimits};
//!
//! let instance = generate::generate(&GenParams::new(6, 7)).unwrap();
//! let report = exact::solve_exact(&instance, &SolveLimits::default()).unwrap();
//! assert!(report.optimal);
//! ```

pub mod error;
pub mod exact;
pub mod generate;
pub mod heuristic;
pub mod io;
pub mod model;
pub mod scaling;
pub mod traffic;

pub use error::{Error, Result};
pub use exact::{SolveLimits, SolveReport};
pub use generate::GenParams;
pub use heuristic::{HeuristicReport, Multipliers, StepRule};
pub use model::{
    Assignment, BscCandidate, BscConfig, BscModel, BtsNode, CostBreakdown, CostRates, Instance,
    Site, Solution, Violation,
};
pub use scaling::{BenchRecord, ExpFit, ScalingConfig, SolveMode};
pub use traffic::{CapacityTable, Gos, TimeslotSchedule};

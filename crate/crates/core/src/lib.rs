//! Biobjective inventory routing.
//!
//! Delivery decisions are encoded as a per-customer frequency vector. Each
//! vector induces a deterministic inventory trajectory and one capacitated
//! VRP per period; the two objectives are total carried inventory and total
//! routing distance. The Pareto set is approximated by a multi-point
//! hillclimber whose effort is steered by reference points in normalized
//! objective space.
//!
//! Module map:
//! - [`model`]: instances, frequency vectors, validation, objective vectors
//! - [`inventory`]: the delivery-quantity rule and inventory flow simulation
//! - [`evaluate`]: turning a frequency vector into a full [`Solution`]
//! - [`vrp`]: savings construction, record-to-record travel, exact oracle
//! - [`pareto`]: nondominated archive, normalization, reference points
//! - [`search`]: construction procedure, ±1 neighborhood hillclimber
//! - [`benchgen`]: multi-period demand scenario generator
//! - [`io`]: instance, routing problem, archive and run bundle formats

pub mod benchgen;
pub mod error;
pub mod evaluate;
pub mod inventory;
pub mod io;
pub mod model;
pub mod pareto;
pub mod search;
pub mod vrp;

pub use error::{Error, Result};
pub use evaluate::{evaluate, EvalSettings, Evaluator, Solution, VrpSolver};
pub use inventory::{delivery_quantity, simulate_inventory, InventoryTrajectory};
pub use model::{
    validate_instance, Customer, FrequencyVector, Instance, ObjectiveVector, Point,
    ValidationReport, Violation,
};
pub use pareto::{
    build_reference_points, chebyshev_distance, select_representatives, Archive, ArchiveEntry,
    NormalizedPoint, Normalizer, ReferencePointSet, Weights,
};
pub use search::{neighborhood, Budget, Search, SearchConfig, SearchStats, SolverKind, Termination};
pub use vrp::{RoutingProblem, RoutingSolution, Route, RtrConfig, Stop};

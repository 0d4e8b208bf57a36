//! Solver library for two-player energy and mean-payoff games on finite
//! graphs: quantitative strategy templates (QaSTels), bounded qualitative
//! templates (PeSTels), conflict-free mixed templates (MiSTels), hot-started
//! incremental re-synthesis, runtime strategy adaptation under edge failures,
//! and multi-mean-payoff strategy combination.

pub mod error;
pub mod fixpoint;
pub mod format;
pub mod game;
pub mod mistel;
pub mod multi;
pub mod pestel;
pub mod qastel;
pub mod runtime;
pub mod value;
pub mod verify;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{GraphError, TemplateError};
pub use fixpoint::{EdgeValues, FixpointStats, NodeValues};
pub use game::{EdgeId, EdgeSet, GameGraph, NodeId, NodeSet, ObjectiveSpec, Player, PlayPrefix};
pub use mistel::{compute_mistel, extract_mixed_strategy, incremental_mistel, Mistel, MistelState};
pub use multi::{combine_qastel, CombinedStrategy, MultiMpProblem};
pub use pestel::{co_buechi_template, safety_template, BoundedPestel};
pub use qastel::{compute_qastel, Compliance, PositionalStrategy, Qastel};
pub use value::Value;

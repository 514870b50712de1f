//! Coalition structure generation for induced subgraph games.
//!
//! Starting from the grand coalition, coalitions are repeatedly bipartitioned
//! along a weighted minimum cut for as long as splitting does not lose value.
//! The per-step cut is found exhaustively, by a classical QUBO solver, or by a
//! simulated p-layer QAOA circuit. Exact baselines and a benchmark harness are
//! included.

pub mod bench;
pub mod driver;
pub mod error;
pub mod exact;
pub mod game;
pub mod qaoa;
pub mod qubo;

pub use error::{Error, Result};
pub use game::{cs_value, generate_game, Coalition, CoalitionStructure, GameSpec, IsGame, WeightDistribution};

//! Round-based simulator for cluster-based spectrum-sensing report delivery in
//! cognitive radio sensor networks.
//!
//! Two reporting protocols are modelled: the baseline, where every cluster
//! head sends its aggregated bit straight to the fusion centre, and a
//! tree-relay protocol, where cluster heads exchange sensing tables along a
//! minimum spanning tree and each head picks the cheaper of a direct report or
//! a hop toward the fusion centre.

pub mod cli;
pub mod clustering;
pub mod energy;
pub mod engine;
pub mod model;
pub mod routing;
pub mod sweep;

pub use engine::{
    run_simulation, MetricsRow, RoundOutcome, SimError, Simulation, SimulationResult,
};
pub use model::{Clustering, EnergyParams, NodeState, Position, Protocol, ScenarioConfig};

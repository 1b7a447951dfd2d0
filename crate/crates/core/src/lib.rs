//! Exact-arithmetic minimum-cost flow laboratory.
//!
//! Builds recursive counting gadgets on which the Successive Shortest Path
//! algorithm and the Network Simplex algorithm (Dantzig's pivot rule) need
//! exponentially many iterations, runs both algorithms with full traces, and
//! decides PARTITION instances by watching a single arc during those runs.

pub mod exactnum;
pub mod experiments;
pub mod export;
pub mod flownet;
pub mod gadgets;
pub mod netsimplex;
pub mod ssp;

pub use exactnum::{common_granularity, Capacity, ExactError, Rational};
pub use flownet::{
    flow_cost, residual_network, validate_network, Arc, ArcId, ArcStep, Direction, Flow, Network,
    NetworkBuilder, NetworkError, Node, NodeId, ResidualArc,
};

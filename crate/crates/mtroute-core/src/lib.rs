//! Delay-bounded multi-topology routing.
//!
//! The crate discovers edge-disjoint logical topologies of a network by
//! searching a time-expanded (layered) copy of it, routes flows over the
//! longest path that still meets their delay bound, and provides the
//! shortest-path and LP-optimal baselines plus the utilization and MOS metrics
//! used to compare them.
//!
//! Everything here is pure computation over `alloc` collections; file formats,
//! the CLI and the experiment driver live in the `mtroute` crate.

#![no_std]

extern crate alloc;

pub mod baselines;
pub mod error;
pub mod flow;
pub mod graph;
pub mod layered;
pub mod lp;
pub mod qoe;
pub mod scenario;
mod search;
pub mod topologies;

pub use error::{Error, Result};
pub use graph::{Link, LinkId, LinkLoadMap, Network, NetworkBuilder, Node, NodeId, NodeKind, Path};

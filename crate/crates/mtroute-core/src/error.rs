use alloc::string::String;

use crate::graph::NodeId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("unknown node id `{0}`")]
    UnknownNode(String),
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("duplicate link {src} -> {dst}")]
    DuplicateLink { src: String, dst: String },
    #[error("link {src} -> {dst}: capacity must be a positive finite number, got {capacity}")]
    InvalidCapacity {
        src: String,
        dst: String,
        capacity: f64,
    },
    #[error("link {src} -> {dst}: delay must be a positive integer number of ms")]
    InvalidDelay { src: String, dst: String },
    #[error("links do not form a path: {0}")]
    BrokenPath(&'static str),
    #[error("path revisits node {0:?}")]
    NotSimple(NodeId),
    #[error("weight map has {got} entries, network has {expected} links")]
    WeightCount { expected: usize, got: usize },
    #[error("link weights must be finite and non-negative")]
    InvalidWeight,
    #[error("origin and destination are the same node")]
    SameEndpoints,
    #[error("load must be finite and non-negative, got {0}")]
    InvalidLoad(f64),
    #[error("layered horizon must be at least 1, got {0}")]
    InvalidHorizon(u32),
    #[error("malformed layered path: {0}")]
    LayeredPath(&'static str),
    #[error("source {0:?} has no outgoing arcs in the layered graph: no topologies")]
    NoTopologies(NodeId),
    #[error("invalid demand: {0}")]
    InvalidDemand(&'static str),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("interval {interval} outside configured range {first}..={last}")]
    IntervalOutOfRange { interval: u32, first: u32, last: u32 },
    #[error("optimal MRC is not positive, performance ratio undefined")]
    UndefinedRatio,
    #[error("flow count must be at least 1")]
    ZeroFlows,
    #[error("LP solver failure: {0}")]
    Solver(&'static str),
}

//! Sublinear testers for bipartiteness and cycle-freeness of bounded-degree
//! graphs, where closeness is measured against an arbitrary vertex
//! distribution available through sampling and evaluation oracles. Includes
//! effective support size estimation for such distributions, exact
//! brute-force reference oracles, and a batch experiment harness.

#![forbid(unsafe_code)]

pub mod cycle;
pub mod dist;
pub mod error;
pub mod estimate;
pub mod exact;
pub mod graph;
pub mod harness;
pub mod walk;

pub use dist::{OracleSession, TrimmedDistribution, VertexDistribution};
pub use error::{Error, Result, ValidationKind};
pub use graph::{BoundedDegreeGraph, ExploredSubgraph, FamilyKind, InstanceFamily, Vertex};
pub use walk::{Decision, QueryStats, Verdict, WalkConfig, WalkParams};

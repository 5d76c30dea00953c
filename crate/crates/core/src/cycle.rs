//! Cycle-freeness tester: reduce to generalized 2-coloring by labeling each
//! edge eq or neq uniformly at random. A forest is legally colorable under
//! every labeling, while a graph far from cycle-free gets, with constant
//! probability over the labeling, an instance far from colorable.

use crate::dist::{OracleSession, VertexDistribution};
use crate::error::{Error, Result};
use crate::estimate::rough_estimate;
use crate::graph::{BoundedDegreeGraph, Vertex};
use crate::walk::{gen2col_core, Decision, LabelOracle, Verdict, WalkConfig};

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Uniform eq/neq label per canonical edge, as a keyed hash: symmetric,
/// stable within a run, independent across seeds. No edge set is stored.
#[derive(Debug, Clone, Copy)]
pub struct EdgeLabeler {
    seed: u64,
}

impl EdgeLabeler {
    pub fn new(seed: u64) -> Self {
        EdgeLabeler { seed }
    }
}

impl LabelOracle for EdgeLabeler {
    fn label(&self, u: Vertex, v: Vertex) -> u8 {
        let a = u.min(v) as u64;
        let b = u.max(v) as u64;
        let h = splitmix64(splitmix64(self.seed ^ a).wrapping_add(b));
        ((h >> 32) & 1) as u8
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleConfig {
    /// The inner proximity parameter is kappa * eps / log2(n + 2).
    pub kappa: f64,
    /// Independent relabel-and-test repetitions; reject iff any rejects.
    pub repetitions: u32,
    pub walk: WalkConfig,
}

impl Default for CycleConfig {
    fn default() -> Self {
        CycleConfig { kappa: 0.125, repetitions: 4, walk: WalkConfig::default() }
    }
}

/// Cycle-freeness tester with an injectable labeler per repetition; the
/// public tester passes seeded `EdgeLabeler`s. Exposed so regression tests
/// can force all-neq labels and compare transcripts with the bipartiteness
/// tester.
pub fn test_cycle_free_with<L, F>(
    g: &BoundedDegreeGraph,
    dist: &VertexDistribution,
    eps: f64,
    seed: u64,
    config: &CycleConfig,
    make_labeler: F,
) -> Result<Verdict>
where
    L: LabelOracle,
    F: Fn(u32) -> L,
{
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Usage(format!("eps must be in (0, 1), got {}", eps)));
    }
    if !(config.kappa > 0.0 && config.kappa <= 1.0) {
        return Err(Error::Usage(format!("kappa must be in (0, 1], got {}", config.kappa)));
    }
    let mut session = OracleSession::new(g.vertex_count(), seed);
    let est = rough_estimate(dist, eps / 16.0, &mut session)?;
    let bound = 2 * est.estimate;
    let eps_inner = config.kappa * eps / ((bound + 2) as f64).log2();
    for rep in 0..config.repetitions.max(1) {
        let labeler = make_labeler(rep);
        let verdict =
            gen2col_core(g, &labeler, dist, eps_inner, bound, &mut session, &config.walk)?;
        if verdict.decision == Decision::Reject {
            return Ok(verdict);
        }
        if rep + 1 == config.repetitions.max(1) {
            return Ok(verdict);
        }
    }
    unreachable!("repetition loop always returns")
}

/// One-sided cycle-freeness tester. Each repetition draws a fresh random
/// labeling and tests generalized 2-colorability at proximity
/// kappa * eps / log2(n + 2); any detected odd-parity labeled cycle is a real
/// cycle of the graph, so forests are never rejected.
pub fn test_cycle_free(
    g: &BoundedDegreeGraph,
    dist: &VertexDistribution,
    eps: f64,
    seed: u64,
    config: &CycleConfig,
) -> Result<Verdict> {
    test_cycle_free_with(g, dist, eps, seed, config, |rep| {
        EdgeLabeler::new(splitmix64(seed ^ ((rep as u64 + 1) << 32)))
    })
}

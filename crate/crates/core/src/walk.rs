//! Random-walk testers for bipartiteness and generalized eq/neq 2-coloring
//! under a vertex distribution known only through oracles: rejection-sampled
//! start vertices, distribution-weighted walk steps, and one-sided rejection
//! on a parity-inconsistent explored subgraph.

use rand::Rng;
use serde::Serialize;

use crate::dist::{OracleSession, TrimmedDistribution, VertexDistribution};
use crate::error::{Error, Result};
use crate::estimate::rough_estimate;
use crate::graph::{
    check_parity_consistency, BoundedDegreeGraph, ExploredSubgraph, ParityDsu, ParityOutcome,
    Vertex,
};

/// Tunable schedule constants. Only the shape of the schedule is fixed:
/// starts scale with 1/eps, walks per start with sqrt(n) polylog(n), and the
/// walk length with polylog(n)/eps.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    /// starts = ceil(starts_per_eps / eps).
    pub starts_per_eps: f64,
    /// walks_per_start = ceil(walk_multiplier * sqrt(n) * log2(n+2) * eps^-walk_eps_exponent).
    pub walk_multiplier: f64,
    pub walk_eps_exponent: f64,
    /// walk_length = ceil(length_multiplier * (log2(n+2) / eps)^length_exponent).
    pub length_multiplier: f64,
    pub length_exponent: f64,
    /// Schedules are derived at max(eps, eps_floor); keeps composed callers
    /// that shrink eps by log factors from exploding the schedule.
    pub eps_floor: f64,
    /// Start-sampling trials before concluding the effective graph is empty.
    pub start_retry_cap: u64,
    /// Full schedule repetitions; reject if any repetition rejects.
    pub repetitions: u32,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            starts_per_eps: 4.0,
            walk_multiplier: 1.0 / 512.0,
            walk_eps_exponent: 0.0,
            length_multiplier: 0.75,
            length_exponent: 1.0,
            eps_floor: 0.1,
            start_retry_cap: 10_000,
            repetitions: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkParams {
    pub starts: usize,
    pub walks_per_start: usize,
    pub walk_length: usize,
}

impl WalkParams {
    pub fn derive(eps: f64, n: usize, config: &WalkConfig) -> WalkParams {
        let e = eps.max(config.eps_floor);
        let logn = ((n + 2) as f64).log2();
        let starts = (config.starts_per_eps / e).ceil() as usize;
        let walks = (config.walk_multiplier * (n as f64).sqrt() * logn
            / e.powf(config.walk_eps_exponent))
        .ceil() as usize;
        let len = (config.length_multiplier * (logn / e).powf(config.length_exponent)).ceil()
            as usize;
        WalkParams {
            starts: starts.max(1),
            walks_per_start: walks.max(1),
            walk_length: len.max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Accept,
    Reject,
}

/// Raw counters are actual oracle calls; cache hits are lookups answered from
/// the per-run memo without spending a query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub sample_queries: u64,
    pub eval_queries: u64,
    pub graph_queries: u64,
    pub eval_cache_hits: u64,
    pub graph_cache_hits: u64,
    pub wall_ms: u64,
}

impl QueryStats {
    pub fn total_oracle_queries(&self) -> u64 {
        self.sample_queries + self.eval_queries + self.graph_queries
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub decision: Decision,
    /// Present exactly on rejection: a closed walk of explored edges whose
    /// parity bits sum to 1.
    pub witness: Option<Vec<(Vertex, Vertex, u8)>>,
    pub stats: QueryStats,
    /// Support bound the run used (given, or estimated by the composition).
    pub support_bound: usize,
    /// Set when start sampling found no mass on non-isolated vertices and
    /// the run accepted vacuously.
    pub no_start_flag: bool,
}

/// Per-edge constraint labels: 0 means "endpoints equal", 1 "endpoints
/// differ". Implementations must be symmetric and stable within a run.
pub trait LabelOracle {
    fn label(&self, u: Vertex, v: Vertex) -> u8;
}

/// Labels every edge "differ": plain bipartiteness.
pub struct AllNeq;

impl LabelOracle for AllNeq {
    fn label(&self, _u: Vertex, _v: Vertex) -> u8 {
        1
    }
}

/// Per-run memo of oracle answers: D-values and adjacency lists are queried
/// once per vertex, repeat visits are cache hits.
struct RunCaches {
    probs: Vec<Option<f64>>,
    adj: Vec<Option<Vec<Vertex>>>,
    eval_hits: u64,
    graph_hits: u64,
}

impl RunCaches {
    fn new(n: usize) -> Self {
        RunCaches {
            probs: vec![None; n + 1],
            adj: vec![None; n + 1],
            eval_hits: 0,
            graph_hits: 0,
        }
    }

    fn prob(
        &mut self,
        dist: &VertexDistribution,
        session: &mut OracleSession,
        v: Vertex,
    ) -> Result<f64> {
        if let Some(p) = self.probs[v] {
            self.eval_hits += 1;
            return Ok(p);
        }
        let p = session.evaluate(dist, v)?;
        self.probs[v] = Some(p);
        Ok(p)
    }

    fn neighbors(
        &mut self,
        g: &BoundedDegreeGraph,
        session: &mut OracleSession,
        v: Vertex,
    ) -> Result<Vec<Vertex>> {
        if let Some(ns) = &self.adj[v] {
            self.graph_hits += 1;
            return Ok(ns.clone());
        }
        let mut ns = Vec::new();
        for slot in 1..=g.degree_bound() {
            match session.graph_query(g, v, slot)? {
                Some(u) => ns.push(u),
                None => break,
            }
        }
        self.adj[v] = Some(ns.clone());
        Ok(ns)
    }
}

fn sample_start_cached(
    g: &BoundedDegreeGraph,
    trimmed: &TrimmedDistribution,
    session: &mut OracleSession,
    caches: &mut RunCaches,
    retry_cap: u64,
) -> Result<Vertex> {
    let two_d = 2.0 * g.degree_bound() as f64;
    for _ in 0..retry_cap {
        let s = trimmed.sample(session)?;
        let nbrs = caches.neighbors(g, session, s)?;
        let keep = nbrs.len() as f64 / two_d;
        let coin: f64 = session.rng().gen();
        if coin < keep {
            return Ok(s);
        }
        if coin < 2.0 * keep {
            let pick = session.rng().gen_range(0..nbrs.len());
            return Ok(nbrs[pick]);
        }
    }
    Err(Error::NoStartVertex)
}

/// Draw one start vertex: sample s from the trimmed distribution, emit s
/// with probability deg(s)/2d, a uniform neighbor of s with the same
/// probability, and retry otherwise. The per-trial marginal of vertex v is
/// sum over u in Gamma(v) of (D'(v)+D'(u))/2d.
pub fn sample_start_vertex(
    g: &BoundedDegreeGraph,
    trimmed: &TrimmedDistribution,
    session: &mut OracleSession,
) -> Result<Vertex> {
    let mut caches = RunCaches::new(g.vertex_count());
    sample_start_cached(g, trimmed, session, &mut caches, WalkConfig::default().start_retry_cap)
}

fn walk_step_cached(
    g: &BoundedDegreeGraph,
    dist: &VertexDistribution,
    trimmed: &TrimmedDistribution,
    session: &mut OracleSession,
    caches: &mut RunCaches,
    v: Vertex,
) -> Result<Option<Vertex>> {
    let nbrs = caches.neighbors(g, session, v)?;
    if nbrs.is_empty() {
        return Ok(None);
    }
    let pv = trimmed.masked(caches.prob(dist, session, v)?);
    let mut weights = Vec::with_capacity(nbrs.len());
    let mut total = 0.0f64;
    for &u in &nbrs {
        let w = pv + trimmed.masked(caches.prob(dist, session, u)?);
        weights.push(w);
        total += w;
    }
    if total <= 0.0 {
        return Ok(None);
    }
    let mut x: f64 = session.rng().gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        x -= w;
        if x <= 0.0 {
            return Ok(Some(nbrs[i]));
        }
    }
    Ok(Some(*nbrs.last().expect("nonempty")))
}

/// Move from v to a neighbor u with probability proportional to
/// D'(v) + D'(u), where D' masks out trimmed atoms. `None` when v has no
/// neighbors (or no positively-weighted incident edge): the walk dead-ends.
pub fn walk_step(
    g: &BoundedDegreeGraph,
    dist: &VertexDistribution,
    trimmed: &TrimmedDistribution,
    session: &mut OracleSession,
    v: Vertex,
) -> Result<Option<Vertex>> {
    let mut caches = RunCaches::new(g.vertex_count());
    walk_step_cached(g, dist, trimmed, session, &mut caches, v)
}

struct ScheduleOutcome {
    decision: Decision,
    witness: Option<Vec<(Vertex, Vertex, u8)>>,
    no_start: bool,
}

fn run_schedule<L: LabelOracle + ?Sized>(
    g: &BoundedDegreeGraph,
    labeler: &L,
    dist: &VertexDistribution,
    trimmed: &TrimmedDistribution,
    params: &WalkParams,
    session: &mut OracleSession,
    caches: &mut RunCaches,
    retry_cap: u64,
) -> Result<ScheduleOutcome> {
    let mut explored = ExploredSubgraph::new();
    let mut dsu = ParityDsu::new(g.vertex_count() + 1);
    for _ in 0..params.starts {
        let start = match sample_start_cached(g, trimmed, session, caches, retry_cap) {
            Ok(s) => s,
            Err(Error::NoStartVertex) => {
                return Ok(ScheduleOutcome {
                    decision: Decision::Accept,
                    witness: None,
                    no_start: true,
                })
            }
            Err(e) => return Err(e),
        };
        for _ in 0..params.walks_per_start {
            let mut v = start;
            for _ in 0..params.walk_length {
                let u = match walk_step_cached(g, dist, trimmed, session, caches, v)? {
                    Some(u) => u,
                    None => break,
                };
                let bit = labeler.label(v, u);
                explored.push(v, u, bit);
                if !dsu.union(v, u, bit) {
                    let witness = match check_parity_consistency(&explored) {
                        ParityOutcome::OddCycle(w) => w,
                        ParityOutcome::Consistent => {
                            unreachable!("incremental and batch parity checks disagree")
                        }
                    };
                    return Ok(ScheduleOutcome {
                        decision: Decision::Reject,
                        witness: Some(witness),
                        no_start: false,
                    });
                }
                v = u;
            }
        }
    }
    Ok(ScheduleOutcome { decision: Decision::Accept, witness: None, no_start: false })
}

fn stats_from(session: &OracleSession, caches: &RunCaches) -> QueryStats {
    QueryStats {
        sample_queries: session.sample_queries(),
        eval_queries: session.eval_queries(),
        graph_queries: session.graph_queries(),
        eval_cache_hits: caches.eval_hits,
        graph_cache_hits: caches.graph_hits,
        wall_ms: 0,
    }
}

pub(crate) fn gen2col_core<L: LabelOracle + ?Sized>(
    g: &BoundedDegreeGraph,
    labeler: &L,
    dist: &VertexDistribution,
    eps: f64,
    support_bound: usize,
    session: &mut OracleSession,
    config: &WalkConfig,
) -> Result<Verdict> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Usage(format!("eps must be in (0, 1), got {}", eps)));
    }
    if support_bound == 0 {
        return Err(Error::Usage("support bound must be positive".into()));
    }
    // Trim at effectiveness eps/4 and run the schedule at proximity eps/2:
    // the trimmed distribution is within 2*(eps/4) of the original, so a
    // graph eps-far from colorable under D stays eps/2-far under D'.
    let trimmed = TrimmedDistribution::new(dist, eps / 4.0, support_bound)?;
    let params = WalkParams::derive(eps / 2.0, support_bound, config);
    let mut caches = RunCaches::new(g.vertex_count());
    let mut flagged = false;
    for _ in 0..config.repetitions.max(1) {
        let out = run_schedule(
            g,
            labeler,
            dist,
            &trimmed,
            &params,
            session,
            &mut caches,
            config.start_retry_cap,
        )?;
        flagged |= out.no_start;
        if out.decision == Decision::Reject {
            return Ok(Verdict {
                decision: Decision::Reject,
                witness: out.witness,
                stats: stats_from(session, &caches),
                support_bound,
                no_start_flag: false,
            });
        }
    }
    Ok(Verdict {
        decision: Decision::Accept,
        witness: None,
        stats: stats_from(session, &caches),
        support_bound,
        no_start_flag: flagged,
    })
}

/// Test 2-colorability under eq/neq edge constraints, given an upper bound
/// on the minimal eps/4-effective support size of the distribution.
/// One-sided: legally colorable instances are always accepted.
pub fn test_generalized_2coloring<L: LabelOracle + ?Sized>(
    g: &BoundedDegreeGraph,
    labeler: &L,
    dist: &VertexDistribution,
    eps: f64,
    support_bound: usize,
    seed: u64,
    config: &WalkConfig,
) -> Result<Verdict> {
    let mut session = OracleSession::new(g.vertex_count(), seed);
    gen2col_core(g, labeler, dist, eps, support_bound, &mut session, config)
}

/// Bipartiteness with an explicit support bound: the all-neq special case.
pub fn test_bipartite_with_bound(
    g: &BoundedDegreeGraph,
    dist: &VertexDistribution,
    eps: f64,
    support_bound: usize,
    seed: u64,
    config: &WalkConfig,
) -> Result<Verdict> {
    test_generalized_2coloring(g, &AllNeq, dist, eps, support_bound, seed, config)
}

/// Full bipartiteness tester: estimates the support bound from the oracles
/// (doubling estimator at effectiveness eps/16, doubled for margin), then
/// runs the bounded tester. The estimate can only affect the schedule and
/// trim threshold, so a wrong estimate never rejects a bipartite graph.
pub fn test_bipartite(
    g: &BoundedDegreeGraph,
    dist: &VertexDistribution,
    eps: f64,
    seed: u64,
    config: &WalkConfig,
) -> Result<Verdict> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Usage(format!("eps must be in (0, 1), got {}", eps)));
    }
    let mut session = OracleSession::new(g.vertex_count(), seed);
    let est = rough_estimate(dist, eps / 16.0, &mut session)?;
    let bound = 2 * est.estimate;
    gen2col_core(g, &AllNeq, dist, eps, bound, &mut session, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{
        cycle_graph, generate_instance, is_bipartite, path_graph, validate_witness, FamilyKind,
        InstanceFamily,
    };

    fn uniform_on(n: usize) -> VertexDistribution {
        VertexDistribution::uniform(n).unwrap()
    }

    /// A trim that keeps everything: threshold far below any atom.
    fn no_trim(d: &VertexDistribution) -> TrimmedDistribution<'_> {
        TrimmedDistribution::new(d, 1e-9, 1).unwrap()
    }

    #[test]
    fn start_vertex_marginal_matches_closed_form() {
        let g = path_graph(3, 2).unwrap();
        let d = VertexDistribution::new(vec![0.5, 0.3, 0.2]).unwrap();
        let t = no_trim(&d);
        let mut session = OracleSession::new(3, 17);
        let mut counts = [0usize; 3];
        let draws = 100_000;
        for _ in 0..draws {
            counts[sample_start_vertex(&g, &t, &mut session).unwrap() - 1] += 1;
        }
        let expected = [0.2 / 0.65, 0.325 / 0.65, 0.125 / 0.65];
        let tv: f64 = counts
            .iter()
            .zip(&expected)
            .map(|(&c, &e)| (c as f64 / draws as f64 - e).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv <= 0.01, "tv {}", tv);
    }

    #[test]
    fn start_vertex_on_single_edge_is_uniform() {
        let g = BoundedDegreeGraph::from_edges(2, 1, &[(1, 2)]).unwrap();
        let d = VertexDistribution::new(vec![1.0, 0.0]).unwrap();
        let t = no_trim(&d);
        let mut session = OracleSession::new(2, 3);
        let mut ones = 0usize;
        let draws = 20_000;
        for _ in 0..draws {
            if sample_start_vertex(&g, &t, &mut session).unwrap() == 1 {
                ones += 1;
            }
        }
        let f = ones as f64 / draws as f64;
        assert!((0.47..=0.53).contains(&f), "frequency {}", f);
    }

    #[test]
    fn isolated_support_yields_no_start_vertex() {
        let g = BoundedDegreeGraph::from_edges(3, 2, &[(1, 2)]).unwrap();
        let d = VertexDistribution::point_mass(3, 3).unwrap();
        let t = no_trim(&d);
        let mut session = OracleSession::new(3, 0);
        match sample_start_vertex(&g, &t, &mut session) {
            Err(Error::NoStartVertex) => {}
            other => panic!("expected NoStartVertex, got {:?}", other),
        }
    }

    #[test]
    fn walk_step_weights_are_proportional() {
        // Path 1-2-3 plus an isolated heavy vertex to make the masses sum
        // to one; stepping from 2 goes to 1 w.p. (0.2+0.3)/0.8 = 5/8.
        let g = BoundedDegreeGraph::from_edges(4, 2, &[(1, 2), (2, 3)]).unwrap();
        let d = VertexDistribution::new(vec![0.3, 0.2, 0.1, 0.4]).unwrap();
        let t = no_trim(&d);
        let mut session = OracleSession::new(4, 23);
        let mut to_one = 0usize;
        let steps = 100_000;
        for _ in 0..steps {
            match walk_step(&g, &d, &t, &mut session, 2).unwrap() {
                Some(1) => to_one += 1,
                Some(3) => {}
                other => panic!("unexpected step {:?}", other),
            }
        }
        let f = to_one as f64 / steps as f64;
        assert!((f - 0.625).abs() <= 0.01, "frequency {}", f);
    }

    #[test]
    fn walk_step_with_single_positive_neighbor_is_forced() {
        let g = BoundedDegreeGraph::from_edges(4, 3, &[(1, 2), (1, 3), (1, 4)]).unwrap();
        let d = VertexDistribution::point_mass(4, 2).unwrap();
        let t = no_trim(&d);
        let mut session = OracleSession::new(4, 5);
        for _ in 0..500 {
            assert_eq!(walk_step(&g, &d, &t, &mut session, 1).unwrap(), Some(2));
        }
    }

    #[test]
    fn walk_step_dead_ends_on_isolated_vertex() {
        let g = BoundedDegreeGraph::from_edges(2, 1, &[]).unwrap();
        let d = uniform_on(2);
        let t = no_trim(&d);
        let mut session = OracleSession::new(2, 5);
        assert_eq!(walk_step(&g, &d, &t, &mut session, 1).unwrap(), None);
    }

    #[test]
    fn bipartite_graphs_are_always_accepted() {
        let config = WalkConfig::default();
        for seed in 0..30 {
            let fam = InstanceFamily {
                kind: FamilyKind::RandomBipartite,
                size: 60,
                degree_bound: 3,
                seed,
            };
            let g = generate_instance(&fam).unwrap();
            assert!(is_bipartite(&g));
            let d = uniform_on(60);
            let v = test_bipartite(&g, &d, 0.3, seed * 7 + 1, &config).unwrap();
            assert_eq!(v.decision, Decision::Accept, "seed {}", seed);
            assert!(v.witness.is_none());
        }
    }

    #[test]
    fn odd_cycle_is_rejected_reliably_with_witness() {
        let config = WalkConfig::default();
        let g = cycle_graph(5, 2).unwrap();
        let d = uniform_on(5);
        let mut rejects = 0;
        for seed in 0..60 {
            let v = test_bipartite_with_bound(&g, &d, 0.3, 5, seed, &config).unwrap();
            if v.decision == Decision::Reject {
                rejects += 1;
                let w = v.witness.expect("reject carries witness");
                assert!(validate_witness(&g, &w));
            }
        }
        assert!(rejects >= 55, "only {}/60 rejections", rejects);
    }

    #[test]
    fn heavy_core_with_light_tail_is_rejected_after_trimming() {
        // A 9-cycle holding 0.99 of the mass, plus a long path holding 0.01:
        // with bound 9 the trim threshold (0.3/4)/9 cuts the tail entirely.
        let core = 9usize;
        let tail = 2_000usize;
        let n = core + tail;
        let mut edges: Vec<(Vertex, Vertex)> = (1..core).map(|v| (v, v + 1)).collect();
        edges.push((core, 1));
        for v in core + 1..n {
            edges.push((v, v + 1));
        }
        let g = BoundedDegreeGraph::from_edges(n, 2, &edges).unwrap();
        let mut w = vec![0.01 / tail as f64; n];
        for item in w.iter_mut().take(core) {
            *item = 0.99 / core as f64;
        }
        let d = VertexDistribution::from_weights(w).unwrap();
        let config = WalkConfig::default();
        let mut rejects = 0;
        for seed in 0..60 {
            let v = test_bipartite_with_bound(&g, &d, 0.3, core, seed, &config).unwrap();
            if v.decision == Decision::Reject {
                rejects += 1;
            }
        }
        assert!(rejects >= 55, "only {}/60 rejections", rejects);
    }

    #[test]
    fn all_eq_labels_always_accept() {
        struct AllEq;
        impl LabelOracle for AllEq {
            fn label(&self, _u: Vertex, _v: Vertex) -> u8 {
                0
            }
        }
        let g = cycle_graph(5, 2).unwrap();
        let d = uniform_on(5);
        let config = WalkConfig::default();
        for seed in 0..30 {
            let v = test_generalized_2coloring(&g, &AllEq, &d, 0.3, 5, seed, &config).unwrap();
            assert_eq!(v.decision, Decision::Accept);
        }
    }

    #[test]
    fn single_neq_edge_on_even_cycle_is_rejected() {
        // C_4 with exactly one neq edge has odd constraint parity around the
        // cycle, so the instance is far from legally colorable.
        struct OneNeq;
        impl LabelOracle for OneNeq {
            fn label(&self, u: Vertex, v: Vertex) -> u8 {
                if (u.min(v), u.max(v)) == (1, 2) {
                    1
                } else {
                    0
                }
            }
        }
        let g = cycle_graph(4, 2).unwrap();
        let d = uniform_on(4);
        let config = WalkConfig::default();
        let mut rejects = 0;
        for seed in 0..60 {
            let v = test_generalized_2coloring(&g, &OneNeq, &d, 0.3, 4, seed, &config).unwrap();
            if v.decision == Decision::Reject {
                rejects += 1;
            }
        }
        assert!(rejects >= 55, "only {}/60 rejections", rejects);
    }

    #[test]
    fn all_neq_matches_bipartite_transcript_exactly() {
        let g = cycle_graph(7, 2).unwrap();
        let d = uniform_on(7);
        let config = WalkConfig::default();
        for seed in 0..10 {
            let a = test_bipartite_with_bound(&g, &d, 0.4, 7, seed, &config).unwrap();
            let b = test_generalized_2coloring(&g, &AllNeq, &d, 0.4, 7, seed, &config).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn fixed_seed_reproduces_the_verdict() {
        let g = cycle_graph(9, 2).unwrap();
        let d = uniform_on(9);
        let config = WalkConfig::default();
        let a = test_bipartite(&g, &d, 0.3, 424242, &config).unwrap();
        let b = test_bipartite(&g, &d, 0.3, 424242, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn isolated_mass_accepts_with_flag() {
        let g = BoundedDegreeGraph::from_edges(3, 2, &[(1, 2)]).unwrap();
        let d = VertexDistribution::point_mass(3, 3).unwrap();
        let config = WalkConfig::default();
        let v = test_bipartite_with_bound(&g, &d, 0.3, 1, 5, &config).unwrap();
        assert_eq!(v.decision, Decision::Accept);
        assert!(v.no_start_flag);
    }

    #[test]
    fn degenerate_trim_is_an_error() {
        // Uniform mass over 1000 atoms against a support bound of 5: the
        // trim threshold (eps/4)/5 exceeds every atom.
        let edges = cycle_graph(5, 2).unwrap().edges();
        let g = BoundedDegreeGraph::from_edges(1000, 2, &edges).unwrap();
        let d = uniform_on(1000);
        match test_bipartite_with_bound(&g, &d, 0.4, 5, 1, &WalkConfig::default()) {
            Err(Error::DegenerateDistribution(_)) => {}
            other => panic!("expected degenerate trim, got {:?}", other),
        }
    }

    #[test]
    fn query_accounting_separates_raw_from_cached() {
        let g = cycle_graph(5, 2).unwrap();
        let d = uniform_on(5);
        let v = test_bipartite_with_bound(&g, &d, 0.3, 5, 9, &WalkConfig::default()).unwrap();
        // Five vertices cost at most 5 evals and 10 slot queries raw; the
        // rest of the schedule hits the memo.
        assert!(v.stats.eval_queries <= 5);
        assert!(v.stats.graph_queries <= 10);
        assert!(v.stats.eval_cache_hits > v.stats.eval_queries);
    }

    #[test]
    fn session_locality_is_clean_after_runs() {
        let g = cycle_graph(9, 2).unwrap();
        let d = uniform_on(9);
        let mut session = OracleSession::new(9, 77);
        let _ = gen2col_core(&g, &AllNeq, &d, 0.3, 9, &mut session, &WalkConfig::default())
            .unwrap();
        assert_eq!(session.locality_violations(), 0);
    }

    #[test]
    fn schedule_derivation_respects_floor_and_shape() {
        let c = WalkConfig::default();
        let p = WalkParams::derive(0.3, 1000, &c);
        assert_eq!(p.starts, (4.0f64 / 0.3).ceil() as usize);
        assert!(p.walk_length >= 1 && p.walks_per_start >= 1);
        let tiny = WalkParams::derive(0.001, 1000, &c);
        let floor = WalkParams::derive(c.eps_floor, 1000, &c);
        assert_eq!(tiny, floor);
    }
}

//! Exact reference machinery for desk-scale verification: brute-force
//! distribution-weighted distances to bipartiteness / legal 2-colorability,
//! the exact max-weight-forest distance to cycle-freeness, the explicit
//! parallel-edge multigraph behind the walk analysis, and exhaustive
//! labeling-gap measurement for the cycle-freeness reduction.

use std::collections::VecDeque;

use serde::Serialize;

use crate::dist::{OracleSession, TrimmedDistribution, VertexDistribution};
use crate::error::{Error, Result};
use crate::graph::{BoundedDegreeGraph, ParityDsu, Vertex};
use crate::walk::{walk_step, LabelOracle};

/// Hard cap on brute-force 2-coloring enumeration, per connected component
/// of the positively-weighted subgraph.
const COLORING_CAP: usize = 24;

/// Canonical edge weight: 2 * (D(u) + D(v)) / d.
pub fn edge_weight(dist: &VertexDistribution, degree_bound: usize, u: Vertex, v: Vertex) -> f64 {
    2.0 * (dist.probs()[u - 1] + dist.probs()[v - 1]) / degree_bound as f64
}

fn kahan_sorted_sum(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for x in xs {
        let y = x - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMethod {
    BruteForce,
    ExactForest,
    ExhaustiveSubset,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceReport {
    /// Total weight of the removed edges; zero iff the instance has the
    /// property.
    pub distance: f64,
    pub removed_edges: Vec<(Vertex, Vertex)>,
    pub method: DistanceMethod,
}

fn report(mut removed: Vec<(Vertex, Vertex)>, dist: &VertexDistribution, d: usize, method: DistanceMethod) -> DistanceReport {
    removed.sort();
    let weights: Vec<f64> = removed.iter().map(|&(u, v)| edge_weight(dist, d, u, v)).collect();
    DistanceReport { distance: kahan_sorted_sum(weights), removed_edges: removed, method }
}

/// Positively-weighted edges, and their connected components. Only these
/// edges can contribute to any distance, so brute force enumerates colorings
/// component by component.
struct WeightedCore {
    components: Vec<Vec<Vertex>>,
    component_edges: Vec<Vec<(Vertex, Vertex)>>,
}

fn weighted_core(g: &BoundedDegreeGraph, dist: &VertexDistribution) -> WeightedCore {
    let edges: Vec<(Vertex, Vertex)> = g
        .edges()
        .into_iter()
        .filter(|&(u, v)| dist.probs()[u - 1] + dist.probs()[v - 1] > 0.0)
        .collect();
    let n = g.vertex_count();
    let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); n + 1];
    let mut active = vec![false; n + 1];
    for &(u, v) in &edges {
        adj[u].push(v);
        adj[v].push(u);
        active[u] = true;
        active[v] = true;
    }
    let mut comp_id = vec![usize::MAX; n + 1];
    let mut components: Vec<Vec<Vertex>> = Vec::new();
    for s in 1..=n {
        if !active[s] || comp_id[s] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut comp = vec![s];
        comp_id[s] = id;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if comp_id[y] == usize::MAX {
                    comp_id[y] = id;
                    comp.push(y);
                    queue.push_back(y);
                }
            }
        }
        components.push(comp);
    }
    let mut component_edges: Vec<Vec<(Vertex, Vertex)>> = vec![Vec::new(); components.len()];
    for &(u, v) in &edges {
        component_edges[comp_id[u]].push((u, v));
    }
    WeightedCore { components, component_edges }
}

/// Minimize total violated-edge weight over all 2-colorings of one
/// component. An edge with bit 1 is violated when its endpoints match; with
/// bit 0 when they differ. Returns the removed edges of the first optimal
/// coloring in mask order.
fn min_violation_component(
    comp: &[Vertex],
    edges: &[(Vertex, Vertex, u8)],
    dist: &VertexDistribution,
    d: usize,
) -> Result<(f64, Vec<(Vertex, Vertex)>)> {
    if comp.len() > COLORING_CAP {
        return Err(Error::Cap(format!(
            "{} weighted vertices in one conflicted component exceeds the brute-force cap {}",
            comp.len(),
            COLORING_CAP
        )));
    }
    let index = |v: Vertex| comp.iter().position(|&x| x == v).expect("endpoint in component");
    let mut best_cost = f64::INFINITY;
    let mut best_removed: Vec<(Vertex, Vertex)> = Vec::new();
    // The first vertex's color is fixed; complement colorings cost the same.
    for mask in 0u64..(1u64 << (comp.len() - 1)) {
        let color = |v: Vertex| -> bool {
            let i = index(v);
            i > 0 && (mask >> (i - 1)) & 1 == 1
        };
        let mut removed = Vec::new();
        let mut weights = Vec::new();
        for &(u, v, bit) in edges {
            let same = color(u) == color(v);
            if if bit == 1 { same } else { !same } {
                removed.push((u, v));
                weights.push(edge_weight(dist, d, u, v));
            }
        }
        let cost = kahan_sorted_sum(weights);
        if cost < best_cost {
            best_cost = cost;
            best_removed = removed;
        }
        if best_cost == 0.0 {
            break;
        }
    }
    Ok((best_cost, best_removed))
}

fn min_violation(
    g: &BoundedDegreeGraph,
    dist: &VertexDistribution,
    bit_of: impl Fn(Vertex, Vertex) -> u8,
) -> Result<Vec<(Vertex, Vertex)>> {
    let core = weighted_core(g, dist);
    let mut removed = Vec::new();
    for (comp, edges) in core.components.iter().zip(&core.component_edges) {
        let labeled: Vec<(Vertex, Vertex, u8)> =
            edges.iter().map(|&(u, v)| (u, v, bit_of(u, v))).collect();
        // A parity-consistent component is legally colorable at zero cost;
        // only conflicted components need enumeration (and face the cap).
        let mut dsu = ParityDsu::new(g.vertex_count() + 1);
        if labeled.iter().all(|&(u, v, bit)| dsu.union(u, v, bit)) {
            continue;
        }
        let (_, mut r) = min_violation_component(comp, &labeled, dist, g.degree_bound())?;
        removed.append(&mut r);
    }
    Ok(removed)
}

/// Exact distance to bipartiteness: the minimum, over all 2-colorings, of
/// the total weight of monochromatic edges.
pub fn bipartite_distance(
    g: &BoundedDegreeGraph,
    dist: &VertexDistribution,
) -> Result<DistanceReport> {
    let removed = min_violation(g, dist, |_, _| 1)?;
    Ok(report(removed, dist, g.degree_bound(), DistanceMethod::BruteForce))
}

/// Exact distance to legal 2-colorability under eq/neq labels: an edge is
/// violated when its endpoints match and it is labeled neq (1), or differ
/// and it is labeled eq (0).
pub fn gen2col_distance<L: LabelOracle + ?Sized>(
    g: &BoundedDegreeGraph,
    labels: &L,
    dist: &VertexDistribution,
) -> Result<DistanceReport> {
    let removed = min_violation(g, dist, |u, v| labels.label(u, v))?;
    Ok(report(removed, dist, g.degree_bound(), DistanceMethod::BruteForce))
}

/// Exact distance to cycle-freeness: total edge weight minus a maximum
/// weight spanning forest (greedy works because forests form a matroid).
/// Ties are broken by canonical edge order, so the removed set is
/// deterministic.
pub fn cyclefree_distance(g: &BoundedDegreeGraph, dist: &VertexDistribution) -> DistanceReport {
    let mut edges = g.edges();
    edges.sort_by(|&(a, b), &(c, d)| {
        edge_weight(dist, g.degree_bound(), c, d)
            .total_cmp(&edge_weight(dist, g.degree_bound(), a, b))
            .then(a.cmp(&c))
            .then(b.cmp(&d))
    });
    let mut dsu = ParityDsu::new(g.vertex_count() + 1);
    let mut removed = Vec::new();
    for (u, v) in edges {
        let (ru, _) = dsu.find(u);
        let (rv, _) = dsu.find(v);
        if ru == rv {
            removed.push((u, v));
        } else {
            dsu.union(u, v, 0);
        }
    }
    report(removed, dist, g.degree_bound(), DistanceMethod::ExactForest)
}

/// Cross-check oracle: minimize removed weight over all 2^|E| edge subsets
/// whose removal leaves a forest.
pub fn cyclefree_distance_exhaustive(
    g: &BoundedDegreeGraph,
    dist: &VertexDistribution,
) -> Result<DistanceReport> {
    let edges = g.edges();
    if edges.len() > 16 {
        return Err(Error::Cap(format!(
            "{} edges exceeds the exhaustive-subset cap 16",
            edges.len()
        )));
    }
    let mut best_cost = f64::INFINITY;
    let mut best_removed: Vec<(Vertex, Vertex)> = Vec::new();
    for mask in 0u32..(1u32 << edges.len()) {
        let mut dsu = ParityDsu::new(g.vertex_count() + 1);
        let mut acyclic = true;
        for (k, &(u, v)) in edges.iter().enumerate() {
            if (mask >> k) & 1 == 1 {
                continue;
            }
            let (ru, _) = dsu.find(u);
            let (rv, _) = dsu.find(v);
            if ru == rv {
                acyclic = false;
                break;
            }
            dsu.union(u, v, 0);
        }
        if !acyclic {
            continue;
        }
        let removed: Vec<(Vertex, Vertex)> =
            edges.iter().enumerate().filter(|(k, _)| (mask >> k) & 1 == 1).map(|(_, &e)| e).collect();
        let cost = kahan_sorted_sum(
            removed.iter().map(|&(u, v)| edge_weight(dist, g.degree_bound(), u, v)).collect(),
        );
        if cost < best_cost {
            best_cost = cost;
            best_removed = removed;
        }
    }
    Ok(report(best_removed, dist, g.degree_bound(), DistanceMethod::ExhaustiveSubset))
}

/// The explicit multigraph of the walk analysis: each edge {u,v} becomes
/// round((D'(u) + D'(v)) * N) parallel edges.
#[derive(Debug, Clone)]
pub struct MentalMultigraph {
    pub scale: u64,
    /// Canonical edges with positive multiplicity.
    pub multiplicities: Vec<((Vertex, Vertex), u64)>,
    /// Vertices with positive multidegree.
    pub retained: Vec<Vertex>,
    /// Indexed by vertex id; zero for dropped vertices.
    pub multidegree: Vec<u64>,
}

fn round_half_up(x: f64) -> u64 {
    (x + 0.5).floor() as u64
}

pub fn build_mental_multigraph(
    g: &BoundedDegreeGraph,
    trimmed: &TrimmedDistribution,
    scale: u64,
) -> Result<MentalMultigraph> {
    let mut rho = f64::INFINITY;
    for v in 1..=g.vertex_count() {
        let p = trimmed.prob(v)?;
        if p > 0.0 && p < rho {
            rho = p;
        }
    }
    if !rho.is_finite() {
        return Err(Error::Scale("trimmed distribution has empty support".into()));
    }
    if (scale as f64) * rho < 10.0 {
        return Err(Error::Scale(format!(
            "scale {} times minimum weight {} is below 10; multiplicities would vanish",
            scale, rho
        )));
    }
    let mut multiplicities = Vec::new();
    let mut multidegree = vec![0u64; g.vertex_count() + 1];
    for (u, v) in g.edges() {
        let m = round_half_up((trimmed.prob(u)? + trimmed.prob(v)?) * scale as f64);
        if m > 0 {
            multiplicities.push(((u, v), m));
            multidegree[u] += m;
            multidegree[v] += m;
        }
    }
    let retained: Vec<Vertex> = (1..=g.vertex_count()).filter(|&v| multidegree[v] > 0).collect();
    Ok(MentalMultigraph { scale, multiplicities, retained, multidegree })
}

impl MentalMultigraph {
    pub fn multiplicity(&self, u: Vertex, v: Vertex) -> u64 {
        let key = (u.min(v), u.max(v));
        self.multiplicities
            .iter()
            .find(|&&(e, _)| e == key)
            .map(|&(_, m)| m)
            .unwrap_or(0)
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.multiplicities.iter().map(|&(_, m)| m).sum()
    }
}

/// Empirical total-variation distance between the implemented walk step at v
/// and the exact degree-proportional step on the explicit multigraph.
pub fn walk_equivalence_check(
    g: &BoundedDegreeGraph,
    dist: &VertexDistribution,
    trimmed: &TrimmedDistribution,
    scale: u64,
    v: Vertex,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mg = build_mental_multigraph(g, trimmed, scale)?;
    if mg.multidegree[v] == 0 {
        return Err(Error::Scale(format!("vertex {} is not retained in the multigraph", v)));
    }
    let nbrs = g.neighbors(v).to_vec();
    let dv = mg.multidegree[v] as f64;
    let exact: Vec<f64> = nbrs.iter().map(|&u| mg.multiplicity(v, u) as f64 / dv).collect();
    let mut counts = vec![0usize; nbrs.len()];
    let mut session = OracleSession::new(g.vertex_count(), seed);
    session.reveal(v);
    for _ in 0..samples {
        match walk_step(g, dist, trimmed, &mut session, v)? {
            Some(u) => {
                let k = nbrs.iter().position(|&x| x == u).expect("step stays adjacent");
                counts[k] += 1;
            }
            None => return Err(Error::Scale("walk dead-ends at a retained vertex".into())),
        }
    }
    let tv = exact
        .iter()
        .zip(&counts)
        .map(|(&e, &c)| (e - c as f64 / samples as f64).abs())
        .sum::<f64>()
        / 2.0;
    Ok(tv)
}

/// Minimum count of monochromatic parallel edges over all 2-colorings of the
/// multigraph's retained vertices.
pub fn min_monochromatic_multiplicity(mg: &MentalMultigraph) -> Result<u64> {
    let k = mg.retained.len();
    if k > COLORING_CAP {
        return Err(Error::Cap(format!(
            "{} retained vertices exceeds the brute-force cap {}",
            k, COLORING_CAP
        )));
    }
    if k == 0 {
        return Ok(0);
    }
    let index = |v: Vertex| mg.retained.iter().position(|&x| x == v).unwrap();
    let mut best = u64::MAX;
    for mask in 0u64..(1u64 << (k - 1)) {
        let color = |v: Vertex| -> bool {
            let i = index(v);
            i > 0 && (mask >> (i - 1)) & 1 == 1
        };
        let mono: u64 = mg
            .multiplicities
            .iter()
            .filter(|&&((u, v), _)| color(u) == color(v))
            .map(|&(_, m)| m)
            .sum();
        best = best.min(mono);
        if best == 0 {
            break;
        }
    }
    Ok(best)
}

/// Labels edges by the bits of a mask over a fixed canonical edge list.
pub struct MaskLabeler<'a> {
    edges: &'a [(Vertex, Vertex)],
    mask: u64,
}

impl<'a> MaskLabeler<'a> {
    pub fn new(edges: &'a [(Vertex, Vertex)], mask: u64) -> Self {
        MaskLabeler { edges, mask }
    }
}

impl LabelOracle for MaskLabeler<'_> {
    fn label(&self, u: Vertex, v: Vertex) -> u8 {
        let key = (u.min(v), u.max(v));
        match self.edges.iter().position(|&e| e == key) {
            Some(k) => ((self.mask >> k) & 1) as u8,
            None => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapStatistics {
    /// The distance bar eps / (8 * log2 |V|).
    pub threshold: f64,
    /// Fraction of labelings whose instance distance reaches the bar.
    pub fraction_at_threshold: f64,
    /// Fraction with any positive distance at all.
    pub fraction_positive: f64,
    /// Distinct distances with their labeling counts, ascending.
    pub histogram: Vec<(f64, usize)>,
    pub labelings: usize,
}

fn gap_from_distances(distances: Vec<f64>, threshold: f64) -> GapStatistics {
    let labelings = distances.len();
    let at = distances.iter().filter(|&&x| x >= threshold).count();
    let pos = distances.iter().filter(|&&x| x > 0.0).count();
    let mut sorted = distances;
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut histogram: Vec<(f64, usize)> = Vec::new();
    for x in sorted {
        match histogram.last_mut() {
            Some((y, c)) if *y == x => *c += 1,
            _ => histogram.push((x, 1)),
        }
    }
    GapStatistics {
        threshold,
        fraction_at_threshold: at as f64 / labelings as f64,
        fraction_positive: pos as f64 / labelings as f64,
        histogram,
        labelings,
    }
}

/// Exhaustive reduction-gap measurement: distance of (G, labeling) to legal
/// 2-colorability for every labeling of the edges, against the bar
/// eps / (8 * log2 |V|).
pub fn reduction_gap_experiment(
    g: &BoundedDegreeGraph,
    dist: &VertexDistribution,
    eps: f64,
) -> Result<GapStatistics> {
    let edges = g.edges();
    if edges.len() > 16 {
        return Err(Error::Cap(format!(
            "{} edges exceeds the exhaustive labeling cap 16",
            edges.len()
        )));
    }
    let threshold = eps / (8.0 * (g.vertex_count() as f64).log2());
    let mut distances = Vec::with_capacity(1 << edges.len());
    for mask in 0u64..(1u64 << edges.len()) {
        let labeler = MaskLabeler::new(&edges, mask);
        distances.push(gen2col_distance(g, &labeler, dist)?.distance);
    }
    Ok(gap_from_distances(distances, threshold))
}

/// Sampled variant for graphs too large to enumerate: at least 1000 random
/// labelings drawn from the seed.
pub fn reduction_gap_sampled(
    g: &BoundedDegreeGraph,
    dist: &VertexDistribution,
    eps: f64,
    labelings: usize,
    seed: u64,
) -> Result<GapStatistics> {
    use rand::{Rng, SeedableRng};
    if labelings < 1000 {
        return Err(Error::Usage("sampled mode needs at least 1000 labelings".into()));
    }
    let edges = g.edges();
    if edges.len() > 63 {
        return Err(Error::Cap("mask labeler supports at most 63 edges".into()));
    }
    let threshold = eps / (8.0 * (g.vertex_count() as f64).log2());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut distances = Vec::with_capacity(labelings);
    for _ in 0..labelings {
        let mask: u64 = rng.gen::<u64>() & ((1u64 << edges.len()) - 1);
        let labeler = MaskLabeler::new(&edges, mask);
        distances.push(gen2col_distance(g, &labeler, dist)?.distance);
    }
    Ok(gap_from_distances(distances, threshold))
}

//! Bounded-degree graphs in adjacency-list form: the text file format, seeded
//! instance generators, and parity-labeled subgraph consistency checking.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result, ValidationKind};

/// 1-based vertex id.
pub type Vertex = usize;

/// Simple undirected graph on vertices `1..=n` with a hard degree bound `d`.
///
/// Adjacency lists are kept sorted ascending, so incidence slots are compact:
/// slot `i` of vertex `v` holds the i-th smallest neighbor, and slots past
/// `degree(v)` are empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedDegreeGraph {
    vertex_count: usize,
    degree_bound: usize,
    adj: Vec<Vec<Vertex>>,
}

impl BoundedDegreeGraph {
    /// An edgeless graph on `n` vertices with degree bound `d`.
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Usage("vertex count must be positive".into()));
        }
        if d == 0 {
            return Err(Error::Usage("degree bound must be positive".into()));
        }
        Ok(BoundedDegreeGraph {
            vertex_count: n,
            degree_bound: d,
            adj: vec![Vec::new(); n],
        })
    }

    pub fn from_edges(n: usize, d: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        let mut g = Self::new(n, d)?;
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v == 0 || v > self.vertex_count {
            return Err(Error::Usage(format!(
                "vertex {} out of range 1..={}",
                v, self.vertex_count
            )));
        }
        Ok(())
    }

    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::Validation {
                kind: ValidationKind::SelfLoop,
                msg: format!("vertex {} lists itself", u),
            });
        }
        if self.adj[u - 1].binary_search(&v).is_ok() {
            return Err(Error::Validation {
                kind: ValidationKind::MultiEdge,
                msg: format!("edge {{{}, {}}} added twice", u, v),
            });
        }
        if self.adj[u - 1].len() == self.degree_bound || self.adj[v - 1].len() == self.degree_bound
        {
            return Err(Error::Validation {
                kind: ValidationKind::DegreeBound,
                msg: format!(
                    "edge {{{}, {}}} exceeds degree bound {}",
                    u, v, self.degree_bound
                ),
            });
        }
        let pos = self.adj[u - 1].binary_search(&v).unwrap_err();
        self.adj[u - 1].insert(pos, v);
        let pos = self.adj[v - 1].binary_search(&u).unwrap_err();
        self.adj[v - 1].insert(pos, u);
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v - 1].len()
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v - 1]
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.adj[u - 1].binary_search(&v).is_ok()
    }

    /// The incidence oracle g(v, i): the i-th neighbor of `v` (1-based slot)
    /// or `None` when the slot is empty. Out-of-range `v` or `i` is a usage
    /// error, not an empty answer.
    pub fn incidence_query(&self, v: Vertex, slot: usize) -> Result<Option<Vertex>> {
        self.check_vertex(v)?;
        if slot == 0 || slot > self.degree_bound {
            return Err(Error::Usage(format!(
                "slot {} out of range 1..={}",
                slot, self.degree_bound
            )));
        }
        Ok(self.adj[v - 1].get(slot - 1).copied())
    }

    /// Every edge once, as (u, v) with u < v, in ascending order.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::new();
        for u in 1..=self.vertex_count {
            for &v in &self.adj[u - 1] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|l| l.len()).sum::<usize>() / 2
    }

    /// The same graph with vertex `v` renamed to `perm[v - 1]`.
    /// `perm` must be a permutation of `1..=n`.
    pub fn relabel(&self, perm: &[Vertex]) -> Result<Self> {
        if perm.len() != self.vertex_count {
            return Err(Error::Usage("permutation length mismatch".into()));
        }
        let edges: Vec<(Vertex, Vertex)> = self
            .edges()
            .iter()
            .map(|&(u, v)| (perm[u - 1], perm[v - 1]))
            .collect();
        Self::from_edges(self.vertex_count, self.degree_bound, &edges)
    }
}

/// Parse the on-disk format: a `n d` header line, then one line per vertex
/// `v: u1 u2 ... uk` with neighbors ascending. Empty neighbor lists are
/// allowed for isolated vertices.
pub fn parse_graph(text: &str) -> Result<BoundedDegreeGraph> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty input".into() })?;
    let mut it = header.split_whitespace();
    let n: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse { line: 1, msg: "expected vertex count".into() })?;
    let d: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse { line: 1, msg: "expected degree bound".into() })?;
    if it.next().is_some() {
        return Err(Error::Parse { line: 1, msg: "trailing tokens after header".into() });
    }
    if n == 0 || d == 0 {
        return Err(Error::Parse {
            line: 1,
            msg: "vertex count and degree bound must be positive".into(),
        });
    }

    let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    let mut next_vertex = 1usize;
    for (idx, raw) in lines {
        let lineno = idx + 1;
        if raw.trim().is_empty() && next_vertex > n {
            continue;
        }
        if next_vertex > n {
            return Err(Error::Parse { line: lineno, msg: "unexpected extra line".into() });
        }
        let colon = raw.find(':').ok_or_else(|| Error::Parse {
            line: lineno,
            msg: "expected 'v: neighbors...'".into(),
        })?;
        let v: usize = raw[..colon].trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: "bad vertex id before ':'".into(),
        })?;
        if v != next_vertex {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected vertex {}, found {}", next_vertex, v),
            });
        }
        let mut prev = 0usize;
        for tok in raw[colon + 1..].split_whitespace() {
            let u: usize = tok.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad neighbor id '{}'", tok),
            })?;
            if u == 0 || u > n {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("neighbor {} out of range 1..={}", u, n),
                });
            }
            if u == v {
                return Err(Error::Validation {
                    kind: ValidationKind::SelfLoop,
                    msg: format!("line {}: vertex {} lists itself", lineno, v),
                });
            }
            if u == prev {
                return Err(Error::Validation {
                    kind: ValidationKind::MultiEdge,
                    msg: format!("line {}: neighbor {} repeated", lineno, u),
                });
            }
            if u < prev {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "neighbor list not ascending".into(),
                });
            }
            prev = u;
            adj[v - 1].push(u);
        }
        if adj[v - 1].len() > d {
            return Err(Error::Validation {
                kind: ValidationKind::DegreeBound,
                msg: format!("line {}: vertex {} has {} > {} neighbors", lineno, v, adj[v - 1].len(), d),
            });
        }
        next_vertex += 1;
    }
    if next_vertex <= n {
        return Err(Error::Parse {
            line: 0,
            msg: format!("missing adjacency line for vertex {}", next_vertex),
        });
    }
    for u in 1..=n {
        for &v in &adj[u - 1] {
            if adj[v - 1].binary_search(&u).is_err() {
                return Err(Error::Validation {
                    kind: ValidationKind::Asymmetry,
                    msg: format!("{} lists {} but {} does not list {}", u, v, v, u),
                });
            }
        }
    }
    Ok(BoundedDegreeGraph { vertex_count: n, degree_bound: d, adj })
}

/// Serialize to the canonical form of the on-disk format. `parse_graph` of
/// the result round-trips bit-exactly.
pub fn store_graph(g: &BoundedDegreeGraph) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", g.vertex_count, g.degree_bound));
    for v in 1..=g.vertex_count {
        out.push_str(&format!("{}:", v));
        for &u in g.neighbors(v) {
            out.push_str(&format!(" {}", u));
        }
        out.push('\n');
    }
    out
}

/// Named families of test instances, generated deterministically from a seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyKind {
    OddCycle,
    EvenCycle,
    RandomBipartite,
    RandomDRegular,
    Forest,
    CyclesPlusForest,
    /// An explicit edge list on `size` vertices.
    Custom(Vec<(Vertex, Vertex)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceFamily {
    pub kind: FamilyKind,
    pub size: usize,
    pub degree_bound: usize,
    pub seed: u64,
}

pub fn generate_instance(family: &InstanceFamily) -> Result<BoundedDegreeGraph> {
    let n = family.size;
    let d = family.degree_bound;
    let mut rng = ChaCha8Rng::seed_from_u64(family.seed);
    match &family.kind {
        FamilyKind::OddCycle => {
            if n < 3 || n % 2 == 0 {
                return Err(Error::Spec(format!("odd cycle needs odd size >= 3, got {}", n)));
            }
            cycle_graph(n, d)
        }
        FamilyKind::EvenCycle => {
            if n < 4 || n % 2 == 1 {
                return Err(Error::Spec(format!("even cycle needs even size >= 4, got {}", n)));
            }
            cycle_graph(n, d)
        }
        FamilyKind::RandomBipartite => random_bipartite(n, d, &mut rng),
        FamilyKind::RandomDRegular => random_d_regular(n, d, &mut rng),
        FamilyKind::Forest => random_forest(n, d, &mut rng),
        FamilyKind::CyclesPlusForest => cycles_plus_forest(n, d, &mut rng),
        FamilyKind::Custom(edges) => BoundedDegreeGraph::from_edges(n, d, edges),
    }
}

/// The cycle 1-2-...-k-1 with degree bound `d >= 2`.
pub fn cycle_graph(k: usize, d: usize) -> Result<BoundedDegreeGraph> {
    if k < 3 {
        return Err(Error::Spec(format!("cycle needs >= 3 vertices, got {}", k)));
    }
    if d < 2 {
        return Err(Error::Spec("cycle needs degree bound >= 2".into()));
    }
    let mut edges: Vec<(Vertex, Vertex)> = (1..k).map(|v| (v, v + 1)).collect();
    edges.push((k, 1));
    BoundedDegreeGraph::from_edges(k, d, &edges)
}

/// The path 1-2-...-k with degree bound `d >= 2`.
pub fn path_graph(k: usize, d: usize) -> Result<BoundedDegreeGraph> {
    if k < 1 || (k > 1 && d < 2) {
        return Err(Error::Spec("path needs degree bound >= 2".into()));
    }
    let edges: Vec<(Vertex, Vertex)> = (1..k).map(|v| (v, v + 1)).collect();
    BoundedDegreeGraph::from_edges(k, d, &edges)
}

/// Star with center 1 and `leaves` leaves; degree bound equals `leaves`.
pub fn star_graph(leaves: usize) -> Result<BoundedDegreeGraph> {
    let edges: Vec<(Vertex, Vertex)> = (2..=leaves + 1).map(|v| (1, v)).collect();
    BoundedDegreeGraph::from_edges(leaves + 1, leaves.max(1), &edges)
}

/// Complete graph on k vertices (degree bound k-1).
pub fn complete_graph(k: usize) -> Result<BoundedDegreeGraph> {
    if k < 2 {
        return Err(Error::Spec("complete graph needs >= 2 vertices".into()));
    }
    let mut edges = Vec::new();
    for u in 1..=k {
        for v in u + 1..=k {
            edges.push((u, v));
        }
    }
    BoundedDegreeGraph::from_edges(k, k - 1, &edges)
}

/// The Petersen graph: 10 vertices, 3-regular, odd girth 5.
pub fn petersen_graph() -> BoundedDegreeGraph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i + 1, (i + 1) % 5 + 1)); // outer 5-cycle 1..5
        edges.push((i + 6, (i + 2) % 5 + 6)); // inner pentagram 6..10
        edges.push((i + 1, i + 6)); // spokes
    }
    BoundedDegreeGraph::from_edges(10, 3, &edges).expect("static edge list is valid")
}

/// Disjoint cycles of the given lengths, numbered consecutively.
pub fn disjoint_cycles(lens: &[usize], d: usize) -> Result<BoundedDegreeGraph> {
    let n: usize = lens.iter().sum();
    let mut edges = Vec::new();
    let mut base = 0usize;
    for &k in lens {
        if k < 3 {
            return Err(Error::Spec("cycle length must be >= 3".into()));
        }
        for v in 1..k {
            edges.push((base + v, base + v + 1));
        }
        edges.push((base + k, base + 1));
        base += k;
    }
    BoundedDegreeGraph::from_edges(n, d, &edges)
}

fn random_bipartite(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<BoundedDegreeGraph> {
    if n < 2 {
        return Err(Error::Spec("random bipartite needs >= 2 vertices".into()));
    }
    let half = n / 2;
    let mut g = BoundedDegreeGraph::new(n, d)?;
    for a in 1..=half {
        let want = rng.gen_range(1..=d);
        let mut placed = 0;
        for _ in 0..4 * d {
            if placed == want {
                break;
            }
            let b = half + 1 + rng.gen_range(0..n - half);
            if g.degree(a) < d && g.degree(b) < d && !g.has_edge(a, b) {
                g.add_edge(a, b)?;
                placed += 1;
            }
        }
    }
    Ok(g)
}

fn random_d_regular(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<BoundedDegreeGraph> {
    if n * d % 2 == 1 {
        return Err(Error::Spec(format!("n*d must be even, got n={} d={}", n, d)));
    }
    if d >= n {
        return Err(Error::Spec(format!("regular degree {} needs more than {} vertices", d, n)));
    }
    // Configuration model with restarts until the pairing is simple.
    'attempt: for _ in 0..500 {
        let mut stubs: Vec<Vertex> = (1..=n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
        stubs.shuffle(rng);
        let mut g = BoundedDegreeGraph::new(n, d)?;
        for pair in stubs.chunks(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || g.has_edge(u, v) {
                continue 'attempt;
            }
            g.add_edge(u, v)?;
        }
        return Ok(g);
    }
    Err(Error::Spec(format!("no simple {}-regular pairing found for n={}", d, n)))
}

fn random_forest(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<BoundedDegreeGraph> {
    let mut g = BoundedDegreeGraph::new(n, d)?;
    for v in 2..=n {
        if rng.gen::<f64>() < 0.85 {
            for _ in 0..8 {
                let u = rng.gen_range(1..v);
                if g.degree(u) < d && g.degree(v) < d {
                    g.add_edge(u, v)?;
                    break;
                }
            }
        }
    }
    Ok(g)
}

fn cycles_plus_forest(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<BoundedDegreeGraph> {
    if n < 6 {
        return Err(Error::Spec("cycles plus forest needs >= 6 vertices".into()));
    }
    if d < 2 {
        return Err(Error::Spec("cycles plus forest needs degree bound >= 2".into()));
    }
    let triangles = (n / 2) / 3;
    let cycle_vertices = 3 * triangles.max(1);
    let mut g = BoundedDegreeGraph::new(n, d)?;
    for t in 0..cycle_vertices / 3 {
        let base = 3 * t;
        g.add_edge(base + 1, base + 2)?;
        g.add_edge(base + 2, base + 3)?;
        g.add_edge(base + 1, base + 3)?;
    }
    for v in cycle_vertices + 2..=n {
        if rng.gen::<f64>() < 0.85 {
            for _ in 0..8 {
                let u = cycle_vertices + 1 + rng.gen_range(0..v - cycle_vertices - 1);
                if g.degree(u) < d && g.degree(v) < d {
                    g.add_edge(u, v)?;
                    break;
                }
            }
        }
    }
    Ok(g)
}

/// Edges discovered by a tester run. The parity bit is 0 for an "equal
/// colors" constraint and 1 for a "different colors" constraint; plain
/// bipartiteness uses all-1 parities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExploredSubgraph {
    edges: Vec<(Vertex, Vertex, u8)>,
}

impl ExploredSubgraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, u: Vertex, v: Vertex, parity: u8) {
        debug_assert!(parity <= 1);
        self.edges.push((u, v, parity));
    }

    pub fn edges(&self) -> &[(Vertex, Vertex, u8)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn from_edges(edges: Vec<(Vertex, Vertex, u8)>) -> Self {
        ExploredSubgraph { edges }
    }
}

/// Union-find over parity constraints: tracks, per vertex, the parity of its
/// path to the component root, so an inconsistent constraint is detected at
/// union time.
pub struct ParityDsu {
    parent: Vec<usize>,
    rank: Vec<u8>,
    parity: Vec<u8>,
}

impl ParityDsu {
    pub fn new(slots: usize) -> Self {
        ParityDsu {
            parent: (0..slots).collect(),
            rank: vec![0; slots],
            parity: vec![0; slots],
        }
    }

    /// Root of x and the parity of the x-to-root path.
    pub fn find(&mut self, x: usize) -> (usize, u8) {
        let mut root = x;
        let mut p = 0u8;
        while self.parent[root] != root {
            p ^= self.parity[root];
            root = self.parent[root];
        }
        // Path compression, rewriting parities relative to the root.
        let mut cur = x;
        let mut cur_p = p;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            let next_p = cur_p ^ self.parity[cur];
            self.parent[cur] = root;
            self.parity[cur] = cur_p;
            cur = next;
            cur_p = next_p;
        }
        (root, p)
    }

    /// Impose parity(x) xor parity(y) = bit. Returns false iff this
    /// contradicts the constraints already imposed.
    pub fn union(&mut self, x: usize, y: usize, bit: u8) -> bool {
        let (rx, px) = self.find(x);
        let (ry, py) = self.find(y);
        if rx == ry {
            return px ^ py == bit;
        }
        let (hi, lo, lo_parity) = if self.rank[rx] >= self.rank[ry] {
            (rx, ry, px ^ py ^ bit)
        } else {
            (ry, rx, px ^ py ^ bit)
        };
        self.parent[lo] = hi;
        self.parity[lo] = lo_parity;
        if self.rank[hi] == self.rank[lo] {
            self.rank[hi] += 1;
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParityOutcome {
    Consistent,
    /// A closed walk whose parity bits sum to 1 mod 2: a witness that no
    /// coloring satisfies the explored constraints.
    OddCycle(Vec<(Vertex, Vertex, u8)>),
}

/// Decide whether some 2-coloring satisfies every explored constraint; if
/// not, return a witness cycle built from explored edges only.
pub fn check_parity_consistency(sub: &ExploredSubgraph) -> ParityOutcome {
    let max_v = sub.edges().iter().map(|&(u, v, _)| u.max(v)).max().unwrap_or(0);
    let mut dsu = ParityDsu::new(max_v + 1);
    for (k, &(u, v, bit)) in sub.edges().iter().enumerate() {
        if !dsu.union(u, v, bit) {
            return ParityOutcome::OddCycle(witness_cycle(&sub.edges()[..k], u, v, bit));
        }
    }
    ParityOutcome::Consistent
}

/// BFS a u..v path through `prefix` (which is parity-consistent, so every
/// u..v path has the same parity) and close it with the conflicting edge.
fn witness_cycle(
    prefix: &[(Vertex, Vertex, u8)],
    u: Vertex,
    v: Vertex,
    bit: u8,
) -> Vec<(Vertex, Vertex, u8)> {
    let mut adj: HashMap<Vertex, Vec<(Vertex, u8)>> = HashMap::new();
    for &(a, b, p) in prefix {
        adj.entry(a).or_default().push((b, p));
        adj.entry(b).or_default().push((a, p));
    }
    let mut prev: HashMap<Vertex, (Vertex, u8)> = HashMap::new();
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(u);
    prev.insert(u, (u, 0));
    while let Some(x) = queue.pop_front() {
        if x == v {
            break;
        }
        if let Some(nbrs) = adj.get(&x) {
            for &(y, p) in nbrs {
                if !prev.contains_key(&y) {
                    prev.insert(y, (x, p));
                    queue.push_back(y);
                }
            }
        }
    }
    let mut path = Vec::new();
    let mut cur = v;
    while cur != u {
        let (p, bit_pc) = prev[&cur];
        path.push((p, cur, bit_pc));
        cur = p;
    }
    path.reverse();
    path.push((v, u, bit));
    path
}

/// True iff the graph is 2-colorable: all edges imposed as "different
/// colors" constraints are simultaneously satisfiable.
pub fn is_bipartite(g: &BoundedDegreeGraph) -> bool {
    let mut sub = ExploredSubgraph::new();
    for (u, v) in g.edges() {
        sub.push(u, v, 1);
    }
    matches!(check_parity_consistency(&sub), ParityOutcome::Consistent)
}

/// True iff the graph has no cycle at all.
pub fn is_forest(g: &BoundedDegreeGraph) -> bool {
    let mut dsu = ParityDsu::new(g.vertex_count() + 1);
    for (u, v) in g.edges() {
        let (ru, _) = dsu.find(u);
        let (rv, _) = dsu.find(v);
        if ru == rv {
            return false;
        }
        dsu.union(u, v, 0);
    }
    true
}

/// Check that a claimed witness is a closed walk of explored-style edges that
/// exist in `g` and whose parities sum to 1 mod 2.
pub fn validate_witness(g: &BoundedDegreeGraph, witness: &[(Vertex, Vertex, u8)]) -> bool {
    if witness.is_empty() {
        return false;
    }
    let mut parity_sum = 0u8;
    for (k, &(a, b, p)) in witness.iter().enumerate() {
        if !g.has_edge(a, b) {
            return false;
        }
        let (next_a, _, _) = witness[(k + 1) % witness.len()];
        if b != next_a {
            return false;
        }
        parity_sum ^= p;
    }
    parity_sum == 1
}

//! Vertex distributions with sampling and evaluation oracles, per-trial query
//! accounting, trimming to a guaranteed-minimum atom weight, and an exact
//! effective support size oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{BoundedDegreeGraph, Vertex};

/// Compensated sum; keeps the error of summing 10^6 atoms near one ulp.
fn kahan_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
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

/// A probability distribution over vertices `1..=n`, immutable once built.
/// Sampling uses a precomputed alias table, so draws are O(1) and atoms with
/// probability zero are never returned.
#[derive(Debug, Clone)]
pub struct VertexDistribution {
    probs: Vec<f64>,
    alias: Vec<usize>,
    alias_prob: Vec<f64>,
}

impl VertexDistribution {
    /// Requires the entries to sum to 1 within 1e-12.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Usage("distribution needs at least one vertex".into()));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::Usage(format!("probability of vertex {} is {}", i + 1, p)));
            }
        }
        let sum = kahan_sum(probs.iter().copied());
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Usage(format!(
                "probabilities sum to {} (must be 1 within 1e-12)",
                sum
            )));
        }
        let (alias, alias_prob) = build_alias_table(&probs);
        Ok(VertexDistribution { probs, alias, alias_prob })
    }

    /// Normalizes arbitrary non-negative weights with a positive sum.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Usage(format!("weight of vertex {} is {}", i + 1, w)));
            }
        }
        let sum = kahan_sum(weights.iter().copied());
        if sum <= 0.0 {
            return Err(Error::Usage("weights sum to zero".into()));
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / sum).collect();
        // Renormalizing can still miss 1 by a few ulps; absorb the residue
        // into the largest atom so the strict invariant holds.
        let mut probs = probs;
        let residue = 1.0 - kahan_sum(probs.iter().copied());
        if residue != 0.0 {
            let imax = probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap();
            probs[imax] += residue;
        }
        Self::new(probs)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_weights(vec![1.0; n])
    }

    pub fn point_mass(n: usize, v: Vertex) -> Result<Self> {
        if v == 0 || v > n {
            return Err(Error::Usage(format!("vertex {} out of range 1..={}", v, n)));
        }
        let mut probs = vec![0.0; n];
        probs[v - 1] = 1.0;
        Self::new(probs)
    }

    /// Zipf law: weight of vertex v proportional to v^(-exponent).
    pub fn zipf(n: usize, exponent: f64) -> Result<Self> {
        Self::from_weights((1..=n).map(|v| (v as f64).powf(-exponent)).collect())
    }

    /// The first `heavy` vertices share `heavy_mass`; the rest share the
    /// remainder uniformly.
    pub fn two_tier(n: usize, heavy: usize, heavy_mass: f64) -> Result<Self> {
        if heavy == 0 || heavy > n || !(0.0..=1.0).contains(&heavy_mass) {
            return Err(Error::Usage("bad two-tier parameters".into()));
        }
        let mut w = vec![0.0; n];
        for item in w.iter_mut().take(heavy) {
            *item = heavy_mass / heavy as f64;
        }
        if heavy < n {
            for item in w.iter_mut().skip(heavy) {
                *item = (1.0 - heavy_mass) / (n - heavy) as f64;
            }
        }
        Self::from_weights(w)
    }

    pub fn vertex_count(&self) -> usize {
        self.probs.len()
    }

    /// The evaluation oracle's answer for `v`, without query accounting.
    pub fn prob(&self, v: Vertex) -> Result<f64> {
        if v == 0 || v > self.probs.len() {
            return Err(Error::Usage(format!(
                "vertex {} out of range 1..={}",
                v,
                self.probs.len()
            )));
        }
        Ok(self.probs[v - 1])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vertex {
        let n = self.probs.len();
        let idx = rng.gen_range(0..n);
        let coin: f64 = rng.gen();
        if coin < self.alias_prob[idx] {
            idx + 1
        } else {
            self.alias[idx] + 1
        }
    }
}

/// Vose's alias method. Deterministic for a given probability vector.
fn build_alias_table(probs: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let n = probs.len();
    let mut scaled: Vec<f64> = probs.iter().map(|p| p * n as f64).collect();
    let mut alias = vec![0usize; n];
    let mut alias_prob = vec![0.0f64; n];
    let mut small: Vec<usize> = Vec::new();
    let mut large: Vec<usize> = Vec::new();
    for (i, &s) in scaled.iter().enumerate() {
        if s < 1.0 {
            small.push(i);
        } else {
            large.push(i);
        }
    }
    while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
        small.pop();
        alias_prob[s] = scaled[s];
        alias[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if scaled[l] < 1.0 {
            large.pop();
            small.push(l);
        }
    }
    for &l in &large {
        alias_prob[l] = 1.0;
        alias[l] = l;
    }
    // Leftover small entries are a rounding artifact of mass ~1; treat as full.
    for &s in &small {
        alias_prob[s] = 1.0;
        alias[s] = s;
    }
    (alias, alias_prob)
}

/// Named distribution families, deterministic in the seed.
#[derive(Debug, Clone, PartialEq)]
pub enum DistKind {
    Uniform,
    PointMass { vertex: Vertex },
    Zipf { exponent: f64 },
    TwoTier { heavy: usize, heavy_mass: f64 },
    /// Independent squared-uniform weights, normalized.
    SeededRandom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistFamily {
    pub kind: DistKind,
    pub size: usize,
    pub seed: u64,
}

pub fn generate_distribution(family: &DistFamily) -> Result<VertexDistribution> {
    let n = family.size;
    match &family.kind {
        DistKind::Uniform => VertexDistribution::uniform(n),
        DistKind::PointMass { vertex } => VertexDistribution::point_mass(n, *vertex),
        DistKind::Zipf { exponent } => VertexDistribution::zipf(n, *exponent),
        DistKind::TwoTier { heavy, heavy_mass } => {
            VertexDistribution::two_tier(n, *heavy, *heavy_mass)
        }
        DistKind::SeededRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(family.seed);
            let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>().powi(2)).collect();
            VertexDistribution::from_weights(w)
        }
    }
}

/// Per-trial oracle frontend: owns the RNG stream, counts queries, and tracks
/// which vertices have been revealed by oracle answers so locality violations
/// (querying an id never handed out) can be detected.
#[derive(Debug)]
pub struct OracleSession {
    rng: ChaCha8Rng,
    sample_queries: u64,
    eval_queries: u64,
    graph_queries: u64,
    revealed: Vec<bool>,
    locality_violations: u64,
}

impl OracleSession {
    pub fn new(domain_size: usize, seed: u64) -> Self {
        OracleSession {
            rng: ChaCha8Rng::seed_from_u64(seed),
            sample_queries: 0,
            eval_queries: 0,
            graph_queries: 0,
            revealed: vec![false; domain_size + 1],
            locality_violations: 0,
        }
    }

    pub fn sample(&mut self, dist: &VertexDistribution) -> Vertex {
        self.sample_queries += 1;
        let v = dist.draw(&mut self.rng);
        self.reveal(v);
        v
    }

    pub fn evaluate(&mut self, dist: &VertexDistribution, v: Vertex) -> Result<f64> {
        self.eval_queries += 1;
        self.note_locality(v);
        dist.prob(v)
    }

    /// Ratio oracle: D(w1)/D(w2), or `None` when D(w2) = 0.
    pub fn ratio(&mut self, dist: &VertexDistribution, w1: Vertex, w2: Vertex) -> Result<Option<f64>> {
        self.eval_queries += 1;
        self.note_locality(w1);
        self.note_locality(w2);
        let p1 = dist.prob(w1)?;
        let p2 = dist.prob(w2)?;
        if p2 == 0.0 {
            Ok(None)
        } else {
            Ok(Some(p1 / p2))
        }
    }

    pub fn graph_query(
        &mut self,
        g: &BoundedDegreeGraph,
        v: Vertex,
        slot: usize,
    ) -> Result<Option<Vertex>> {
        self.graph_queries += 1;
        self.note_locality(v);
        let ans = g.incidence_query(v, slot)?;
        if let Some(u) = ans {
            self.reveal(u);
        }
        Ok(ans)
    }

    /// Mark a vertex as known without an oracle call (e.g. ids named in the
    /// problem statement itself, like an explicit support bound's atoms).
    pub fn reveal(&mut self, v: Vertex) {
        if v < self.revealed.len() {
            self.revealed[v] = true;
        }
    }

    fn note_locality(&mut self, v: Vertex) {
        if v >= self.revealed.len() || !self.revealed[v] {
            self.locality_violations += 1;
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn sample_queries(&self) -> u64 {
        self.sample_queries
    }

    pub fn eval_queries(&self) -> u64 {
        self.eval_queries
    }

    pub fn graph_queries(&self) -> u64 {
        self.graph_queries
    }

    pub fn locality_violations(&self) -> u64 {
        self.locality_violations
    }
}

/// The base distribution conditioned on atoms heavier than `eta / n`.
/// Within the surviving support, probability ratios are exactly those of the
/// base distribution; the total-variation distance to the base is at most
/// 2*eta whenever the base has eta-effective support size at most n.
#[derive(Debug)]
pub struct TrimmedDistribution<'a> {
    base: &'a VertexDistribution,
    threshold: f64,
    normalization: f64,
}

/// Retries of rejection sampling before giving up on a pathological input.
const REJECTION_CAP: u64 = 10_000_000;

impl<'a> TrimmedDistribution<'a> {
    pub fn new(base: &'a VertexDistribution, eta: f64, n: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&eta) || eta == 0.0 {
            return Err(Error::Usage(format!("eta must be in (0,1), got {}", eta)));
        }
        if n == 0 {
            return Err(Error::Usage("support bound must be positive".into()));
        }
        let threshold = eta / n as f64;
        let normalization = kahan_sum(base.probs().iter().copied().filter(|&p| p > threshold));
        if normalization == 0.0 {
            return Err(Error::DegenerateDistribution(format!(
                "no atom exceeds {} = eta/n; trimming removed everything",
                threshold
            )));
        }
        Ok(TrimmedDistribution { base, threshold, normalization })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn is_supported(&self, v: Vertex) -> bool {
        self.base.prob(v).map(|p| p > self.threshold).unwrap_or(false)
    }

    /// D'(v), with the normalization constant applied.
    pub fn prob(&self, v: Vertex) -> Result<f64> {
        let p = self.base.prob(v)?;
        Ok(if p > self.threshold { p / self.normalization } else { 0.0 })
    }

    /// D(v) masked to the surviving support but not renormalized. Ratios of
    /// these values equal ratios of D'(v) without ever needing Z, which is
    /// what the walk testers use.
    pub fn masked(&self, p: f64) -> f64 {
        if p > self.threshold {
            p
        } else {
            0.0
        }
    }

    /// Sample D' by rejection from the base sampler: resample until the draw
    /// survives the trim. Every attempt costs one sample query.
    pub fn sample(&self, session: &mut OracleSession) -> Result<Vertex> {
        for _ in 0..REJECTION_CAP {
            let v = session.sample(self.base);
            if self.is_supported(v) {
                return Ok(v);
            }
        }
        Err(Error::Cap(format!(
            "rejection sampling exceeded {} attempts (surviving mass {})",
            REJECTION_CAP, self.normalization
        )))
    }

    /// The trimmed distribution as an explicit vector (testing aid).
    pub fn explicit(&self) -> VertexDistribution {
        let probs: Vec<f64> = self
            .base
            .probs()
            .iter()
            .map(|&p| if p > self.threshold { p } else { 0.0 })
            .collect();
        VertexDistribution::from_weights(probs).expect("surviving mass is positive")
    }

    /// Exact TV distance between base and trimmed distribution.
    pub fn tv_to_base(&self) -> f64 {
        let diffs = self.base.probs().iter().map(|&p| {
            let q = if p > self.threshold { p / self.normalization } else { 0.0 };
            (p - q).abs()
        });
        kahan_sum(diffs) / 2.0
    }
}

/// The minimal n such that stripping all but the n heaviest atoms leaves at
/// most `eta` mass: moving that tail onto the head achieves TV exactly the
/// stripped mass, and no n-atom distribution does better.
pub fn exact_effective_support_size(dist: &VertexDistribution, eta: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::Usage(format!("eta must be in [0,1), got {}", eta)));
    }
    let mut nonzero: Vec<f64> = dist.probs().iter().copied().filter(|&p| p > 0.0).collect();
    nonzero.sort_by(|a, b| a.total_cmp(b));
    let mut stripped = 0usize;
    let mut acc = 0.0f64;
    let mut carry = 0.0f64;
    // Accumulate the lightest atoms; a 1e-12 slack keeps decimal tails like
    // 100 * 0.001 <= 0.1 from failing on the last ulp.
    for &p in &nonzero {
        let y = p - carry;
        let t = acc + y;
        carry = (t - acc) - y;
        acc = t;
        if acc <= eta + 1e-12 {
            stripped += 1;
        } else {
            break;
        }
    }
    Ok((nonzero.len() - stripped).max(1))
}

/// Parse the text format: one "v p" line per atom, unlisted vertices have
/// probability zero. The domain is 1..=n; pass the graph's vertex count, or
/// `None` to infer the domain from the largest listed id.
pub fn parse_distribution(text: &str, domain: Option<usize>) -> Result<VertexDistribution> {
    let mut atoms: Vec<(usize, f64)> = Vec::new();
    let mut max_v = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let v: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .filter(|&v| v >= 1)
            .ok_or_else(|| Error::Parse { line: lineno, msg: "expected vertex id".into() })?;
        let p: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse { line: lineno, msg: "expected probability".into() })?;
        if it.next().is_some() {
            return Err(Error::Parse { line: lineno, msg: "trailing tokens".into() });
        }
        if !p.is_finite() || p < 0.0 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("probability {} out of range", p),
            });
        }
        atoms.push((v, p));
        max_v = max_v.max(v);
    }
    if atoms.is_empty() {
        return Err(Error::Parse { line: 0, msg: "no atoms listed".into() });
    }
    let n = match domain {
        Some(n) => {
            if max_v > n {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("atom {} outside domain 1..={}", max_v, n),
                });
            }
            n
        }
        None => max_v,
    };
    let mut probs = vec![0.0f64; n];
    let mut seen = vec![false; n];
    for (v, p) in atoms {
        if seen[v - 1] {
            return Err(Error::Parse { line: 0, msg: format!("vertex {} listed twice", v) });
        }
        seen[v - 1] = true;
        probs[v - 1] = p;
    }
    let sum = kahan_sum(probs.iter().copied());
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Parse {
            line: 0,
            msg: format!("atom masses sum to {} (tolerance 1e-9)", sum),
        });
    }
    VertexDistribution::from_weights(probs)
}

/// Serialize nonzero atoms as "v p" lines; probabilities use the shortest
/// decimal form that parses back to the same double.
pub fn store_distribution(dist: &VertexDistribution) -> String {
    let mut out = String::new();
    for (i, &p) in dist.probs().iter().enumerate() {
        if p > 0.0 {
            out.push_str(&format!("{} {}\n", i + 1, p));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(ps: &[f64]) -> VertexDistribution {
        VertexDistribution::new(ps.to_vec()).unwrap()
    }

    #[test]
    fn point_mass_always_samples_its_atom() {
        let d = VertexDistribution::point_mass(10, 7).unwrap();
        let mut s = OracleSession::new(10, 1);
        for _ in 0..100 {
            assert_eq!(s.sample(&d), 7);
        }
        assert_eq!(s.sample_queries(), 100);
    }

    #[test]
    fn uniform_frequencies_are_balanced() {
        let d = VertexDistribution::uniform(4).unwrap();
        let mut s = OracleSession::new(4, 42);
        let mut counts = [0usize; 4];
        for _ in 0..10_000 {
            counts[s.sample(&d) - 1] += 1;
        }
        for c in counts {
            let f = c as f64 / 10_000.0;
            assert!((0.23..=0.27).contains(&f), "frequency {} out of band", f);
        }
    }

    #[test]
    fn zero_probability_atom_never_sampled() {
        let d = dist(&[0.5, 0.5, 0.0]);
        let mut s = OracleSession::new(3, 5);
        for _ in 0..1_000_000 {
            assert_ne!(s.sample(&d), 3);
        }
    }

    #[test]
    fn evaluate_and_ratio_match_hand_values() {
        let d = dist(&[0.5, 0.3, 0.2]);
        let mut s = OracleSession::new(3, 0);
        for v in [1, 2, 3] {
            s.reveal(v);
        }
        assert_eq!(s.evaluate(&d, 2).unwrap(), 0.3);
        assert_eq!(s.ratio(&d, 1, 3).unwrap(), Some(2.5));
        let z = dist(&[1.0, 0.0]);
        let mut s2 = OracleSession::new(2, 0);
        s2.reveal(1);
        s2.reveal(2);
        assert_eq!(s2.ratio(&z, 1, 2).unwrap(), None);
        assert!(s2.evaluate(&z, 3).is_err());
    }

    #[test]
    fn trim_strips_light_atoms_and_rescales() {
        let d = dist(&[0.5, 0.3, 0.1, 0.06, 0.04]);
        let t = TrimmedDistribution::new(&d, 0.2, 2).unwrap();
        assert!((t.prob(1).unwrap() - 0.625).abs() < 1e-12);
        assert!((t.prob(2).unwrap() - 0.375).abs() < 1e-12);
        for v in [3, 4, 5] {
            assert_eq!(t.prob(v).unwrap(), 0.0);
        }
        assert!((t.tv_to_base() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn trim_keeps_everything_above_threshold() {
        let d = dist(&[0.5, 0.3, 0.1, 0.06, 0.04]);
        let t = TrimmedDistribution::new(&d, 0.1, 3).unwrap();
        for v in 1..=5 {
            assert!((t.prob(v).unwrap() - d.prob(v).unwrap()).abs() < 1e-12);
        }
        assert_eq!(t.tv_to_base(), 0.0);
    }

    #[test]
    fn trim_threshold_is_strict() {
        let d = dist(&[0.5, 0.25, 0.25]);
        let t = TrimmedDistribution::new(&d, 0.5, 2).unwrap();
        assert_eq!(t.prob(2).unwrap(), 0.0);
        assert_eq!(t.prob(3).unwrap(), 0.0);
        assert_eq!(t.prob(1).unwrap(), 1.0);
    }

    #[test]
    fn trim_of_everything_is_degenerate() {
        let d = VertexDistribution::uniform(4).unwrap();
        match TrimmedDistribution::new(&d, 0.8, 1) {
            Err(Error::DegenerateDistribution(_)) => {}
            other => panic!("expected degenerate error, got {:?}", other),
        }
    }

    #[test]
    fn trim_preserves_ratios_on_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let n = rng.gen_range(2..=40usize);
            let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let d = VertexDistribution::from_weights(w).unwrap();
            let eta = rng.gen_range(0.05..0.3);
            let bound = rng.gen_range(1..=n);
            let t = match TrimmedDistribution::new(&d, eta, bound) {
                Ok(t) => t,
                Err(Error::DegenerateDistribution(_)) => continue,
                Err(e) => panic!("{}", e),
            };
            for e in 1..=n {
                for e2 in 1..=n {
                    let (tp, tp2) = (t.prob(e).unwrap(), t.prob(e2).unwrap());
                    if tp > 0.0 && tp2 > 0.0 {
                        let lhs = tp2 * d.prob(e).unwrap();
                        let rhs = d.prob(e2).unwrap() * tp;
                        assert!((lhs - rhs).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn trim_tv_bound_holds_when_support_bound_is_honest() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..60 {
            let n = rng.gen_range(2..=50usize);
            let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>().powi(3)).collect();
            let d = match VertexDistribution::from_weights(w) {
                Ok(d) => d,
                Err(_) => continue,
            };
            let eta = rng.gen_range(0.02..0.3);
            let bound = exact_effective_support_size(&d, eta).unwrap();
            if let Ok(t) = TrimmedDistribution::new(&d, eta, bound) {
                assert!(
                    t.tv_to_base() <= 2.0 * eta + 1e-12,
                    "tv {} > 2*eta {}",
                    t.tv_to_base(),
                    2.0 * eta
                );
            }
        }
    }

    #[test]
    fn rejection_sampling_matches_explicit_distribution() {
        let d = dist(&[0.5, 0.3, 0.1, 0.06, 0.04]);
        let t = TrimmedDistribution::new(&d, 0.2, 2).unwrap();
        let explicit = t.explicit();
        let mut s1 = OracleSession::new(5, 11);
        let mut s2 = OracleSession::new(5, 12);
        let draws = 100_000usize;
        let mut h1 = vec![0usize; 5];
        let mut h2 = vec![0usize; 5];
        for _ in 0..draws {
            h1[t.sample(&mut s1).unwrap() - 1] += 1;
            h2[s2.sample(&explicit) - 1] += 1;
        }
        let tv: f64 = h1
            .iter()
            .zip(&h2)
            .map(|(&a, &b)| ((a as f64 - b as f64) / draws as f64).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv <= 0.02, "empirical tv {}", tv);
        // Rejection costs extra sample queries (expected 1/Z per draw).
        assert!(s1.sample_queries() > s2.sample_queries());
    }

    #[test]
    fn effective_support_size_hand_examples() {
        let d = dist(&[0.5, 0.3, 0.1, 0.05, 0.05]);
        assert_eq!(exact_effective_support_size(&d, 0.1).unwrap(), 3);
        assert_eq!(exact_effective_support_size(&d, 0.0).unwrap(), 5);
        let u = VertexDistribution::uniform(1000).unwrap();
        assert_eq!(exact_effective_support_size(&u, 0.1).unwrap(), 900);
    }

    #[test]
    fn effective_support_size_is_monotone_in_eta() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let n = rng.gen_range(2..=60usize);
            let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let d = match VertexDistribution::from_weights(w) {
                Ok(d) => d,
                Err(_) => continue,
            };
            let mut prev = usize::MAX;
            for k in 0..20 {
                let eta = k as f64 * 0.05;
                if eta >= 1.0 {
                    break;
                }
                let e = exact_effective_support_size(&d, eta).unwrap();
                assert!(e <= prev, "effective size grew as eta grew");
                prev = e;
            }
        }
    }

    #[test]
    fn session_flags_locality_violations() {
        let d = dist(&[0.5, 0.5]);
        let mut s = OracleSession::new(2, 9);
        assert_eq!(s.locality_violations(), 0);
        let v = s.sample(&d);
        s.evaluate(&d, v).unwrap();
        assert_eq!(s.locality_violations(), 0);
        let other = 3 - v;
        s.evaluate(&d, other).unwrap();
        assert_eq!(s.locality_violations(), 1);
    }

    #[test]
    fn parse_normalizes_small_deviation_and_rejects_large() {
        let d = parse_distribution("1 0.5\n2 0.5000000001\n", None).unwrap();
        assert!((d.prob(1).unwrap() + d.prob(2).unwrap() - 1.0).abs() <= 1e-12);
        assert!(parse_distribution("1 0.5\n2 0.6\n", None).is_err());
        assert!(parse_distribution("1 0.5\n1 0.5\n", None).is_err());
        assert!(parse_distribution("3 1.0\n", Some(2)).is_err());
    }

    #[test]
    fn parse_store_roundtrip_preserves_values() {
        let d = dist(&[0.25, 0.0, 0.75]);
        let text = store_distribution(&d);
        assert_eq!(text, "1 0.25\n3 0.75\n");
        let d2 = parse_distribution(&text, Some(3)).unwrap();
        for v in 1..=3 {
            assert_eq!(d.prob(v).unwrap(), d2.prob(v).unwrap());
        }
    }

    #[test]
    fn unlisted_vertices_get_zero() {
        let d = parse_distribution("2 1.0\n", Some(5)).unwrap();
        assert_eq!(d.vertex_count(), 5);
        assert_eq!(d.prob(1).unwrap(), 0.0);
        assert_eq!(d.prob(2).unwrap(), 1.0);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            // Trimming at n = effective support size never moves more than
            // 2 eta of mass, keeps every survivor strictly above eta / n,
            // and leaves surviving masked values untouched.
            #[test]
            fn trimming_invariants(
                weights in prop::collection::vec(0.01f64..10.0, 1..40),
                eta in 0.01f64..0.5,
            ) {
                let d = VertexDistribution::from_weights(weights).unwrap();
                let n = exact_effective_support_size(&d, eta).unwrap();
                let t = TrimmedDistribution::new(&d, eta, n).unwrap();
                prop_assert!(t.tv_to_base() <= 2.0 * eta + 1e-12);
                for v in 1..=d.vertex_count() {
                    let base = d.prob(v).unwrap();
                    if t.prob(v).unwrap() > 0.0 {
                        prop_assert!(t.prob(v).unwrap() > eta / n as f64);
                        prop_assert_eq!(t.masked(base), base);
                    } else {
                        prop_assert_eq!(t.masked(base), 0.0);
                    }
                }
            }

            // The text format prints shortest-roundtrip floats, so the only
            // drift a round trip can introduce is the parser's
            // re-normalization by a sum within a few ulps of 1.
            #[test]
            fn store_parse_roundtrip(
                weights in prop::collection::vec(0.01f64..10.0, 1..30),
            ) {
                let d = VertexDistribution::from_weights(weights).unwrap();
                let d2 = parse_distribution(&store_distribution(&d), Some(d.vertex_count()))?;
                for v in 1..=d.vertex_count() {
                    let (p, q) = (d.prob(v).unwrap(), d2.prob(v).unwrap());
                    prop_assert_eq!(p > 0.0, q > 0.0);
                    prop_assert!((p - q).abs() <= 1e-12 * p.max(1e-300));
                }
            }
        }
    }
}

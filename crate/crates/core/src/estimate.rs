//! Effective support size estimation from sampling and evaluation queries:
//! a doubling "rough" estimator and a refined bucket-counting estimator that
//! narrows the rough answer to a multiplicative band around the truth.

use serde::Serialize;

use crate::dist::{OracleSession, VertexDistribution};
use crate::error::{Error, Result};

/// Iterations of the doubling loop before declaring the distribution
/// effectively unbounded for the requested eta.
const MAX_DOUBLINGS: u32 = 64;

/// Confidence parameter of the bucket-sampling step; per-bucket failure
/// probability is about 2^-7.
const BUCKET_CONFIDENCE: f64 = 7.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorParams {
    /// Effectiveness parameter, in (0, 1/4).
    pub eta: f64,
    /// Bucket base for the refined estimator, in (1, 2].
    pub beta: f64,
}

impl EstimatorParams {
    pub fn new(eta: f64, beta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 0.25) {
            return Err(Error::Usage(format!("eta must be in (0, 1/4), got {}", eta)));
        }
        if !(beta > 1.0 && beta <= 2.0) {
            return Err(Error::Usage(format!("beta must be in (1, 2], got {}", beta)));
        }
        Ok(EstimatorParams { eta, beta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EstimateOutcome {
    pub estimate: usize,
    /// Doubling iteration at which the rough stage halted.
    pub iterations: u32,
    /// Stage-1 value; equals `estimate` for the rough mode itself.
    pub rough_estimate: usize,
    pub sample_queries: u64,
    pub eval_queries: u64,
}

/// Samples drawn at doubling iteration i. Sized so that, by a multiplicative
/// Chernoff bound at the tested mass separation, iteration i errs with
/// probability at most 0.01 / i^2 and the whole run with at most 0.02.
pub fn sample_count(eta: f64, i: u32) -> usize {
    let m = 48.0 / eta * (20.0 * ((i + 1) as f64).powi(2)).ln();
    m.ceil() as usize
}

/// Number of transcript values strictly below eta / 2^i.
pub fn light_count(values: &[f64], eta: f64, i: u32) -> usize {
    let threshold = eta / (2f64).powi(i as i32);
    values.iter().filter(|&&p| p < threshold).count()
}

/// The rough estimator's halting predicate on a transcript of D-values.
pub fn rough_would_halt(values: &[f64], eta: f64, i: u32) -> bool {
    light_count(values, eta, i) as f64 <= 3.0 * eta * values.len() as f64
}

fn doubling_loop(
    dist: &VertexDistribution,
    session: &mut OracleSession,
    eta: f64,
    value_threshold: impl Fn(u32) -> f64,
    halt_bar: f64,
) -> Result<(usize, u32)> {
    for i in 1..=MAX_DOUBLINGS {
        let m = sample_count(eta, i);
        let threshold = value_threshold(i);
        let mut light = 0usize;
        for _ in 0..m {
            let v = session.sample(dist);
            if session.evaluate(dist, v)? < threshold {
                light += 1;
            }
        }
        if light as f64 <= halt_bar * m as f64 {
            let estimate = ((2f64).powi(i as i32) / eta).ceil() as usize;
            return Ok((estimate, i));
        }
    }
    Err(Error::EstimateOverflow(MAX_DOUBLINGS))
}

/// Doubling estimator: at iteration i, halt when at most a 3*eta fraction of
/// fresh samples have D-value below eta / 2^i, and output 2^i / eta. With
/// probability at least 2/3 the output is at least the minimal 4*eta
/// effective support size and at most (2/eta) times the minimal eta one.
pub fn rough_estimate(
    dist: &VertexDistribution,
    eta: f64,
    session: &mut OracleSession,
) -> Result<EstimateOutcome> {
    EstimatorParams::new(eta, 1.5)?;
    let (s0, e0) = (session.sample_queries(), session.eval_queries());
    let (estimate, iterations) =
        doubling_loop(dist, session, eta, |i| eta / (2f64).powi(i as i32), 3.0 * eta)?;
    Ok(EstimateOutcome {
        estimate,
        iterations,
        rough_estimate: estimate,
        sample_queries: session.sample_queries() - s0,
        eval_queries: session.eval_queries() - e0,
    })
}

/// Index i of the weight bucket [beta^-i, beta^-(i-1)) containing p, for
/// p in (0, 1]. A full point mass (p = 1) is folded into bucket 1.
pub fn bucket_index(p: f64, beta: f64) -> usize {
    debug_assert!(p > 0.0 && p <= 1.0);
    let mut i = ((-p.ln()) / beta.ln()).floor() as i64 + 1;
    if i < 1 {
        i = 1;
    }
    // Floating-point log can miss the edge by one; nudge until
    // beta^-i <= p < beta^-(i-1) holds (bucket 1 keeps p = 1).
    while beta.powi(-(i as i32)) > p {
        i += 1;
    }
    while i > 1 && beta.powi(-(i as i32 - 1)) <= p {
        i -= 1;
    }
    i as usize
}

/// Refined estimator: a beta-variant doubling stage gives a coarse bound
/// n-hat, then per-bucket mass estimates over a shared sample pool are
/// converted to per-bucket element counts and summed. When the heavy part
/// appears to carry more than 1 - eta of the mass, the lightest estimated
/// elements are disposed of until the retained mass fits, which cancels the
/// overcount caused by atoms just above the trimming threshold.
///
/// With probability at least 2/3 the output is at least the minimal
/// beta^5*eta effective support size and at most beta^2 times the minimal
/// eta/beta one.
pub fn refined_estimate(
    dist: &VertexDistribution,
    eta: f64,
    beta: f64,
    session: &mut OracleSession,
) -> Result<EstimateOutcome> {
    let params = EstimatorParams::new(eta, beta)?;
    let (eta, beta) = (params.eta, params.beta);
    let (s0, e0) = (session.sample_queries(), session.eval_queries());

    let (n_hat, iterations) = doubling_loop(
        dist,
        session,
        eta,
        |i| (beta - 1.0) * eta / (2f64).powi(i as i32),
        beta * beta * eta,
    )?;

    let eta1 = beta.powi(3) * eta;
    let eta2 = beta.powi(4) * eta;
    let heavy_threshold = (beta - 1.0) * eta1 / n_hat as f64;
    let ell = (((n_hat as f64) / ((beta - 1.0) * eta1)).ln() / beta.ln()).ceil().max(1.0) as usize;

    let pool = (8.0 * BUCKET_CONFIDENCE * ell as f64 / ((beta - 1.0).powi(2) * eta1)).ceil() as usize;
    let mut bucket_mass = vec![0.0f64; ell + 1];
    for _ in 0..pool {
        let v = session.sample(dist);
        let p = session.evaluate(dist, v)?;
        if p <= 0.0 {
            continue;
        }
        let idx = bucket_index(p, beta);
        if idx <= ell {
            bucket_mass[idx] += 1.0;
        }
    }
    for m in bucket_mass.iter_mut() {
        *m /= pool as f64;
    }

    let mass_bar = (beta - 1.0) * eta2 / ell as f64;
    let kept: Vec<usize> = (1..=ell).filter(|&i| bucket_mass[i] >= mass_bar).collect();
    let mut sizes: Vec<(usize, f64)> = kept
        .iter()
        .map(|&i| (i, bucket_mass[i] * beta.powf(i as f64 - 0.5)))
        .collect();

    // Estimate the mass outside the heavy set; if it looks smaller than eta,
    // the heavy set holds more than 1 - eta and the lightest estimated
    // elements must be disposed of until the retained mass fits.
    let probe = (64.0 / eta).ceil() as usize;
    let mut light_hits = 0usize;
    for _ in 0..probe {
        let v = session.sample(dist);
        if session.evaluate(dist, v)? < heavy_threshold {
            light_hits += 1;
        }
    }
    let light_frac = light_hits as f64 / probe as f64;
    if light_frac < eta * (beta + 1.0 / beta) / 2.0 {
        let mut mass: f64 = kept.iter().map(|&i| bucket_mass[i]).sum();
        let target = 1.0 - eta;
        for slot in sizes.iter_mut().rev() {
            if mass <= target {
                break;
            }
            let (i, ref mut size) = *slot;
            let bucket = bucket_mass[i];
            let excess = mass - target;
            if bucket <= excess {
                *size = 0.0;
                mass -= bucket;
            } else {
                *size -= excess * beta.powf(i as f64 - 0.5);
                mass = target;
            }
        }
    }

    let total: f64 = sizes.iter().map(|&(_, s)| s).sum();
    let estimate = (total.round() as usize).max(1);
    Ok(EstimateOutcome {
        estimate,
        iterations,
        rough_estimate: n_hat,
        sample_queries: session.sample_queries() - s0,
        eval_queries: session.eval_queries() - e0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::exact_effective_support_size;

    fn session(n: usize, seed: u64) -> OracleSession {
        OracleSession::new(n, seed)
    }

    #[test]
    fn point_mass_halts_immediately_at_twenty() {
        let d = VertexDistribution::point_mass(50, 3).unwrap();
        for seed in 0..20 {
            let out = rough_estimate(&d, 0.1, &mut session(50, seed)).unwrap();
            assert_eq!(out.iterations, 1);
            assert_eq!(out.estimate, 20);
        }
    }

    #[test]
    fn uniform_power_of_two_gives_deterministic_doubling() {
        let n = 1 << 10;
        let d = VertexDistribution::uniform(n).unwrap();
        let lo = exact_effective_support_size(&d, 0.4).unwrap();
        let hi = 2 * exact_effective_support_size(&d, 0.1).unwrap() * 10;
        for seed in 0..10 {
            let out = rough_estimate(&d, 0.1, &mut session(n, seed)).unwrap();
            assert_eq!(out.estimate, 1280);
            assert!(out.estimate >= lo && out.estimate <= hi);
        }
    }

    #[test]
    fn light_tail_below_halting_bar_is_ignored() {
        // 0.95 on one atom, 0.05 spread over many: the light part stays
        // under the 3*eta bar at eta = 0.2, so the estimate stays small.
        let n = 10_000;
        let mut w = vec![0.05 / (n - 1) as f64; n];
        w[0] = 0.95;
        let d = VertexDistribution::from_weights(w).unwrap();
        for seed in 0..20 {
            let out = rough_estimate(&d, 0.2, &mut session(n, seed)).unwrap();
            assert!(out.estimate <= 100, "estimate {} too large", out.estimate);
        }
    }

    #[test]
    fn halting_never_delays_when_values_grow() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(14);
        for _ in 0..200 {
            let m = rng.gen_range(10..200usize);
            let values: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
            let heavier: Vec<f64> =
                values.iter().map(|&p| (p + rng.gen::<f64>() * (1.0 - p)).min(1.0)).collect();
            let eta = rng.gen_range(0.01..0.24);
            let i = rng.gen_range(1..20u32);
            if rough_would_halt(&values, eta, i) {
                assert!(rough_would_halt(&heavier, eta, i));
            }
        }
    }

    #[test]
    fn bucket_index_brackets_its_input() {
        for &beta in &[1.25f64, 1.5, 2.0] {
            assert_eq!(bucket_index(1.0, beta), 1);
            for i in 1..40usize {
                let inside = beta.powi(-(i as i32)) * 1.0001;
                if inside < 1.0 {
                    assert_eq!(bucket_index(inside, beta), i, "beta {} i {}", beta, i);
                }
                let edge = beta.powi(-(i as i32));
                let idx = bucket_index(edge, beta);
                assert!(edge >= beta.powi(-(idx as i32)));
                assert!(idx == 1 || edge < beta.powi(-(idx as i32 - 1)));
            }
        }
    }

    #[test]
    fn refined_two_atoms_lands_on_two() {
        let d = VertexDistribution::new(vec![0.5, 0.5]).unwrap();
        for seed in 0..20 {
            let out = refined_estimate(&d, 0.1, 1.5, &mut session(2, seed)).unwrap();
            assert_eq!(out.estimate, 2, "seed {}", seed);
        }
    }

    #[test]
    fn refined_point_mass_lands_on_one() {
        let d = VertexDistribution::point_mass(5, 2).unwrap();
        for seed in 0..20 {
            let out = refined_estimate(&d, 0.1, 1.25, &mut session(5, seed)).unwrap();
            assert_eq!(out.estimate, 1, "seed {}", seed);
        }
    }

    #[test]
    fn refined_uniform_respects_the_band() {
        let n = 4096;
        let d = VertexDistribution::uniform(n).unwrap();
        let (eta, beta) = (0.1f64, 1.5f64);
        let lo = exact_effective_support_size(&d, beta.powi(5) * eta).unwrap();
        let hi_raw = exact_effective_support_size(&d, eta / beta).unwrap();
        let hi = (beta * beta * hi_raw as f64).floor() as usize;
        for seed in 0..10 {
            let out = refined_estimate(&d, eta, beta, &mut session(n, seed)).unwrap();
            assert!(
                out.estimate >= lo && out.estimate <= hi,
                "seed {}: {} outside [{}, {}]",
                seed,
                out.estimate,
                lo,
                hi
            );
        }
    }

    #[test]
    fn estimators_report_their_query_budget() {
        let d = VertexDistribution::uniform(64).unwrap();
        let mut s = session(64, 7);
        let out = rough_estimate(&d, 0.1, &mut s).unwrap();
        assert_eq!(out.sample_queries, s.sample_queries());
        assert_eq!(out.eval_queries, s.eval_queries());
        assert_eq!(out.sample_queries, out.eval_queries);
        let m1: u64 = sample_count(0.1, 1) as u64;
        assert!(out.sample_queries >= m1);
    }

    #[test]
    fn params_are_validated() {
        assert!(EstimatorParams::new(0.3, 1.5).is_err());
        assert!(EstimatorParams::new(0.0, 1.5).is_err());
        assert!(EstimatorParams::new(0.1, 1.0).is_err());
        assert!(EstimatorParams::new(0.1, 2.5).is_err());
        assert!(EstimatorParams::new(0.1, 2.0).is_ok());
    }
}

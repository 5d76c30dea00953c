//! Batch experiment driver: a declarative grid of (instance, distribution,
//! task, parameters) cells, seeded trials run in parallel, and
//! machine-readable reports whose aggregates are always recomputable from
//! the per-trial rows.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycle::{test_cycle_free, CycleConfig};
use crate::dist::{
    generate_distribution, parse_distribution, DistFamily, DistKind, OracleSession,
    VertexDistribution,
};
use crate::error::{Error, Result};
use crate::estimate::{refined_estimate, rough_estimate};
use crate::graph::{generate_instance, parse_graph, BoundedDegreeGraph, FamilyKind, InstanceFamily};
use crate::walk::{test_bipartite, test_bipartite_with_bound, Decision, Verdict, WalkConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Bipartite,
    CycleFree,
    EstimateRough,
    EstimateRefined,
}

/// Graph source for a cell: a file on disk or a seeded generator family.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub path: Option<String>,
    pub family: Option<String>,
    pub size: Option<usize>,
    pub degree_bound: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

/// Distribution source for a cell: a file or a named family over the graph's
/// vertex set.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistSpec {
    pub path: Option<String>,
    pub family: Option<String>,
    pub size: Option<usize>,
    pub vertex: Option<usize>,
    pub exponent: Option<f64>,
    pub heavy: Option<usize>,
    pub heavy_mass: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    pub id: String,
    pub task: TaskKind,
    #[serde(default)]
    pub graph: GraphSpec,
    pub dist: DistSpec,
    pub eps: Option<f64>,
    pub eta: Option<f64>,
    pub beta: Option<f64>,
    pub support_bound: Option<usize>,
    pub kappa: Option<f64>,
    pub reps: Option<u32>,
    pub trials: u32,
    pub seed_base: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Worker threads; zero or absent means the library default.
    #[serde(default)]
    pub jobs: usize,
    /// When false (the default) wall_ms is recorded as zero so reports are
    /// byte-reproducible.
    #[serde(default)]
    pub timing: bool,
    pub cell: Vec<CellConfig>,
}

pub const CSV_HEADER: &str =
    "cell_id,trial,decision,sample_q,eval_q,graph_q,wall_ms,witness_len,estimate_n";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRow {
    pub cell_id: String,
    pub trial: u32,
    /// accept | reject | error | estimate
    pub decision: String,
    pub sample_q: u64,
    pub eval_q: u64,
    pub graph_q: u64,
    pub wall_ms: u64,
    pub witness_len: u64,
    pub estimate_n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAggregate {
    pub cell_id: String,
    pub trials: u32,
    pub accepts: u32,
    pub rejects: u32,
    pub errors: u32,
    pub estimates: u32,
    /// Rejections over all trials of the cell (errors count against).
    pub reject_rate: f64,
    pub median_total_queries: u64,
    pub p95_total_queries: u64,
    /// Mean over estimate rows; zero when the cell produced none.
    pub mean_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub cell_id: String,
    pub trial: u32,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<TrialRow>,
    pub aggregates: Vec<CellAggregate>,
    /// Failure messages for error rows; batch-level context, not part of the
    /// per-trial schema.
    #[serde(default)]
    pub diagnostics: Vec<Diagnostic>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.' | ':'))
}

impl GraphSpec {
    fn resolve(&self, base: &Path) -> Result<BoundedDegreeGraph> {
        match (&self.path, &self.family) {
            (Some(p), None) => {
                let text = std::fs::read_to_string(base.join(p))
                    .map_err(|e| config_err(format!("graph file {}: {}", p, e)))?;
                parse_graph(&text)
            }
            (None, Some(name)) => {
                let kind = match name.as_str() {
                    "odd-cycle" => FamilyKind::OddCycle,
                    "even-cycle" => FamilyKind::EvenCycle,
                    "random-bipartite" => FamilyKind::RandomBipartite,
                    "random-regular" => FamilyKind::RandomDRegular,
                    "forest" => FamilyKind::Forest,
                    "cycles-plus-forest" => FamilyKind::CyclesPlusForest,
                    other => return Err(config_err(format!("unknown graph family {}", other))),
                };
                let size = self.size.ok_or_else(|| config_err("graph family needs size"))?;
                let degree_bound = self
                    .degree_bound
                    .ok_or_else(|| config_err("graph family needs degree_bound"))?;
                generate_instance(&InstanceFamily { kind, size, degree_bound, seed: self.seed })
            }
            _ => Err(config_err("graph spec needs exactly one of path or family")),
        }
    }
}

impl DistSpec {
    /// `domain` is the graph's vertex count when the cell has a graph;
    /// estimator-only cells pass None and must size the distribution
    /// themselves.
    fn resolve(&self, base: &Path, domain: Option<usize>) -> Result<VertexDistribution> {
        match (&self.path, &self.family) {
            (Some(p), None) => {
                let text = std::fs::read_to_string(base.join(p))
                    .map_err(|e| config_err(format!("distribution file {}: {}", p, e)))?;
                parse_distribution(&text, domain)
            }
            (None, Some(name)) => {
                let size = self
                    .size
                    .or(domain)
                    .ok_or_else(|| config_err("dist family needs size"))?;
                let kind = match name.as_str() {
                    "uniform" => DistKind::Uniform,
                    "point-mass" => DistKind::PointMass {
                        vertex: self.vertex.ok_or_else(|| config_err("point-mass needs vertex"))?,
                    },
                    "zipf" => DistKind::Zipf { exponent: self.exponent.unwrap_or(1.0) },
                    "two-tier" => DistKind::TwoTier {
                        heavy: self.heavy.ok_or_else(|| config_err("two-tier needs heavy"))?,
                        heavy_mass: self
                            .heavy_mass
                            .ok_or_else(|| config_err("two-tier needs heavy_mass"))?,
                    },
                    "seeded" => DistKind::SeededRandom,
                    other => {
                        return Err(config_err(format!("unknown distribution family {}", other)))
                    }
                };
                generate_distribution(&DistFamily { kind, size, seed: self.seed })
            }
            _ => Err(config_err("dist spec needs exactly one of path or family")),
        }
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig =
        toml::from_str(text).map_err(|e| config_err(format!("config parse: {}", e)))?;
    if config.cell.is_empty() {
        return Err(config_err("config declares no cells"));
    }
    let mut seen = std::collections::HashSet::new();
    for cell in &config.cell {
        if !valid_id(&cell.id) {
            return Err(config_err(format!(
                "cell id {:?} must be nonempty [A-Za-z0-9-_.:]",
                cell.id
            )));
        }
        if !seen.insert(cell.id.clone()) {
            return Err(config_err(format!("duplicate cell id {}", cell.id)));
        }
        if cell.trials == 0 {
            return Err(config_err(format!("cell {}: trials must be >= 1", cell.id)));
        }
        match cell.task {
            TaskKind::Bipartite | TaskKind::CycleFree => {
                if cell.eps.is_none() {
                    return Err(config_err(format!("cell {}: task needs eps", cell.id)));
                }
            }
            TaskKind::EstimateRough | TaskKind::EstimateRefined => {
                if cell.eta.is_none() {
                    return Err(config_err(format!("cell {}: task needs eta", cell.id)));
                }
            }
        }
    }
    Ok(config)
}

fn verdict_row(cell_id: &str, trial: u32, v: &Verdict, wall_ms: u64) -> TrialRow {
    TrialRow {
        cell_id: cell_id.to_string(),
        trial,
        decision: match v.decision {
            Decision::Accept => "accept".into(),
            Decision::Reject => "reject".into(),
        },
        sample_q: v.stats.sample_queries,
        eval_q: v.stats.eval_queries,
        graph_q: v.stats.graph_queries,
        wall_ms,
        witness_len: v.witness.as_ref().map(|w| w.len() as u64).unwrap_or(0),
        estimate_n: 0,
    }
}

fn error_row(cell_id: &str, trial: u32, err: &Error) -> (TrialRow, Diagnostic) {
    let row = TrialRow {
        cell_id: cell_id.to_string(),
        trial,
        decision: "error".into(),
        sample_q: 0,
        eval_q: 0,
        graph_q: 0,
        wall_ms: 0,
        witness_len: 0,
        estimate_n: 0,
    };
    let diag =
        Diagnostic { cell_id: cell_id.to_string(), trial, message: err.to_string() };
    (row, diag)
}

fn run_trial(
    cell: &CellConfig,
    graph: Option<&BoundedDegreeGraph>,
    dist: &VertexDistribution,
    trial: u32,
    timing: bool,
) -> (TrialRow, Option<Diagnostic>) {
    let seed = cell.seed_base + trial as u64;
    let started = std::time::Instant::now();
    let outcome: Result<TrialRow> = match cell.task {
        TaskKind::Bipartite => {
            let graph = graph.expect("tester cells resolve a graph");
            let eps = cell.eps.expect("validated");
            let config = WalkConfig::default();
            let verdict = match cell.support_bound {
                Some(b) => test_bipartite_with_bound(graph, dist, eps, b, seed, &config),
                None => test_bipartite(graph, dist, eps, seed, &config),
            };
            verdict.map(|v| verdict_row(&cell.id, trial, &v, 0))
        }
        TaskKind::CycleFree => {
            let graph = graph.expect("tester cells resolve a graph");
            let eps = cell.eps.expect("validated");
            let mut config = CycleConfig::default();
            if let Some(k) = cell.kappa {
                config.kappa = k;
            }
            if let Some(r) = cell.reps {
                config.repetitions = r;
            }
            test_cycle_free(graph, dist, eps, seed, &config)
                .map(|v| verdict_row(&cell.id, trial, &v, 0))
        }
        TaskKind::EstimateRough | TaskKind::EstimateRefined => {
            let eta = cell.eta.expect("validated");
            let mut session = OracleSession::new(dist.probs().len(), seed);
            let outcome = match cell.task {
                TaskKind::EstimateRough => rough_estimate(dist, eta, &mut session),
                _ => refined_estimate(dist, eta, cell.beta.unwrap_or(1.5), &mut session),
            };
            outcome.map(|o| TrialRow {
                cell_id: cell.id.clone(),
                trial,
                decision: "estimate".into(),
                sample_q: o.sample_queries,
                eval_q: o.eval_queries,
                graph_q: 0,
                wall_ms: 0,
                witness_len: 0,
                estimate_n: o.estimate as u64,
            })
        }
    };
    match outcome {
        Ok(mut row) => {
            if timing {
                row.wall_ms = started.elapsed().as_millis() as u64;
            }
            (row, None)
        }
        Err(e) => {
            let (row, diag) = error_row(&cell.id, trial, &e);
            (row, Some(diag))
        }
    }
}

fn run_cell(
    cell: &CellConfig,
    base: &Path,
    timing: bool,
) -> Vec<(TrialRow, Option<Diagnostic>)> {
    let estimator_only = matches!(cell.task, TaskKind::EstimateRough | TaskKind::EstimateRefined)
        && cell.graph.path.is_none()
        && cell.graph.family.is_none();
    let resolved: Result<(Option<BoundedDegreeGraph>, VertexDistribution)> = if estimator_only {
        cell.dist.resolve(base, None).map(|d| (None, d))
    } else {
        cell.graph.resolve(base).and_then(|g| {
            let d = cell.dist.resolve(base, Some(g.vertex_count()))?;
            Ok((Some(g), d))
        })
    };
    match resolved {
        Ok((graph, dist)) => (0..cell.trials)
            .into_par_iter()
            .map(|trial| run_trial(cell, graph.as_ref(), &dist, trial, timing))
            .collect(),
        Err(e) => (0..cell.trials)
            .map(|trial| {
                let (row, diag) = error_row(&cell.id, trial, &e);
                (row, Some(diag))
            })
            .collect(),
    }
}

/// Execute every cell x trial of the grid. Invalid configuration fails
/// before any trial runs; per-cell resource failures (a missing graph file,
/// a degenerate trim) become error rows and the batch continues. `base`
/// anchors relative paths in the config.
pub fn run_experiment(config: &ExperimentConfig, base: &Path) -> Result<ExperimentReport> {
    let run_all = || -> Vec<Vec<(TrialRow, Option<Diagnostic>)>> {
        config
            .cell
            .par_iter()
            .map(|cell| run_cell(cell, base, config.timing))
            .collect()
    };
    let per_cell = if config.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| config_err(format!("thread pool: {}", e)))?
            .install(run_all)
    } else {
        run_all()
    };
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for cell_rows in per_cell {
        for (row, diag) in cell_rows {
            rows.push(row);
            diagnostics.extend(diag);
        }
    }
    let aggregates = compute_aggregates(&rows);
    Ok(ExperimentReport { rows, aggregates, diagnostics })
}

/// Per-cell aggregates, derived purely from rows (cells in row order).
pub fn compute_aggregates(rows: &[TrialRow]) -> Vec<CellAggregate> {
    let mut order: Vec<&str> = Vec::new();
    for row in rows {
        if !order.iter().any(|&id| id == row.cell_id) {
            order.push(&row.cell_id);
        }
    }
    order
        .into_iter()
        .map(|id| {
            let cell_rows: Vec<&TrialRow> = rows.iter().filter(|r| r.cell_id == id).collect();
            let count = |d: &str| cell_rows.iter().filter(|r| r.decision == d).count() as u32;
            let mut totals: Vec<u64> =
                cell_rows.iter().map(|r| r.sample_q + r.eval_q + r.graph_q).collect();
            totals.sort_unstable();
            let estimates: Vec<u64> = cell_rows
                .iter()
                .filter(|r| r.decision == "estimate")
                .map(|r| r.estimate_n)
                .collect();
            let trials = cell_rows.len() as u32;
            CellAggregate {
                cell_id: id.to_string(),
                trials,
                accepts: count("accept"),
                rejects: count("reject"),
                errors: count("error"),
                estimates: count("estimate"),
                reject_rate: count("reject") as f64 / trials as f64,
                median_total_queries: totals[(totals.len() - 1) / 2],
                p95_total_queries: totals[(totals.len() - 1) * 95 / 100],
                mean_estimate: if estimates.is_empty() {
                    0.0
                } else {
                    estimates.iter().sum::<u64>() as f64 / estimates.len() as f64
                },
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Serialize a report. CSV carries the per-trial rows under the fixed
/// header; JSON carries rows, aggregates, and diagnostics. Emission verifies
/// that the embedded aggregates match recomputation from the rows.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat) -> Result<String> {
    if report.aggregates != compute_aggregates(&report.rows) {
        return Err(Error::Spec("report aggregates do not match their rows".into()));
    }
    match format {
        ReportFormat::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for r in &report.rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    r.cell_id,
                    r.trial,
                    r.decision,
                    r.sample_q,
                    r.eval_q,
                    r.graph_q,
                    r.wall_ms,
                    r.witness_len,
                    r.estimate_n
                ));
            }
            Ok(out)
        }
        ReportFormat::Json => {
            let mut out = serde_json::to_string_pretty(report)
                .map_err(|e| Error::Spec(format!("serialize report: {}", e)))?;
            out.push('\n');
            Ok(out)
        }
    }
}

/// Parse rows back out of the CSV emitted by `emit_report`; aggregates are
/// recomputed, which is exactly their definition.
pub fn parse_report_csv(text: &str) -> Result<ExperimentReport> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected report header, got {:?}", other.unwrap_or("")),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 9 fields, got {}", fields.len()),
            });
        }
        let num = |k: usize| -> Result<u64> {
            fields[k]
                .parse()
                .map_err(|_| Error::Parse { line: lineno, msg: format!("bad number {:?}", fields[k]) })
        };
        rows.push(TrialRow {
            cell_id: fields[0].to_string(),
            trial: num(1)? as u32,
            decision: fields[2].to_string(),
            sample_q: num(3)?,
            eval_q: num(4)?,
            graph_q: num(5)?,
            wall_ms: num(6)?,
            witness_len: num(7)?,
            estimate_n: num(8)?,
        });
    }
    let aggregates = compute_aggregates(&rows);
    Ok(ExperimentReport { rows, aggregates, diagnostics: Vec::new() })
}

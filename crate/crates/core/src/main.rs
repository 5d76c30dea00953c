//! Command-line front end: run the testers and estimators on graph and
//! distribution files, query the exact reference oracles, or drive a batch
//! experiment grid. All output is deterministic for a fixed seed; exit code
//! is 0 on completion and 2 on configuration or usage errors.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use vdf_tester::cycle::{test_cycle_free, CycleConfig};
use vdf_tester::dist::parse_distribution;
use vdf_tester::error::{Error, Result};
use vdf_tester::estimate::{refined_estimate, rough_estimate};
use vdf_tester::exact::{bipartite_distance, cyclefree_distance, gen2col_distance};
use vdf_tester::graph::parse_graph;
use vdf_tester::harness::{emit_report, parse_config, run_experiment, ReportFormat};
use vdf_tester::walk::{test_bipartite, test_bipartite_with_bound, AllNeq, LabelOracle};
use vdf_tester::{
    BoundedDegreeGraph, Decision, OracleSession, Verdict, Vertex, VertexDistribution, WalkConfig,
};

#[derive(Parser)]
#[command(
    name = "vdf-tester",
    version,
    about = "Sublinear testers for bipartiteness and cycle-freeness under a sampled vertex distribution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EstimateMode {
    Rough,
    Refined,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PropertyArg {
    Bipartite,
    #[value(name = "2col")]
    TwoCol,
    Cyclefree,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the effective support size of a distribution file.
    EstimateSupport {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        eta: f64,
        #[arg(long, default_value_t = 1.5)]
        beta: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = EstimateMode::Rough)]
        mode: EstimateMode,
    },
    /// Run the bipartiteness tester for a number of seeded trials.
    TestBipartite {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Skip support estimation and use this bound directly.
        #[arg(long)]
        support_bound: Option<usize>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        trials: u32,
    },
    /// Run the cycle-freeness tester for a number of seeded trials.
    TestCycleFree {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        trials: u32,
        /// Scale factor on the derived inner proximity parameter.
        #[arg(long)]
        kappa: Option<f64>,
        /// Independent relabel-and-test repetitions.
        #[arg(long)]
        reps: Option<u32>,
    },
    /// Compute an exact distance with the brute-force reference oracle.
    Oracle {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, value_enum)]
        property: PropertyArg,
        /// Edge labels for 2col, one "u v 0|1" per line (1 = endpoints must
        /// differ); unlisted edges default to 0.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Execute a batch experiment config and write reports to a directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: one per core).
        #[arg(long)]
        jobs: Option<usize>,
        /// Record wall-clock times; off by default so reports are
        /// byte-reproducible.
        #[arg(long)]
        timing: bool,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("{}: {}", path.display(), e)))
}

fn load_graph(path: &Path) -> Result<BoundedDegreeGraph> {
    parse_graph(&read(path)?)
}

fn load_dist(path: &Path, domain: Option<usize>) -> Result<VertexDistribution> {
    parse_distribution(&read(path)?, domain)
}

/// Edge labels read from a file; unlisted edges are "eq" (0).
struct ExplicitLabeler {
    labels: HashMap<(Vertex, Vertex), u8>,
}

impl ExplicitLabeler {
    fn parse(text: &str) -> Result<Self> {
        let mut labels = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let parse = || -> Option<(Vertex, Vertex, u8)> {
                let mut it = line.split_whitespace();
                let u: Vertex = it.next()?.parse().ok()?;
                let v: Vertex = it.next()?.parse().ok()?;
                let b: u8 = it.next()?.parse().ok()?;
                if it.next().is_some() || b > 1 || u == v {
                    return None;
                }
                Some((u, v, b))
            };
            let (u, v, b) = parse().ok_or(Error::Parse {
                line: idx + 1,
                msg: "expected 'u v 0|1' with u != v".into(),
            })?;
            labels.insert((u.min(v), u.max(v)), b);
        }
        Ok(ExplicitLabeler { labels })
    }
}

impl LabelOracle for ExplicitLabeler {
    fn label(&self, u: Vertex, v: Vertex) -> u8 {
        *self.labels.get(&(u.min(v), u.max(v))).unwrap_or(&0)
    }
}

fn verdict_json(trial: u32, v: &Verdict) -> String {
    let value = serde_json::json!({
        "trial": trial,
        "decision": v.decision,
        "support_bound": v.support_bound,
        "no_start": v.no_start_flag,
        "witness": v.witness,
        "sample_queries": v.stats.sample_queries,
        "eval_queries": v.stats.eval_queries,
        "graph_queries": v.stats.graph_queries,
    });
    value.to_string()
}

fn run_trials(
    trials: u32,
    seed: u64,
    mut one: impl FnMut(u64) -> Result<Verdict>,
) -> Vec<String> {
    let mut csv = vec!["trial,decision,sample_q,eval_q,graph_q,witness_len".to_string()];
    for trial in 0..trials {
        match one(seed.wrapping_add(trial as u64)) {
            Ok(v) => {
                println!("{}", verdict_json(trial, &v));
                let decision = match v.decision {
                    Decision::Accept => "accept",
                    Decision::Reject => "reject",
                };
                csv.push(format!(
                    "{},{},{},{},{},{}",
                    trial,
                    decision,
                    v.stats.sample_queries,
                    v.stats.eval_queries,
                    v.stats.graph_queries,
                    v.witness.as_ref().map(|w| w.len()).unwrap_or(0)
                ));
            }
            Err(e) => {
                let msg = serde_json::json!({
                    "trial": trial,
                    "decision": "error",
                    "message": e.to_string(),
                });
                println!("{}", msg);
                csv.push(format!("{},error,0,0,0,0", trial));
            }
        }
    }
    csv
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Usage(msg.into()))
    }
}

fn real_main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::EstimateSupport { dist, eta, beta, seed, mode } => {
            let d = load_dist(&dist, None)?;
            let mut session = OracleSession::new(d.probs().len(), seed);
            let (mode_name, outcome) = match mode {
                EstimateMode::Rough => ("rough", rough_estimate(&d, eta, &mut session)?),
                EstimateMode::Refined => {
                    ("refined", refined_estimate(&d, eta, beta, &mut session)?)
                }
            };
            let out = serde_json::json!({
                "mode": mode_name,
                "eta": eta,
                "beta": beta,
                "seed": seed,
                "estimate": outcome.estimate,
                "iterations": outcome.iterations,
                "rough_estimate": outcome.rough_estimate,
                "sample_queries": outcome.sample_queries,
                "eval_queries": outcome.eval_queries,
            });
            println!("{}", out);
        }
        Command::TestBipartite { graph, dist, eps, support_bound, seed, trials } => {
            require(trials >= 1, "trials must be >= 1")?;
            require(eps > 0.0 && eps < 1.0, "eps must be in (0, 1)")?;
            let g = load_graph(&graph)?;
            let d = load_dist(&dist, Some(g.vertex_count()))?;
            let config = WalkConfig::default();
            let csv = run_trials(trials, seed, |s| match support_bound {
                Some(b) => test_bipartite_with_bound(&g, &d, eps, b, s, &config),
                None => test_bipartite(&g, &d, eps, s, &config),
            });
            println!("{}", csv.join("\n"));
        }
        Command::TestCycleFree { graph, dist, eps, seed, trials, kappa, reps } => {
            require(trials >= 1, "trials must be >= 1")?;
            require(eps > 0.0 && eps < 1.0, "eps must be in (0, 1)")?;
            let g = load_graph(&graph)?;
            let d = load_dist(&dist, Some(g.vertex_count()))?;
            let mut config = CycleConfig::default();
            if let Some(k) = kappa {
                require(k > 0.0 && k <= 1.0, "kappa must be in (0, 1]")?;
                config.kappa = k;
            }
            if let Some(r) = reps {
                require(r >= 1, "reps must be >= 1")?;
                config.repetitions = r;
            }
            let csv = run_trials(trials, seed, |s| test_cycle_free(&g, &d, eps, s, &config));
            println!("{}", csv.join("\n"));
        }
        Command::Oracle { graph, dist, property, labels } => {
            let g = load_graph(&graph)?;
            let d = load_dist(&dist, Some(g.vertex_count()))?;
            let report = match property {
                PropertyArg::Bipartite => {
                    require(labels.is_none(), "labels only apply to the 2col property")?;
                    bipartite_distance(&g, &d)?
                }
                PropertyArg::TwoCol => match labels {
                    Some(path) => {
                        let labeler = ExplicitLabeler::parse(&read(&path)?)?;
                        gen2col_distance(&g, &labeler, &d)?
                    }
                    None => gen2col_distance(&g, &AllNeq, &d)?,
                },
                PropertyArg::Cyclefree => {
                    require(labels.is_none(), "labels only apply to the 2col property")?;
                    cyclefree_distance(&g, &d)
                }
            };
            let out = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Usage(format!("serialize report: {}", e)))?;
            println!("{}", out);
        }
        Command::Run { config, out, jobs, timing } => {
            let mut experiment = parse_config(&read(&config)?)?;
            if let Some(j) = jobs {
                experiment.jobs = j;
            }
            if timing {
                experiment.timing = true;
            }
            let base = config.parent().unwrap_or(Path::new(".")).to_path_buf();
            let report = run_experiment(&experiment, &base)?;
            std::fs::create_dir_all(&out)
                .map_err(|e| Error::Usage(format!("{}: {}", out.display(), e)))?;
            let write = |name: &str, content: &str| -> Result<()> {
                std::fs::write(out.join(name), content)
                    .map_err(|e| Error::Usage(format!("{}: {}", name, e)))
            };
            write("report.json", &emit_report(&report, ReportFormat::Json)?)?;
            write("rows.csv", &emit_report(&report, ReportFormat::Csv)?)?;
            let mut agg = String::from(
                "cell_id,trials,accepts,rejects,errors,estimates,reject_rate,median_total_queries,p95_total_queries,mean_estimate\n",
            );
            for a in &report.aggregates {
                agg.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    a.cell_id,
                    a.trials,
                    a.accepts,
                    a.rejects,
                    a.errors,
                    a.estimates,
                    a.reject_rate,
                    a.median_total_queries,
                    a.p95_total_queries,
                    a.mean_estimate
                ));
            }
            write("aggregates.csv", &agg)?;
            for a in &report.aggregates {
                println!(
                    "cell {}: {} trials, {} accept, {} reject, {} error, {} estimate",
                    a.cell_id, a.trials, a.accepts, a.rejects, a.errors, a.estimates
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}

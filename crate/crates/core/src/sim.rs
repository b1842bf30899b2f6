//! Single runs, trial seeds and parameter sweeps.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Arrival, EvolvingGraph};
use crate::metrics::{fit_window, summarize_series, SeriesSummary, SnapshotRecord};
use crate::rng::Prng;
use crate::tie_strength::{validate_epsilon, OverlapPolicy, StrongGraph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Links per arriving node; also the size of the complete seed graph.
    pub m: usize,
    pub epsilon: f64,
    /// Strong-degree threshold for the `count_ge_k` metric.
    pub k: usize,
    pub max_nodes: usize,
    /// Master seed; each trial runs on [`derive_trial_seed`] of it.
    pub seed: u64,
    pub snapshot_every: usize,
    pub trials: usize,
    pub oracle_check: bool,
    pub policy: OverlapPolicy,
    pub smoothing_window: usize,
}

pub const DEFAULT_SMOOTHING_WINDOW: usize = 9;

/// Threshold paired with `epsilon` when none is given: 25 for 0.01 and 0.05,
/// 10 for 0.1. Other values take the pairing of the nearest of those three
/// (ties go to the smaller epsilon).
pub fn default_k(epsilon: f64) -> usize {
    const PAIRS: [(f64, usize); 3] = [(0.01, 25), (0.05, 25), (0.1, 10)];
    let mut best = PAIRS[0];
    for pair in PAIRS {
        if (epsilon - pair.0).abs() < (epsilon - best.0).abs() {
            best = pair;
        }
    }
    best.1
}

/// Roughly 500 snapshots per run.
pub fn default_snapshot_every(max_nodes: usize) -> usize {
    (max_nodes / 500).max(1)
}

impl RunConfig {
    /// A single-trial configuration with default threshold, cadence, policy and
    /// smoothing.
    pub fn new(m: usize, epsilon: f64, max_nodes: usize, seed: u64) -> Self {
        Self {
            m,
            epsilon,
            k: default_k(epsilon),
            max_nodes,
            seed,
            snapshot_every: default_snapshot_every(max_nodes),
            trials: 1,
            oracle_check: false,
            policy: OverlapPolicy::default(),
            smoothing_window: DEFAULT_SMOOTHING_WINDOW,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.m < 2 {
            return bad(format!("m must be at least 2, got {}", self.m));
        }
        validate_epsilon(self.epsilon)?;
        self.policy.validate()?;
        if self.k == 0 {
            return bad("k must be positive".into());
        }
        if self.max_nodes <= self.m {
            return bad(format!(
                "max_nodes ({}) must exceed m ({})",
                self.max_nodes, self.m
            ));
        }
        if u32::try_from(self.max_nodes).is_err()
            || u32::try_from(self.m.saturating_mul(self.max_nodes)).is_err()
        {
            return bad(format!("max_nodes {} is too large", self.max_nodes));
        }
        if self.snapshot_every == 0 {
            return bad("snapshot_every must be positive".into());
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.smoothing_window == 0 || self.smoothing_window % 2 == 0 {
            return bad(format!(
                "smoothing window must be a positive odd integer, got {}",
                self.smoothing_window
            ));
        }
        Ok(())
    }

    /// Growth steps needed to reach `max_nodes` from the `K_m` seed.
    pub fn steps(&self) -> usize {
        self.max_nodes - self.m
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(master ^ splitmix64(trial_index))`.
///
/// `splitmix64` is a bijection on `u64`, so distinct trial indices always give
/// distinct seeds under the same master seed.
pub fn derive_trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(trial_index))
}

/// A run in progress: base graph, strong graph and generator for one trial.
pub struct Simulation {
    config: RunConfig,
    graph: EvolvingGraph,
    strong: StrongGraph,
    rng: Prng,
    t: usize,
}

impl Simulation {
    pub fn new(config: &RunConfig, trial_index: usize) -> Result<Self> {
        config.validate()?;
        let graph = EvolvingGraph::complete(config.m)?;
        let strong = StrongGraph::init_strong(&graph, config.epsilon, config.policy)?;
        let rng = Prng::from_seed(derive_trial_seed(config.seed, trial_index as u64));
        Ok(Self {
            config: config.clone(),
            graph,
            strong,
            rng,
            t: 0,
        })
    }

    pub fn graph(&self) -> &EvolvingGraph {
        &self.graph
    }

    pub fn strong(&self) -> &StrongGraph {
        &self.strong
    }

    /// Growth steps completed.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn is_done(&self) -> bool {
        self.graph.node_count() >= self.config.max_nodes
    }

    pub fn step(&mut self) -> Result<Arrival> {
        let arrival = self.graph.add_node_ba(self.config.m, &mut self.rng)?;
        self.strong.apply_arrival(&self.graph, &arrival)?;
        self.t += 1;
        if self.config.oracle_check {
            self.check_locality(&arrival)?;
        }
        Ok(arrival)
    }

    pub fn snapshot(&self) -> SnapshotRecord {
        SnapshotRecord::capture(&self.graph, &self.strong, self.t, self.config.k)
    }

    fn check_locality(&self, arrival: &Arrival) -> Result<()> {
        let targets = &arrival.targets;
        let mut inside = 0;
        for i in 0..targets.len() {
            for j in (i + 1)..targets.len() {
                inside += self.graph.has_edge(targets[i], targets[j]) as usize;
            }
        }
        let expected = targets.len()
            + targets
                .iter()
                .map(|&t| self.graph.degree_of(t) - 1)
                .sum::<usize>()
            - inside;
        if self.strong.last_recomputed() != expected {
            return Err(Error::Invariant(format!(
                "arrival of {} recomputed {} edges, expected {expected}",
                arrival.node,
                self.strong.last_recomputed()
            )));
        }
        Ok(())
    }

    /// Structural checks on both graphs plus exact comparison with a
    /// from-scratch rebuild of the strong graph.
    pub fn verify(&self) -> Result<()> {
        self.graph.check_invariants()?;
        let m = self.config.m;
        let expected = m * (m - 1) / 2 + m * self.t;
        if self.graph.edge_count() != expected {
            return Err(Error::Invariant(format!(
                "edge count {} at t={}, expected {expected}",
                self.graph.edge_count(),
                self.t
            )));
        }
        self.strong.check_invariants(&self.graph)?;
        let oracle =
            StrongGraph::rebuild_oracle(&self.graph, self.config.epsilon, self.config.policy);
        if let Some((u, v, detail)) = self.strong.first_divergence(&oracle, &self.graph) {
            return Err(Error::OracleDivergence {
                t: self.t,
                u,
                v,
                detail,
            });
        }
        Ok(())
    }

    fn record(&self, snapshots: &mut Vec<SnapshotRecord>) -> Result<()> {
        if self.config.oracle_check {
            self.verify()?;
        }
        snapshots.push(self.snapshot());
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: RunConfig,
    pub trial_index: usize,
    pub trial_seed: u64,
    pub snapshots: Vec<SnapshotRecord>,
    pub summary_count: SeriesSummary,
    pub summary_lcc: SeriesSummary,
}

impl RunResult {
    pub fn count_series(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.count_ge_k as f64).collect()
    }

    pub fn lcc_series(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.lcc_size as f64).collect()
    }
}

/// Grows one trial to `max_nodes`, snapshotting at `t = 0`, every
/// `snapshot_every` steps, and at the final step.
pub fn run_single(config: &RunConfig, trial_index: usize) -> Result<RunResult> {
    let mut sim = Simulation::new(config, trial_index)?;
    let mut snapshots = Vec::with_capacity(config.steps() / config.snapshot_every + 2);
    sim.record(&mut snapshots)?;
    while !sim.is_done() {
        sim.step()?;
        if sim.t() % config.snapshot_every == 0 || sim.is_done() {
            sim.record(&mut snapshots)?;
        }
    }
    let (summary_count, summary_lcc) = summarize_pair(
        &snapshots.iter().map(|s| s.count_ge_k as f64).collect::<Vec<_>>(),
        &snapshots.iter().map(|s| s.lcc_size as f64).collect::<Vec<_>>(),
        config.smoothing_window,
    )?;
    Ok(RunResult {
        config: config.clone(),
        trial_index,
        trial_seed: derive_trial_seed(config.seed, trial_index as u64),
        snapshots,
        summary_count,
        summary_lcc,
    })
}

fn summarize_pair(
    count: &[f64],
    lcc: &[f64],
    window: usize,
) -> Result<(SeriesSummary, SeriesSummary)> {
    let w = fit_window(window, count.len());
    Ok((summarize_series(count, w)?, summarize_series(lcc, w)?))
}

/// A finished trial with its wall-clock time, kept apart from the
/// deterministic result.
#[derive(Clone, Debug)]
pub struct TrialRun {
    pub config_index: usize,
    pub result: RunResult,
    pub elapsed: Duration,
}

/// Runs every trial of every config. Results come back ordered by
/// (config index, trial index) whether or not trials ran in parallel.
pub fn run_sweep(configs: &[RunConfig]) -> Result<Vec<TrialRun>> {
    run_sweep_with(configs, true)
}

pub fn run_sweep_with(configs: &[RunConfig], parallel: bool) -> Result<Vec<TrialRun>> {
    for (i, c) in configs.iter().enumerate() {
        c.validate()
            .map_err(|e| Error::InvalidConfig(format!("config {i}: {e}")))?;
    }
    let jobs: Vec<(usize, usize)> = configs
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| (0..c.trials).map(move |ti| (ci, ti)))
        .collect();
    let run = |&(ci, ti): &(usize, usize)| {
        let start = Instant::now();
        let outcome = run_single(&configs[ci], ti);
        (ci, ti, outcome, start.elapsed())
    };
    let outcomes: Vec<_> = if parallel {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    };
    outcomes
        .into_iter()
        .map(|(ci, ti, outcome, elapsed)| match outcome {
            Ok(result) => Ok(TrialRun {
                config_index: ci,
                result,
                elapsed,
            }),
            Err(source) => Err(Error::Trial {
                config_index: ci,
                trial_index: ti,
                source: Box::new(source),
            }),
        })
        .collect()
}

/// Per-snapshot average over trials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSnapshot {
    pub t: usize,
    pub n_nodes: usize,
    pub n_edges_base: f64,
    pub n_edges_strong: f64,
    pub count_ge_k: f64,
    pub lcc_size: f64,
}

pub fn mean_series(results: &[&RunResult]) -> Result<Vec<MeanSnapshot>> {
    let first = results
        .first()
        .ok_or_else(|| Error::InvalidArgument("no trials to average".into()))?;
    let len = first.snapshots.len();
    if results.iter().any(|r| r.snapshots.len() != len) {
        return Err(Error::InvalidArgument("trials have different snapshot counts".into()));
    }
    let n = results.len() as f64;
    (0..len)
        .map(|i| {
            let base = first.snapshots[i];
            let mut acc = MeanSnapshot {
                t: base.t,
                n_nodes: base.n_nodes,
                n_edges_base: 0.0,
                n_edges_strong: 0.0,
                count_ge_k: 0.0,
                lcc_size: 0.0,
            };
            for r in results {
                let s = r.snapshots[i];
                if s.t != base.t {
                    return Err(Error::InvalidArgument(format!(
                        "snapshot {i} taken at t={} and t={}",
                        base.t, s.t
                    )));
                }
                acc.n_edges_base += s.n_edges_base as f64;
                acc.n_edges_strong += s.n_edges_strong as f64;
                acc.count_ge_k += s.count_ge_k as f64;
                acc.lcc_size += s.lcc_size as f64;
            }
            acc.n_edges_base /= n;
            acc.n_edges_strong /= n;
            acc.count_ge_k /= n;
            acc.lcc_size /= n;
            Ok(acc)
        })
        .collect()
}

/// Trials of one configuration together with their mean series.
#[derive(Clone, Debug)]
pub struct ConfigOutcome {
    pub config: RunConfig,
    pub trials: Vec<TrialRun>,
    pub mean: Vec<MeanSnapshot>,
    pub summary_count: SeriesSummary,
    pub summary_lcc: SeriesSummary,
}

/// Groups sweep output by configuration and summarizes the trial-mean series.
pub fn aggregate(configs: &[RunConfig], runs: Vec<TrialRun>) -> Result<Vec<ConfigOutcome>> {
    let mut grouped: Vec<Vec<TrialRun>> = vec![Vec::new(); configs.len()];
    for run in runs {
        let slot = grouped.get_mut(run.config_index).ok_or_else(|| {
            Error::InvalidArgument(format!("trial refers to unknown config {}", run.config_index))
        })?;
        slot.push(run);
    }
    configs
        .iter()
        .zip(grouped)
        .map(|(config, trials)| {
            let results: Vec<&RunResult> = trials.iter().map(|t| &t.result).collect();
            let mean = mean_series(&results)?;
            let count: Vec<f64> = mean.iter().map(|s| s.count_ge_k).collect();
            let lcc: Vec<f64> = mean.iter().map(|s| s.lcc_size).collect();
            let (summary_count, summary_lcc) =
                summarize_pair(&count, &lcc, config.smoothing_window)?;
            Ok(ConfigOutcome {
                config: config.clone(),
                trials,
                mean,
                summary_count,
                summary_lcc,
            })
        })
        .collect()
}

//! Files written for a finished sweep: per-trial and trial-mean CSV series,
//! optional SVG charts, and a JSON manifest describing how to reproduce them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::SeriesSummary;
use crate::sim::{ConfigOutcome, MeanSnapshot, RunConfig, RunResult};
use crate::svg::emit_svg;

pub const CSV_HEADER: &str = "t,n_nodes,n_edges_base,n_edges_strong,count_ge_k,lcc_size";

pub fn series_csv(result: &RunResult) -> String {
    let mut out = String::with_capacity(32 * (result.snapshots.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &result.snapshots {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.t, s.n_nodes, s.n_edges_base, s.n_edges_strong, s.count_ge_k, s.lcc_size
        );
    }
    out
}

pub fn write_series_csv(result: &RunResult, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), series_csv(result))
}

/// Same columns as [`series_csv`], averaged over trials.
pub fn mean_csv(mean: &[MeanSnapshot]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in mean {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.t, s.n_nodes, s.n_edges_base, s.n_edges_strong, s.count_ge_k, s.lcc_size
        );
    }
    out
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub prng: String,
    pub seed_derivation: String,
    pub seed_graph: String,
    pub attachment: String,
    pub out_dir: PathBuf,
    pub runs: Vec<ManifestRun>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRun {
    pub config: RunConfig,
    pub trials: Vec<ManifestTrial>,
    pub mean_csv: String,
    pub svg: Vec<String>,
    pub mean_summary_count: SeriesSummary,
    pub mean_summary_lcc: SeriesSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestTrial {
    pub trial_index: usize,
    pub trial_seed: u64,
    pub series_csv: String,
    pub summary_count: SeriesSummary,
    pub summary_lcc: SeriesSummary,
    /// Wall-clock seconds; the only field that varies between identical runs.
    pub duration_secs: f64,
}

impl Manifest {
    pub fn configs(&self) -> Vec<RunConfig> {
        self.runs.iter().map(|r| r.config.clone()).collect()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| {
            Error::InvalidArgument(format!("{}: not a manifest: {e}", path.display()))
        })
    }
}

pub fn manifest_json(manifest: &Manifest) -> String {
    let mut s = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    s.push('\n');
    s
}

pub fn write_manifest(manifest: &Manifest, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), manifest_json(manifest))
}

pub const MANIFEST_FILE: &str = "manifest.json";

fn file_stem(index: usize, config: &RunConfig) -> String {
    format!(
        "c{index:02}_m{}_eps{}_k{}",
        config.m, config.epsilon, config.k
    )
}

/// Writes every output of a sweep into `out_dir` and returns the manifest
/// (also written there as `manifest.json`).
pub fn write_outputs(outcomes: &[ConfigOutcome], out_dir: &Path, emit: bool) -> Result<Manifest> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut runs = Vec::with_capacity(outcomes.len());
    for (i, outcome) in outcomes.iter().enumerate() {
        let stem = file_stem(i, &outcome.config);
        let mut trials = Vec::with_capacity(outcome.trials.len());
        for trial in &outcome.trials {
            let r = &trial.result;
            let name = format!("{stem}_trial{}.csv", r.trial_index);
            write_series_csv(r, out_dir.join(&name))?;
            trials.push(ManifestTrial {
                trial_index: r.trial_index,
                trial_seed: r.trial_seed,
                series_csv: name,
                summary_count: r.summary_count,
                summary_lcc: r.summary_lcc,
                duration_secs: trial.elapsed.as_secs_f64(),
            });
        }
        let mean_name = format!("{stem}_mean.csv");
        write(&out_dir.join(&mean_name), mean_csv(&outcome.mean))?;

        let mut svg = Vec::new();
        if emit {
            let c = &outcome.config;
            let xs: Vec<f64> = outcome.mean.iter().map(|s| s.n_nodes as f64).collect();
            let count: Vec<f64> = outcome.mean.iter().map(|s| s.count_ge_k).collect();
            let lcc: Vec<f64> = outcome.mean.iter().map(|s| s.lcc_size).collect();
            let suffix = if outcome.trials.len() > 1 {
                format!(", mean of {} trials", outcome.trials.len())
            } else {
                String::new()
            };
            let count_name = format!("{stem}_count.svg");
            emit_svg(
                &xs,
                &count,
                &format!(
                    "Users with at least {} strong friends (m={}, ε={}{suffix})",
                    c.k, c.m, c.epsilon
                ),
                &format!("users with at least {} strong friends", c.k),
                out_dir.join(&count_name),
            )?;
            let lcc_name = format!("{stem}_lcc.svg");
            emit_svg(
                &xs,
                &lcc,
                &format!(
                    "LCC of the strong friendship graph (m={}, ε={}{suffix})",
                    c.m, c.epsilon
                ),
                "size of the LCC",
                out_dir.join(&lcc_name),
            )?;
            svg.push(count_name);
            svg.push(lcc_name);
        }
        runs.push(ManifestRun {
            config: outcome.config.clone(),
            trials,
            mean_csv: mean_name,
            svg,
            mean_summary_count: outcome.summary_count,
            mean_summary_lcc: outcome.summary_lcc,
        });
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        prng: "ChaCha8 (rand_chacha 0.3, seed_from_u64), bounded draws over u64".into(),
        seed_derivation: "trial_seed = splitmix64(seed ^ splitmix64(trial_index))".into(),
        seed_graph: "complete graph on m nodes".into(),
        attachment: "degree-proportional draws against degrees frozen at arrival; repeated targets redrawn"
            .into(),
        out_dir: out_dir.to_path_buf(),
        runs,
    };
    write_manifest(&manifest, out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

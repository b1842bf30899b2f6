//! Command-line surface.
//!
//! Any flag may also come from a plain `key=value` file given with
//! `--config`; keys are flag names without the leading dashes. Values on the
//! command line win over the file.

use std::path::{Path, PathBuf};

use clap::Parser;

use crate::error::{Error, Result};
use crate::sim::{default_k, default_snapshot_every, RunConfig, DEFAULT_SMOOTHING_WINDOW};
use crate::tie_strength::OverlapPolicy;

pub const DEFAULT_M: [usize; 3] = [10, 20, 30];
pub const DEFAULT_EPSILON: [f64; 3] = [0.01, 0.05, 0.1];
pub const DEFAULT_MAX_NODES: usize = 100_000;

#[derive(Parser, Debug, Default, Clone, PartialEq)]
#[command(
    name = "tiesim",
    version,
    about = "Grow Barabási–Albert graphs and track their strong-tie subgraph"
)]
pub struct Cli {
    /// Links per new node (comma-separated list for a sweep)
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,

    /// Strong-tie overlap threshold in [0, 1) (comma-separated list for a sweep)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub epsilon: Option<Vec<f64>>,

    /// Strong-degree threshold; defaults from epsilon (0.01, 0.05 -> 25; 0.1 -> 10)
    #[arg(long)]
    pub k: Option<usize>,

    #[arg(long)]
    pub max_nodes: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Growth steps between snapshots; defaults to max(1, max_nodes / 500)
    #[arg(long)]
    pub snapshot_every: Option<usize>,

    #[arg(long)]
    pub trials: Option<usize>,

    /// Compare against a from-scratch rebuild at every snapshot
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub oracle_check: Option<bool>,

    /// Count the edge's own endpoints in the overlap denominator
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub include_endpoints: Option<bool>,

    /// Odd moving-average window for peak detection
    #[arg(long)]
    pub smoothing_window: Option<usize>,

    #[arg(long)]
    pub out_dir: Option<PathBuf>,

    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub emit_svg: Option<bool>,

    /// key=value file supplying any of the flags above
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Everything a run of the tool needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub configs: Vec<RunConfig>,
    pub out_dir: PathBuf,
    pub emit_svg: bool,
}

/// Parses `args` (program name first) into run configurations.
pub fn parse_cli<I, T>(args: I) -> Result<Invocation>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Usage(e.to_string()))?;
    resolve(cli)
}

/// Applies the config file (if any) and defaults, then builds the cross
/// product of `m` and `epsilon`.
pub fn resolve(cli: Cli) -> Result<Invocation> {
    let cli = match &cli.config {
        Some(path) => merge(cli.clone(), read_config_file(path)?),
        None => cli,
    };

    let ms = cli.m.clone().unwrap_or_else(|| DEFAULT_M.to_vec());
    let epsilons = cli.epsilon.clone().unwrap_or_else(|| DEFAULT_EPSILON.to_vec());
    if ms.is_empty() || epsilons.is_empty() {
        return Err(Error::Usage("--m and --epsilon need at least one value".into()));
    }
    for &m in &ms {
        if m < 2 {
            return Err(Error::Usage(format!(
                "invalid value '{m}' for '--m': must be at least 2"
            )));
        }
    }
    for &eps in &epsilons {
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::Usage(format!(
                "invalid value '{eps}' for '--epsilon': must lie in [0, 1)"
            )));
        }
    }
    let max_nodes = cli.max_nodes.unwrap_or(DEFAULT_MAX_NODES);
    let snapshot_every = cli
        .snapshot_every
        .unwrap_or_else(|| default_snapshot_every(max_nodes));
    let policy = OverlapPolicy {
        exclude_endpoints: !cli.include_endpoints.unwrap_or(false),
        ..OverlapPolicy::default()
    };

    let mut configs = Vec::with_capacity(ms.len() * epsilons.len());
    for &m in &ms {
        for &epsilon in &epsilons {
            let config = RunConfig {
                m,
                epsilon,
                k: cli.k.unwrap_or_else(|| default_k(epsilon)),
                max_nodes,
                seed: cli.seed.unwrap_or(0),
                snapshot_every,
                trials: cli.trials.unwrap_or(1),
                oracle_check: cli.oracle_check.unwrap_or(false),
                policy,
                smoothing_window: cli.smoothing_window.unwrap_or(DEFAULT_SMOOTHING_WINDOW),
            };
            config.validate().map_err(|e| Error::Usage(e.to_string()))?;
            configs.push(config);
        }
    }
    Ok(Invocation {
        configs,
        out_dir: cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("out")),
        emit_svg: cli.emit_svg.unwrap_or(false),
    })
}

fn merge(cli: Cli, file: Cli) -> Cli {
    Cli {
        m: cli.m.or(file.m),
        epsilon: cli.epsilon.or(file.epsilon),
        k: cli.k.or(file.k),
        max_nodes: cli.max_nodes.or(file.max_nodes),
        seed: cli.seed.or(file.seed),
        snapshot_every: cli.snapshot_every.or(file.snapshot_every),
        trials: cli.trials.or(file.trials),
        oracle_check: cli.oracle_check.or(file.oracle_check),
        include_endpoints: cli.include_endpoints.or(file.include_endpoints),
        smoothing_window: cli.smoothing_window.or(file.smoothing_window),
        out_dir: cli.out_dir.or(file.out_dir),
        emit_svg: cli.emit_svg.or(file.emit_svg),
        config: cli.config,
    }
}

fn read_config_file(path: &Path) -> Result<Cli> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_text(&text).map_err(|e| match e {
        Error::Usage(msg) => Error::Usage(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Cli> {
    let mut args = vec!["tiesim".to_string()];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Usage(format!("line {}: expected key=value, got '{line}'", lineno + 1))
        })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key == "config" {
            return Err(Error::Usage(format!(
                "line {}: config files cannot include other config files",
                lineno + 1
            )));
        }
        args.push(format!("--{key}={}", value.trim()));
    }
    Cli::try_parse_from(args).map_err(|e| Error::Usage(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(line: &str) -> Result<Invocation> {
        parse_cli(std::iter::once("tiesim").chain(line.split_whitespace()))
    }

    #[test]
    fn cross_product_and_trials() {
        let inv = parse("--m 10,20 --epsilon 0.01,0.1 --trials 2").unwrap();
        assert_eq!(inv.configs.len(), 4);
        let pairs: Vec<_> = inv.configs.iter().map(|c| (c.m, c.epsilon, c.k)).collect();
        assert_eq!(
            pairs,
            vec![(10, 0.01, 25), (10, 0.1, 10), (20, 0.01, 25), (20, 0.1, 10)]
        );
        assert!(inv.configs.iter().all(|c| c.trials == 2));
    }

    #[test]
    fn k_follows_epsilon() {
        let inv = parse("--epsilon 0.1").unwrap();
        assert!(inv.configs.iter().all(|c| c.k == 10));
        let inv = parse("--epsilon 0.05").unwrap();
        assert!(inv.configs.iter().all(|c| c.k == 25));
        let inv = parse("--epsilon 0.1 --k 3").unwrap();
        assert!(inv.configs.iter().all(|c| c.k == 3));
    }

    #[test]
    fn defaults() {
        let inv = parse("").unwrap();
        assert_eq!(inv.configs.len(), 9);
        let c = &inv.configs[0];
        assert_eq!(c.max_nodes, DEFAULT_MAX_NODES);
        assert_eq!(c.snapshot_every, 200);
        assert_eq!(c.smoothing_window, 9);
        assert!(c.policy.exclude_endpoints);
        assert!(!c.oracle_check);
        assert!(!inv.emit_svg);
        assert_eq!(inv.out_dir, PathBuf::from("out"));
    }

    #[test]
    fn flags_and_booleans() {
        let inv = parse(
            "--m 4 --epsilon 0.2 --max-nodes 900 --seed 7 --snapshot-every 3 \
             --oracle-check --include-endpoints --smoothing-window 5 --out-dir x --emit-svg",
        )
        .unwrap();
        let c = &inv.configs[0];
        assert_eq!((c.m, c.max_nodes, c.seed, c.snapshot_every), (4, 900, 7, 3));
        assert!(c.oracle_check);
        assert!(!c.policy.exclude_endpoints);
        assert_eq!(c.smoothing_window, 5);
        assert!(inv.emit_svg);
        assert_eq!(inv.out_dir, PathBuf::from("x"));
    }

    #[test]
    fn usage_errors_name_the_token() {
        let err = parse("--epsilon 1.5").unwrap_err().to_string();
        assert!(err.contains("1.5"), "{err}");
        let err = parse("--bogus 3").unwrap_err().to_string();
        assert!(err.contains("--bogus"), "{err}");
        let err = parse("--m ten").unwrap_err().to_string();
        assert!(err.contains("ten"), "{err}");
        assert!(matches!(parse("--epsilon -0.2"), Err(Error::Usage(_))));
        assert!(matches!(parse("--m 1"), Err(Error::Usage(_))));
        assert!(matches!(parse("--m 10 --max-nodes 10"), Err(Error::Usage(_))));
        assert!(matches!(parse("--smoothing-window 4"), Err(Error::Usage(_))));
    }

    #[test]
    fn config_file_with_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# sweep\nm = 5,6\nepsilon=0.05\nmax_nodes = 300\ntrials=3\noracle-check=true\nseed=11\n",
        )
        .unwrap();
        let inv = parse_cli([
            "tiesim",
            "--config",
            path.to_str().unwrap(),
            "--trials",
            "1",
        ])
        .unwrap();
        assert_eq!(inv.configs.len(), 2);
        let c = &inv.configs[1];
        assert_eq!((c.m, c.epsilon, c.max_nodes, c.trials, c.seed), (6, 0.05, 300, 1, 11));
        assert!(c.oracle_check);
        assert_eq!(c.snapshot_every, 1);
    }

    #[test]
    fn config_file_errors() {
        assert!(matches!(parse_config_text("m 5"), Err(Error::Usage(_))));
        assert!(matches!(parse_config_text("colour=red"), Err(Error::Usage(_))));
        assert!(matches!(parse_config_text("config=other"), Err(Error::Usage(_))));
        assert!(matches!(
            parse("--config /nonexistent/tiesim.conf"),
            Err(Error::Io { .. })
        ));
    }
}

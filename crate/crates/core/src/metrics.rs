//! Snapshot metrics of the strong-tie graph and summaries of their time series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::EvolvingGraph;
use crate::tie_strength::StrongGraph;

/// One row of a run's time series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    /// Growth steps completed.
    pub t: usize,
    pub n_nodes: usize,
    pub n_edges_base: usize,
    pub n_edges_strong: usize,
    /// Nodes with at least `k` strong ties.
    pub count_ge_k: usize,
    /// Size of the largest connected component of the strong graph.
    pub lcc_size: usize,
}

impl SnapshotRecord {
    pub fn capture(g: &EvolvingGraph, s: &StrongGraph, t: usize, k: usize) -> Self {
        Self {
            t,
            n_nodes: g.node_count(),
            n_edges_base: g.edge_count(),
            n_edges_strong: s.strong_edge_count(),
            count_ge_k: count_at_least_k(s, k),
            lcc_size: largest_component(s),
        }
    }
}

pub fn count_at_least_k(s: &StrongGraph, k: usize) -> usize {
    s.strong_degrees().filter(|&d| d >= k).count()
}

/// Largest connected component of the strong graph, by iterative traversal.
/// Isolated nodes count as components of size one.
pub fn largest_component(s: &StrongGraph) -> usize {
    let adjacency = s.strong_adjacency();
    let mut seen = vec![false; adjacency.len()];
    let mut stack = Vec::new();
    let mut best = 0;
    for root in 0..adjacency.len() {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        stack.push(root);
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for w in &adjacency[v] {
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    stack.push(w.index());
                }
            }
        }
        best = best.max(size);
    }
    best
}

/// Peak location and trend on either side of it, for one metric series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub peak_index: usize,
    /// Maximum of the smoothed series.
    pub peak_value: f64,
    /// Spearman correlation of the smoothed series with time on `[0, peak]`.
    pub pre_trend: f64,
    /// Same, on `[peak, end]`.
    pub post_trend: f64,
    pub smoothing_window: usize,
}

/// Centered moving average; windows are truncated at the series ends.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Ranks starting at 1; tied values share the mean of their ranks.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation of `values` against their index. Zero when the
/// segment is shorter than two points or constant.
pub fn trend(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let r = ranks(values);
    let time: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let mean = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in r.iter().zip(&time) {
        let (dx, dy) = (x - mean, y - mean);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        0.0
    } else {
        (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
    }
}

pub fn summarize_series(values: &[f64], window: usize) -> Result<SeriesSummary> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("cannot summarize an empty series".into()));
    }
    if window == 0 || window % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "smoothing window must be a positive odd integer, got {window}"
        )));
    }
    if window > values.len() {
        return Err(Error::InvalidArgument(format!(
            "smoothing window {window} exceeds series length {}",
            values.len()
        )));
    }
    let smoothed = moving_average(values, window);
    let mut peak_index = 0;
    for (i, &v) in smoothed.iter().enumerate() {
        if v > smoothed[peak_index] {
            peak_index = i;
        }
    }
    Ok(SeriesSummary {
        peak_index,
        peak_value: smoothed[peak_index],
        pre_trend: trend(&smoothed[..=peak_index]),
        post_trend: trend(&smoothed[peak_index..]),
        smoothing_window: window,
    })
}

/// Largest odd window not exceeding `requested` or `len`.
pub fn fit_window(requested: usize, len: usize) -> usize {
    let w = requested.min(len).max(1);
    if w % 2 == 0 {
        w - 1
    } else {
        w
    }
}

/// Log-log least-squares slope of the complementary degree CDF, sampled at
/// logarithmically spaced degrees from `min_degree` up to the maximum degree
/// (`bins_per_decade` points per factor of ten). `None` if fewer than two
/// distinct sample points exist.
pub fn degree_ccdf_tail_slope(
    degrees: impl IntoIterator<Item = usize>,
    min_degree: usize,
    bins_per_decade: usize,
) -> Option<f64> {
    let mut sorted: Vec<usize> = degrees.into_iter().collect();
    if sorted.is_empty() || min_degree == 0 || bins_per_decade == 0 {
        return None;
    }
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let max = *sorted.last()?;

    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut last = 0usize;
    for j in 0.. {
        let d = (min_degree as f64 * 10f64.powf(j as f64 / bins_per_decade as f64)).ceil() as usize;
        if d > max {
            break;
        }
        if d == last {
            continue;
        }
        last = d;
        let at_least = sorted.len() - sorted.partition_point(|&x| x < d);
        points.push(((d as f64).ln(), (at_least as f64 / n).ln()));
    }
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

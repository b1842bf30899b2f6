//! Neighbourhood overlap and the strong-tie subgraph.
//!
//! For an edge `(u, v)` with `c` common neighbours the overlap is
//! `c / |N(u) ∪ N(v)|`, with `u` and `v` themselves dropped from the union
//! unless the policy says otherwise. An edge is *strong* when its overlap is
//! strictly greater than `epsilon`.
//!
//! [`StrongGraph`] keeps, per base edge, the common-neighbour count, the
//! overlap and the strong flag. When a node `x` arrives with targets `T`, the
//! only neighbourhoods that change are those of `x` and of the targets, so:
//!
//! * a pre-existing edge gains a common neighbour iff both endpoints are in `T`;
//! * a new edge `(x, t)` has as many common neighbours as `t` has neighbours in `T`;
//! * only edges with an endpoint in `T` see a degree change.
//!
//! Each arrival therefore costs `O(|T|² + Σ_{t∈T} deg(t))` with O(1) work per
//! touched edge. [`StrongGraph::rebuild_oracle`] recomputes everything from
//! scratch and is what the incremental state is checked against.

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Arrival, EdgeId, EvolvingGraph, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapPolicy {
    /// Drop `u` and `v` from the union in the denominator.
    pub exclude_endpoints: bool,
    /// Overlap reported when the union is empty (two degree-1 endpoints).
    pub zero_denominator_value: f64,
}

impl Default for OverlapPolicy {
    fn default() -> Self {
        Self {
            exclude_endpoints: true,
            zero_denominator_value: 0.0,
        }
    }
}

impl OverlapPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.zero_denominator_value) {
            return Err(Error::InvalidConfig(format!(
                "zero-denominator overlap must lie in [0, 1], got {}",
                self.zero_denominator_value
            )));
        }
        Ok(())
    }

    /// Overlap of an edge whose endpoints have degrees `du`, `dv` and share
    /// `common` neighbours.
    #[inline]
    fn from_counts(&self, common: u32, du: usize, dv: usize) -> f64 {
        let mut denom = du + dv - common as usize;
        if self.exclude_endpoints {
            denom -= 2;
        }
        if denom == 0 {
            self.zero_denominator_value
        } else {
            common as f64 / denom as f64
        }
    }
}

pub fn validate_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "epsilon must lie in [0, 1), got {epsilon}"
        )))
    }
}

/// Common neighbours of `u` and `v`, scanning the smaller neighbourhood and
/// probing the larger one.
fn common_neighbors(g: &EvolvingGraph, u: NodeId, v: NodeId) -> usize {
    let (small, large) = if g.degree_of(u) <= g.degree_of(v) {
        (u, v)
    } else {
        (v, u)
    };
    g.incidence_of(small)
        .iter()
        .filter(|inc| g.has_edge(large, inc.node))
        .count()
}

/// Neighbourhood overlap of the edge `(u, v)`.
pub fn overlap(g: &EvolvingGraph, u: NodeId, v: NodeId, policy: &OverlapPolicy) -> Result<f64> {
    g.degree(u)?;
    g.degree(v)?;
    if u == v || !g.has_edge(u, v) {
        return Err(Error::InvalidArgument(format!(
            "overlap is only defined for edges; ({u}, {v}) is not one"
        )));
    }
    Ok(overlap_with_common(g, u, v, common_neighbors(g, u, v), policy))
}

fn overlap_with_common(
    g: &EvolvingGraph,
    u: NodeId,
    v: NodeId,
    common: usize,
    policy: &OverlapPolicy,
) -> f64 {
    // N(u) ∪ N(v) = N(u) + (N(v) \ N(u)); u ∈ N(v) and v ∈ N(u) are never common.
    let mut union = g.degree_of(u) + (g.degree_of(v) - common);
    if policy.exclude_endpoints {
        union -= 2;
    }
    if union == 0 {
        policy.zero_denominator_value
    } else {
        common as f64 / union as f64
    }
}

/// Strong-tie subgraph of an [`EvolvingGraph`], indexed by the base graph's
/// edge ids.
#[derive(Clone, Debug)]
pub struct StrongGraph {
    epsilon: f64,
    policy: OverlapPolicy,
    common: Vec<u32>,
    overlap: Vec<f64>,
    strong: Vec<bool>,
    strong_adjacency: Vec<FxHashSet<NodeId>>,
    strong_edge_count: usize,
    // scratch
    mark: Vec<u32>,
    epoch: u32,
    tally: Vec<u32>,
    last_recomputed: usize,
}

impl StrongGraph {
    /// Computes every overlap of `g` from scratch.
    pub fn init_strong(g: &EvolvingGraph, epsilon: f64, policy: OverlapPolicy) -> Result<Self> {
        validate_epsilon(epsilon)?;
        policy.validate()?;
        if g.node_count() == 0 {
            return Err(Error::InvalidArgument("graph has no nodes".into()));
        }
        let mut s = Self::empty(g, epsilon, policy);

        // Each edge is counted once, from its endpoint with the larger
        // (degree, id): mark that endpoint's neighbours, scan the other's.
        let rank = |v: NodeId| (g.degree_of(v), v);
        for u in g.nodes() {
            let stamp = s.next_epoch();
            for inc in g.incidence_of(u) {
                s.mark[inc.node.index()] = stamp;
            }
            for inc in g.incidence_of(u) {
                if rank(inc.node) < rank(u) {
                    let c = g
                        .incidence_of(inc.node)
                        .iter()
                        .filter(|w| s.mark[w.node.index()] == stamp)
                        .count();
                    s.common[inc.edge.index()] = c as u32;
                }
            }
        }
        for (e, u, v) in g.edges() {
            s.refresh(g, e, u, v);
        }
        Ok(s)
    }

    /// Reference state recomputed from scratch: every node stamps its
    /// neighbours, and each edge counts stamps along the neighbour list of its
    /// higher-id endpoint. Slow; used to check the incrementally maintained
    /// graph.
    pub fn rebuild_oracle(g: &EvolvingGraph, epsilon: f64, policy: OverlapPolicy) -> Self {
        let mut s = Self::empty(g, epsilon, policy);
        let mut stamp = vec![u32::MAX; g.node_count()];
        for u in g.nodes() {
            for inc in g.incidence_of(u) {
                stamp[inc.node.index()] = u.0;
            }
            for inc in g.incidence_of(u).iter().filter(|inc| inc.node > u) {
                s.common[inc.edge.index()] = g
                    .incidence_of(inc.node)
                    .iter()
                    .filter(|w| stamp[w.node.index()] == u.0)
                    .count() as u32;
            }
        }
        for (e, u, v) in g.edges() {
            let i = e.index();
            s.overlap[i] = overlap_with_common(g, u, v, s.common[i] as usize, &policy);
            if s.overlap[i] > epsilon {
                s.strong[i] = true;
                s.strong_adjacency[u.index()].insert(v);
                s.strong_adjacency[v.index()].insert(u);
                s.strong_edge_count += 1;
            }
        }
        s
    }

    fn empty(g: &EvolvingGraph, epsilon: f64, policy: OverlapPolicy) -> Self {
        let e = g.edge_count();
        let n = g.node_count();
        Self {
            epsilon,
            policy,
            common: vec![0; e],
            overlap: vec![0.0; e],
            strong: vec![false; e],
            strong_adjacency: vec![FxHashSet::default(); n],
            strong_edge_count: 0,
            mark: vec![0; n],
            epoch: 0,
            tally: Vec::new(),
            last_recomputed: 0,
        }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        self.epoch
    }

    /// Re-derives overlap and strong membership of `e = (u, v)` from its
    /// common-neighbour count and the current degrees.
    #[inline]
    fn refresh(&mut self, g: &EvolvingGraph, e: EdgeId, u: NodeId, v: NodeId) {
        let i = e.index();
        let value = self
            .policy
            .from_counts(self.common[i], g.degree_of(u), g.degree_of(v));
        self.overlap[i] = value;
        let now = value > self.epsilon;
        if now != self.strong[i] {
            self.strong[i] = now;
            if now {
                self.strong_adjacency[u.index()].insert(v);
                self.strong_adjacency[v.index()].insert(u);
                self.strong_edge_count += 1;
            } else {
                self.strong_adjacency[u.index()].remove(&v);
                self.strong_adjacency[v.index()].remove(&u);
                self.strong_edge_count -= 1;
            }
        }
    }

    /// Brings the state up to date after `g` absorbed `arrival`.
    ///
    /// `self` must reflect `g` as it was just before the arrival.
    pub fn apply_arrival(&mut self, g: &EvolvingGraph, arrival: &Arrival) -> Result<()> {
        let x = arrival.node;
        let targets = &arrival.targets;
        if x.index() + 1 != g.node_count()
            || self.strong_adjacency.len() + 1 != g.node_count()
            || self.common.len() + targets.len() != g.edge_count()
        {
            return Err(Error::Invariant(format!(
                "strong graph ({} nodes, {} edges) is not one arrival behind base graph ({} nodes, {} edges)",
                self.strong_adjacency.len(),
                self.common.len(),
                g.node_count(),
                g.edge_count()
            )));
        }
        let edges = g.edge_count();
        self.common.resize(edges, 0);
        self.overlap.resize(edges, 0.0);
        self.strong.resize(edges, false);
        self.strong_adjacency.push(FxHashSet::default());
        self.mark.push(0);

        let stamp = self.next_epoch();
        for t in targets {
            self.mark[t.index()] = stamp;
        }

        // x is a new common neighbour of every pre-existing edge inside T.
        self.tally.clear();
        self.tally.resize(targets.len(), 0);
        for i in 0..targets.len() {
            for j in (i + 1)..targets.len() {
                if let Some(e) = g.edge_between(targets[i], targets[j]) {
                    self.common[e.index()] += 1;
                    self.tally[i] += 1;
                    self.tally[j] += 1;
                }
            }
        }

        let mut recomputed = 0;
        for (i, &t) in targets.iter().enumerate() {
            for inc in g.incidence_of(t) {
                if inc.node == x {
                    self.common[inc.edge.index()] = self.tally[i];
                } else if self.mark[inc.node.index()] == stamp && inc.node < t {
                    // edge inside T, handled from its other endpoint
                    continue;
                }
                self.refresh(g, inc.edge, t, inc.node);
                recomputed += 1;
            }
        }
        self.last_recomputed = recomputed;
        Ok(())
    }

    /// Number of edges whose overlap was recomputed by the last
    /// [`apply_arrival`](Self::apply_arrival).
    pub fn last_recomputed(&self) -> usize {
        self.last_recomputed
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn policy(&self) -> &OverlapPolicy {
        &self.policy
    }

    pub fn node_count(&self) -> usize {
        self.strong_adjacency.len()
    }

    pub fn strong_edge_count(&self) -> usize {
        self.strong_edge_count
    }

    #[inline]
    pub fn overlap_of(&self, e: EdgeId) -> f64 {
        self.overlap[e.index()]
    }

    #[inline]
    pub fn common_of(&self, e: EdgeId) -> u32 {
        self.common[e.index()]
    }

    #[inline]
    pub fn is_strong(&self, e: EdgeId) -> bool {
        self.strong[e.index()]
    }

    pub fn strong_degree(&self, v: NodeId) -> Result<usize> {
        self.strong_adjacency
            .get(v.index())
            .map(FxHashSet::len)
            .ok_or(Error::NotFound(v))
    }

    pub fn strong_neighbors(&self, v: NodeId) -> Result<&FxHashSet<NodeId>> {
        self.strong_adjacency.get(v.index()).ok_or(Error::NotFound(v))
    }

    pub fn strong_degrees(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.strong_adjacency.iter().map(FxHashSet::len)
    }

    pub(crate) fn strong_adjacency(&self) -> &[FxHashSet<NodeId>] {
        &self.strong_adjacency
    }

    /// Full consistency scan against the base graph.
    pub fn check_invariants(&self, g: &EvolvingGraph) -> Result<()> {
        let fail = |msg: String| Err(Error::Invariant(msg));
        if self.common.len() != g.edge_count()
            || self.overlap.len() != g.edge_count()
            || self.strong.len() != g.edge_count()
        {
            return fail(format!(
                "per-edge state has {} entries, base graph has {} edges",
                self.overlap.len(),
                g.edge_count()
            ));
        }
        if self.strong_adjacency.len() != g.node_count() {
            return fail(format!(
                "strong graph has {} nodes, base graph {}",
                self.strong_adjacency.len(),
                g.node_count()
            ));
        }
        let mut flagged = 0;
        for (e, u, v) in g.edges() {
            let value = self.overlap[e.index()];
            if !(0.0..=1.0).contains(&value) {
                return fail(format!("overlap of ({u}, {v}) is {value}"));
            }
            let strong = self.strong[e.index()];
            if strong != (value > self.epsilon) {
                return fail(format!(
                    "edge ({u}, {v}) flagged strong={strong} with overlap {value} and epsilon {}",
                    self.epsilon
                ));
            }
            let listed = self.strong_adjacency[u.index()].contains(&v);
            if listed != strong || self.strong_adjacency[v.index()].contains(&u) != strong {
                return fail(format!("strong adjacency disagrees with flag on ({u}, {v})"));
            }
            flagged += strong as usize;
        }
        let listed: usize = self.strong_degrees().sum();
        if listed != 2 * flagged || flagged != self.strong_edge_count {
            return fail(format!(
                "strong edge count {} but {flagged} flagged edges and degree sum {listed}",
                self.strong_edge_count
            ));
        }
        // every listed strong neighbour must be a base neighbour
        for v in g.nodes() {
            for w in &self.strong_adjacency[v.index()] {
                if !g.has_edge(v, *w) {
                    return fail(format!("strong edge ({v}, {w}) missing from base graph"));
                }
            }
        }
        Ok(())
    }

    /// First disagreement with `other`, naming the offending edge.
    pub fn first_divergence(
        &self,
        other: &StrongGraph,
        g: &EvolvingGraph,
    ) -> Option<(NodeId, NodeId, String)> {
        if self.overlap.len() != other.overlap.len()
            || self.strong_adjacency.len() != other.strong_adjacency.len()
        {
            return Some((
                NodeId(0),
                NodeId(0),
                format!(
                    "shape mismatch: {}x{} vs {}x{} (nodes x edges)",
                    self.strong_adjacency.len(),
                    self.overlap.len(),
                    other.strong_adjacency.len(),
                    other.overlap.len()
                ),
            ));
        }
        for (e, u, v) in g.edges() {
            let i = e.index();
            if self.common[i] != other.common[i] {
                return Some((
                    u,
                    v,
                    format!("common neighbours {} vs {}", self.common[i], other.common[i]),
                ));
            }
            if self.overlap[i].to_bits() != other.overlap[i].to_bits() {
                return Some((
                    u,
                    v,
                    format!("overlap {} vs {}", self.overlap[i], other.overlap[i]),
                ));
            }
            if self.strong[i] != other.strong[i] {
                return Some((
                    u,
                    v,
                    format!("strong {} vs {}", self.strong[i], other.strong[i]),
                ));
            }
        }
        for v in g.nodes() {
            let (a, b) = (
                &self.strong_adjacency[v.index()],
                &other.strong_adjacency[v.index()],
            );
            if a != b {
                let w = a.symmetric_difference(b).next().copied().unwrap_or(v);
                return Some((v, w, "strong adjacency differs".into()));
            }
        }
        if self.strong_edge_count != other.strong_edge_count {
            return Some((
                NodeId(0),
                NodeId(0),
                format!(
                    "strong edge count {} vs {}",
                    self.strong_edge_count, other.strong_edge_count
                ),
            ));
        }
        None
    }
}

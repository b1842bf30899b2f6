//! The evolving base graph and preferential-attachment growth.
//!
//! Nodes are dense indices assigned in arrival order. Every edge also gets a
//! dense [`EdgeId`] in creation order, which lets downstream structures keep
//! per-edge state in flat vectors instead of hash maps keyed by node pairs.
//!
//! Degree-proportional sampling uses a flat endpoint list: each edge pushes
//! both of its endpoints, so node `v` appears exactly `degree(v)` times and a
//! uniform pick from the list selects `v` with probability `d_v / Σ d`.

use std::fmt;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::rng::Prng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One entry of a node's incidence list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Incidence {
    pub node: NodeId,
    pub edge: EdgeId,
}

/// A completed growth step: the new node and the distinct targets it linked to,
/// in draw order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrival {
    pub node: NodeId,
    pub targets: Vec<NodeId>,
}

/// Undirected simple graph that only grows.
#[derive(Clone, Debug, Default)]
pub struct EvolvingGraph {
    incidence: Vec<Vec<Incidence>>,
    lookup: Vec<FxHashMap<NodeId, EdgeId>>,
    edges: Vec<(NodeId, NodeId)>,
    endpoints: Vec<NodeId>,
}

impl EvolvingGraph {
    /// The complete graph on `m0` nodes.
    pub fn complete(m0: usize) -> Result<Self> {
        if m0 < 2 {
            return Err(Error::InvalidConfig(format!(
                "seed graph needs at least 2 nodes, got {m0}"
            )));
        }
        let mut g = Self::with_nodes(m0);
        for u in 0..m0 {
            for v in (u + 1)..m0 {
                g.push_edge(NodeId(u as u32), NodeId(v as u32));
            }
        }
        Ok(g)
    }

    /// Builds a graph on `n` nodes from an explicit edge list. Used for
    /// fixtures and for analysing externally supplied graphs.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut g = Self::with_nodes(n);
        for &(u, v) in edges {
            let (u, v) = (NodeId(u), NodeId(v));
            g.check_node(u)?;
            g.check_node(v)?;
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop on {u}")));
            }
            if g.edge_between(u, v).is_some() {
                return Err(Error::InvalidArgument(format!("parallel edge ({u}, {v})")));
            }
            g.push_edge(u, v);
        }
        Ok(g)
    }

    fn with_nodes(n: usize) -> Self {
        Self {
            incidence: vec![Vec::new(); n],
            lookup: vec![FxHashMap::default(); n],
            edges: Vec::new(),
            endpoints: Vec::new(),
        }
    }

    fn push_node(&mut self) -> NodeId {
        let id = NodeId(self.incidence.len() as u32);
        self.incidence.push(Vec::new());
        self.lookup.push(FxHashMap::default());
        id
    }

    fn push_edge(&mut self, u: NodeId, v: NodeId) -> EdgeId {
        let e = EdgeId(self.edges.len() as u32);
        self.edges.push((u, v));
        self.incidence[u.index()].push(Incidence { node: v, edge: e });
        self.incidence[v.index()].push(Incidence { node: u, edge: e });
        self.lookup[u.index()].insert(v, e);
        self.lookup[v.index()].insert(u, e);
        self.endpoints.push(u);
        self.endpoints.push(v);
        e
    }

    #[inline]
    fn check_node(&self, v: NodeId) -> Result<()> {
        if v.index() < self.incidence.len() {
            Ok(())
        } else {
            Err(Error::NotFound(v))
        }
    }

    /// Draws `m` distinct existing nodes, each draw degree-proportional.
    ///
    /// Degrees are those at call time. A draw that repeats an already chosen
    /// node is discarded and redrawn.
    pub fn sample_targets(&self, m: usize, rng: &mut Prng) -> Result<Vec<NodeId>> {
        if m == 0 {
            return Err(Error::InvalidConfig("m must be positive".into()));
        }
        if m > self.node_count() {
            return Err(Error::InvalidConfig(format!(
                "cannot pick {m} distinct targets among {} nodes",
                self.node_count()
            )));
        }
        if self.endpoints.is_empty() {
            return Err(Error::InvalidConfig(
                "degree-proportional sampling needs at least one edge".into(),
            ));
        }
        let eligible = self.incidence.iter().filter(|adj| !adj.is_empty()).count();
        if m > eligible {
            return Err(Error::InvalidConfig(format!(
                "cannot pick {m} distinct targets among {eligible} nodes of positive degree"
            )));
        }
        let mut targets: Vec<NodeId> = Vec::with_capacity(m);
        while targets.len() < m {
            let pick = self.endpoints[rng.index(self.endpoints.len())];
            // m is small, so a linear scan beats hashing here.
            if !targets.contains(&pick) {
                targets.push(pick);
            }
        }
        Ok(targets)
    }

    /// One preferential-attachment step: sample `m` targets, then append a new
    /// node linked to all of them.
    pub fn add_node_ba(&mut self, m: usize, rng: &mut Prng) -> Result<Arrival> {
        let targets = self.sample_targets(m, rng)?;
        let node = self.attach(&targets)?;
        Ok(Arrival { node, targets })
    }

    /// Appends a node adjacent to exactly `targets`.
    pub fn attach(&mut self, targets: &[NodeId]) -> Result<NodeId> {
        for (i, &t) in targets.iter().enumerate() {
            self.check_node(t)?;
            if targets[..i].contains(&t) {
                return Err(Error::InvalidArgument(format!("duplicate target {t}")));
            }
        }
        let node = self.push_node();
        for &t in targets {
            self.push_edge(node, t);
        }
        Ok(node)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.incidence.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: NodeId) -> Result<usize> {
        self.check_node(v)?;
        Ok(self.incidence[v.index()].len())
    }

    /// Neighbours of `v` in the order their edges were created.
    pub fn neighbors(&self, v: NodeId) -> Result<impl Iterator<Item = NodeId> + '_> {
        self.check_node(v)?;
        Ok(self.incidence[v.index()].iter().map(|inc| inc.node))
    }

    pub fn incidence(&self, v: NodeId) -> Result<&[Incidence]> {
        self.check_node(v)?;
        Ok(&self.incidence[v.index()])
    }

    /// Unchecked incidence access for hot loops over known-valid nodes.
    #[inline]
    pub(crate) fn incidence_of(&self, v: NodeId) -> &[Incidence] {
        &self.incidence[v.index()]
    }

    #[inline]
    pub(crate) fn degree_of(&self, v: NodeId) -> usize {
        self.incidence[v.index()].len()
    }

    #[inline]
    pub fn edge_between(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        self.lookup.get(u.index())?.get(&v).copied()
    }

    #[inline]
    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.edge_between(u, v).is_some()
    }

    /// Endpoints of `e`, lower-numbered node first only if it was created that way.
    #[inline]
    pub fn endpoints_of(&self, e: EdgeId) -> (NodeId, NodeId) {
        self.edges[e.index()]
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = (EdgeId, NodeId, NodeId)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| (EdgeId(i as u32), u, v))
    }

    pub fn degrees(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.incidence.iter().map(Vec::len)
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> {
        (0..self.node_count() as u32).map(NodeId)
    }

    /// Length of the degree-proportional sampling list (always `2 * edge_count`).
    pub fn sampling_len(&self) -> usize {
        self.endpoints.len()
    }

    /// Full structural scan. O(n + E).
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.node_count();
        let fail = |msg: String| Err(Error::Invariant(msg));

        if self.lookup.len() != n {
            return fail(format!("lookup has {} rows for {n} nodes", self.lookup.len()));
        }
        let mut degree_sum = 0usize;
        for v in self.nodes() {
            let adj = &self.incidence[v.index()];
            let map = &self.lookup[v.index()];
            degree_sum += adj.len();
            if map.len() != adj.len() {
                return fail(format!(
                    "node {v}: {} incidences but {} distinct neighbours",
                    adj.len(),
                    map.len()
                ));
            }
            for inc in adj {
                if inc.node == v {
                    return fail(format!("self-loop on {v}"));
                }
                if inc.node.index() >= n || inc.edge.index() >= self.edges.len() {
                    return fail(format!("node {v}: dangling incidence {inc:?}"));
                }
                if map.get(&inc.node) != Some(&inc.edge) {
                    return fail(format!("node {v}: lookup disagrees for {}", inc.node));
                }
                let (a, b) = self.edges[inc.edge.index()];
                if !((a == v && b == inc.node) || (b == v && a == inc.node)) {
                    return fail(format!("edge {:?} does not join {v} and {}", inc.edge, inc.node));
                }
                if self.lookup[inc.node.index()].get(&v) != Some(&inc.edge) {
                    return fail(format!("asymmetric adjacency between {v} and {}", inc.node));
                }
            }
        }
        if degree_sum != 2 * self.edges.len() {
            return fail(format!(
                "degree sum {degree_sum} != 2 * edge count {}",
                self.edges.len()
            ));
        }
        if self.endpoints.len() != 2 * self.edges.len() {
            return fail(format!(
                "sampling list has {} entries for {} edges",
                self.endpoints.len(),
                self.edges.len()
            ));
        }
        let mut occurrences = vec![0usize; n];
        for &v in &self.endpoints {
            match occurrences.get_mut(v.index()) {
                Some(c) => *c += 1,
                None => return fail(format!("sampling list names unknown node {v}")),
            }
        }
        for v in self.nodes() {
            if occurrences[v.index()] != self.incidence[v.index()].len() {
                return fail(format!(
                    "node {v} appears {} times in sampling list, degree {}",
                    occurrences[v.index()],
                    self.incidence[v.index()].len()
                ));
            }
        }
        Ok(())
    }
}

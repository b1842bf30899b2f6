use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use tiesim::graph::{Arrival, EvolvingGraph, NodeId};
use tiesim::metrics::{count_at_least_k, largest_component, summarize_series};
use tiesim::rng::Prng;
use tiesim::sim::{RunConfig, Simulation};
use tiesim::tie_strength::{overlap, OverlapPolicy, StrongGraph};

/// Overlap straight from the definition, on explicit neighbour sets.
fn brute_overlap(adj: &[BTreeSet<u32>], u: u32, v: u32, policy: &OverlapPolicy) -> f64 {
    let nu = &adj[u as usize];
    let nv = &adj[v as usize];
    let common = nu.intersection(nv).count();
    let mut union: BTreeSet<u32> = nu.union(nv).copied().collect();
    if policy.exclude_endpoints {
        union.remove(&u);
        union.remove(&v);
    }
    if union.is_empty() {
        policy.zero_denominator_value
    } else {
        common as f64 / union.len() as f64
    }
}

fn adjacency(n: usize, edges: &[(u32, u32)]) -> Vec<BTreeSet<u32>> {
    let mut adj = vec![BTreeSet::new(); n];
    for &(u, v) in edges {
        adj[u as usize].insert(v);
        adj[v as usize].insert(u);
    }
    adj
}

/// Simple graph on `n` nodes from arbitrary pairs, dropping loops and repeats.
fn simple_edges(n: usize, pairs: Vec<(u32, u32)>) -> Vec<(u32, u32)> {
    let mut seen = HashSet::new();
    pairs
        .into_iter()
        .map(|(a, b)| (a % n as u32, b % n as u32))
        .filter(|&(a, b)| a != b && seen.insert((a.min(b), a.max(b))))
        .collect()
}

/// Largest component via union-find over an explicit strong edge list.
fn dsu_lcc(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a as usize), find(&mut parent, b as usize));
        if ra != rb {
            let (big, small) = if size[ra] >= size[rb] { (ra, rb) } else { (rb, ra) };
            parent[small] = big;
            size[big] += size[small];
        }
    }
    (0..n)
        .filter(|&i| find(&mut parent, i) == i)
        .map(|i| size[i])
        .max()
        .unwrap_or(0)
}

fn strong_edge_list(g: &EvolvingGraph, s: &StrongGraph) -> Vec<(u32, u32)> {
    g.edges()
        .filter(|(e, _, _)| s.is_strong(*e))
        .map(|(_, u, v)| (u.0, v.0))
        .collect()
}

fn graph_strategy() -> impl Strategy<Value = (usize, Vec<(u32, u32)>)> {
    (2usize..24).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec((0u32..64, 0u32..64), 1..80)
                .prop_map(move |pairs| simple_edges(n, pairs)),
        )
    })
}

fn policy_strategy() -> impl Strategy<Value = OverlapPolicy> {
    (any::<bool>(), prop::sample::select(vec![0.0, 0.5, 1.0])).prop_map(|(ex, z)| OverlapPolicy {
        exclude_endpoints: ex,
        zero_denominator_value: z,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn overlap_matches_set_definition(
        (n, edges) in graph_strategy(),
        policy in policy_strategy(),
    ) {
        let g = EvolvingGraph::from_edges(n, &edges).unwrap();
        let adj = adjacency(n, &edges);
        for &(u, v) in &edges {
            let fast = overlap(&g, NodeId(u), NodeId(v), &policy).unwrap();
            let slow = brute_overlap(&adj, u, v, &policy);
            prop_assert_eq!(fast.to_bits(), slow.to_bits());
            prop_assert!((0.0..=1.0).contains(&fast));
            prop_assert_eq!(fast, overlap(&g, NodeId(v), NodeId(u), &policy).unwrap());
        }
    }

    #[test]
    fn init_and_oracle_agree((n, edges) in graph_strategy(), eps in 0.0f64..0.99) {
        let g = EvolvingGraph::from_edges(n, &edges).unwrap();
        let s = StrongGraph::init_strong(&g, eps, OverlapPolicy::default()).unwrap();
        let o = StrongGraph::rebuild_oracle(&g, eps, OverlapPolicy::default());
        prop_assert_eq!(s.first_divergence(&o, &g), None);
        s.check_invariants(&g).unwrap();
        for (e, u, v) in g.edges() {
            let direct = overlap(&g, u, v, &OverlapPolicy::default()).unwrap();
            prop_assert_eq!(o.overlap_of(e).to_bits(), direct.to_bits());
        }
    }

    /// Arbitrary (not preferential) arrivals on an arbitrary start graph.
    #[test]
    fn arbitrary_arrivals_match_oracle(
        (n, edges) in graph_strategy(),
        arrivals in prop::collection::vec(prop::collection::vec(0u32..1000, 1..8), 1..25),
        eps in prop::sample::select(vec![0.0, 0.01, 0.1, 0.25, 0.5, 0.9]),
        policy in policy_strategy(),
    ) {
        let mut g = EvolvingGraph::from_edges(n, &edges).unwrap();
        let mut s = StrongGraph::init_strong(&g, eps, policy).unwrap();
        for raw in arrivals {
            let count = g.node_count() as u32;
            let mut targets: Vec<NodeId> = Vec::new();
            for r in raw {
                let t = NodeId(r % count);
                if !targets.contains(&t) {
                    targets.push(t);
                }
            }
            let before: Vec<u64> = g.edges().map(|(e, _, _)| s.overlap_of(e).to_bits()).collect();
            let inside = targets.iter().enumerate()
                .flat_map(|(i, a)| targets[i + 1..].iter().map(move |b| (*a, *b)))
                .filter(|&(a, b)| g.has_edge(a, b))
                .count();
            let pre_degrees: usize = targets.iter().map(|&t| g.degree(t).unwrap()).sum();

            let node = g.attach(&targets).unwrap();
            let arrival = Arrival { node, targets: targets.clone() };
            s.apply_arrival(&g, &arrival).unwrap();

            prop_assert_eq!(s.last_recomputed(), targets.len() + pre_degrees - inside);
            for (e, u, v) in g.edges().take(before.len()) {
                if !targets.contains(&u) && !targets.contains(&v) {
                    prop_assert_eq!(s.overlap_of(e).to_bits(), before[e.index()]);
                }
            }
            let o = StrongGraph::rebuild_oracle(&g, eps, policy);
            prop_assert_eq!(s.first_divergence(&o, &g), None);
            s.check_invariants(&g).unwrap();
        }
    }

    #[test]
    fn threshold_is_monotone((n, edges) in graph_strategy(), a in 0.0f64..0.99, b in 0.0f64..0.99) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let g = EvolvingGraph::from_edges(n, &edges).unwrap();
        let s_lo = StrongGraph::init_strong(&g, lo, OverlapPolicy::default()).unwrap();
        let s_hi = StrongGraph::init_strong(&g, hi, OverlapPolicy::default()).unwrap();
        for (e, _, _) in g.edges() {
            prop_assert!(!s_hi.is_strong(e) || s_lo.is_strong(e));
        }
    }

    #[test]
    fn count_is_non_increasing_in_k((n, edges) in graph_strategy(), eps in 0.0f64..0.9) {
        let g = EvolvingGraph::from_edges(n, &edges).unwrap();
        let s = StrongGraph::init_strong(&g, eps, OverlapPolicy::default()).unwrap();
        let counts: Vec<usize> = (1..=n).map(|k| count_at_least_k(&s, k)).collect();
        prop_assert!(counts.windows(2).all(|w| w[0] >= w[1]));
        let brute = s.strong_degrees().filter(|&d| d >= 1).count();
        prop_assert_eq!(counts[0], brute);
    }

    #[test]
    fn lcc_ignores_labels(
        (n, edges) in graph_strategy(),
        eps in 0.0f64..0.9,
        shuffle_seed in any::<u64>(),
    ) {
        let mut perm: Vec<u32> = (0..n as u32).collect();
        let mut rng = Prng::from_seed(shuffle_seed);
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.index(i + 1));
        }
        let relabelled: Vec<(u32, u32)> =
            edges.iter().map(|&(u, v)| (perm[u as usize], perm[v as usize])).collect();
        let g1 = EvolvingGraph::from_edges(n, &edges).unwrap();
        let g2 = EvolvingGraph::from_edges(n, &relabelled).unwrap();
        let s1 = StrongGraph::init_strong(&g1, eps, OverlapPolicy::default()).unwrap();
        let s2 = StrongGraph::init_strong(&g2, eps, OverlapPolicy::default()).unwrap();
        prop_assert_eq!(largest_component(&s1), largest_component(&s2));
        prop_assert_eq!(largest_component(&s1), dsu_lcc(n, strong_edge_list(&g1, &s1)));
    }

    #[test]
    fn unimodal_series_summary(rise in 1usize..40, fall in 1usize..40, base in 0i64..100) {
        // strictly up for `rise` steps then strictly down for `fall` steps
        let mut values: Vec<f64> = (0..=rise as i64).map(|i| (base + 3 * i) as f64).collect();
        let top = *values.last().unwrap();
        values.extend((1..=fall).map(|i| top - 2.0 * i as f64));
        let s = summarize_series(&values, 1).unwrap();
        prop_assert_eq!(s.peak_index, rise);
        prop_assert_eq!(s.peak_value, top);
        prop_assert_eq!(s.pre_trend, 1.0);
        prop_assert_eq!(s.post_trend, -1.0);
    }
}

#[test]
fn ba_growth_matches_oracle_every_step() {
    // n = 500, m = 5, eps = 0.05
    let config = RunConfig {
        k: 5,
        ..RunConfig::new(5, 0.05, 500, 3)
    };
    let mut sim = Simulation::new(&config, 0).unwrap();
    while !sim.is_done() {
        sim.step().unwrap();
        let o = StrongGraph::rebuild_oracle(sim.graph(), 0.05, OverlapPolicy::default());
        assert_eq!(sim.strong().first_divergence(&o, sim.graph()), None, "t={}", sim.t());
    }
}

#[test]
fn ten_seeds_to_two_thousand_nodes() {
    for seed in 0..10u64 {
        let config = RunConfig {
            oracle_check: true,
            snapshot_every: 100,
            ..RunConfig::new(4, 0.05, 2000, seed)
        };
        tiesim::sim::run_single(&config, 0).unwrap();
    }
}

#[test]
fn metrics_agree_with_brute_force_on_oracle_state() {
    for (eps, k) in [(0.05, 5), (0.1, 5)] {
        let config = RunConfig {
            k,
            ..RunConfig::new(10, eps, 500, 21)
        };
        let mut sim = Simulation::new(&config, 0).unwrap();
        while !sim.is_done() {
            sim.step().unwrap();
            if sim.t() == 475 || sim.is_done() {
                let g = sim.graph();
                let o = StrongGraph::rebuild_oracle(g, eps, OverlapPolicy::default());
                let adj = adjacency(
                    g.node_count(),
                    &g.edges().map(|(_, u, v)| (u.0, v.0)).collect::<Vec<_>>(),
                );
                // strong degrees from the brute-force overlap definition
                let mut strong_deg = vec![0usize; g.node_count()];
                let mut strong = Vec::new();
                for (_, u, v) in g.edges() {
                    if brute_overlap(&adj, u.0, v.0, &OverlapPolicy::default()) > eps {
                        strong_deg[u.index()] += 1;
                        strong_deg[v.index()] += 1;
                        strong.push((u.0, v.0));
                    }
                }
                let brute_count = strong_deg.iter().filter(|&&d| d >= k).count();
                assert_eq!(count_at_least_k(sim.strong(), k), brute_count);
                assert_eq!(count_at_least_k(&o, k), brute_count);
                let brute_lcc = dsu_lcc(g.node_count(), strong);
                assert_eq!(largest_component(sim.strong()), brute_lcc);
                assert_eq!(largest_component(&o), brute_lcc);
            }
        }
    }
}

/// Pearson chi-squared p-value of observed counts against expected
/// probabilities.
fn chi_squared_p(counts: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

#[test]
fn k3_draw_frequencies_pass_chi_squared() {
    let g = EvolvingGraph::complete(3).unwrap();
    let mut rng = Prng::from_seed(17);
    let mut counts = [0u64; 3];
    for _ in 0..1_000_000 {
        counts[g.sample_targets(1, &mut rng).unwrap()[0].index()] += 1;
    }
    for c in counts {
        assert!((c as f64 / 1e6 - 1.0 / 3.0).abs() < 0.005);
    }
    assert!(chi_squared_p(&counts, &[1.0 / 3.0; 3]) > 0.01);
}

#[test]
fn chi_squared_detects_a_biased_sampler() {
    // Uniform draws over a star are far from degree-proportional.
    let mut rng = Prng::from_seed(5);
    let mut counts = [0u64; 4];
    for _ in 0..100_000 {
        counts[rng.index(4)] += 1;
    }
    assert!(chi_squared_p(&counts, &[0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]) < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn seed_clique_is_fully_strong(m in 3usize..40, eps in 0.0f64..0.999, seed in any::<u64>()) {
        let config = RunConfig::new(m, eps, m + 1, seed);
        let sim = Simulation::new(&config, 0).unwrap();
        let first = sim.snapshot();
        prop_assert_eq!(first.t, 0);
        prop_assert_eq!(first.n_edges_strong, m * (m - 1) / 2);
        prop_assert_eq!(first.lcc_size, m);
    }
}

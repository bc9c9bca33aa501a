use std::collections::BTreeSet;

use oscnet::graph::{controls, nicely_connected_step, Depth, NetworkTopology, VertexId};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct RandomGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    baths: Vec<usize>,
}

fn random_graph(max: usize) -> impl Strategy<Value = RandomGraph> {
    (1..=max).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (
            Just(n),
            proptest::collection::vec(proptest::bool::weighted(0.3), pairs),
            proptest::collection::vec(proptest::bool::weighted(0.25), n),
        )
            .prop_map(|(n, keep, bath)| {
                let mut edges = Vec::new();
                let mut k = 0;
                for a in 0..n {
                    for b in a + 1..n {
                        if keep[k] {
                            edges.push((a, b));
                        }
                        k += 1;
                    }
                }
                let baths = (0..n).filter(|&v| bath[v]).collect();
                RandomGraph { n, edges, baths }
            })
    })
}

impl RandomGraph {
    fn topology(&self) -> NetworkTopology {
        NetworkTopology::new(self.n, &self.edges, &self.baths).unwrap()
    }
}

/// Straight from the definition: `v ∉ S` joins when some `u ∈ S` has `v` as
/// its only neighbour outside `S`.
fn naive_step(g: &RandomGraph, s: &BTreeSet<usize>) -> BTreeSet<usize> {
    let neighbours = |u: usize| -> Vec<usize> {
        g.edges
            .iter()
            .filter_map(|&(a, b)| if a == u { Some(b) } else if b == u { Some(a) } else { None })
            .collect()
    };
    let mut out = s.clone();
    for &u in s {
        let outside: Vec<usize> = neighbours(u).into_iter().filter(|w| !s.contains(w)).collect();
        if outside.len() == 1 {
            out.insert(outside[0]);
        }
    }
    out
}

fn ids(s: &BTreeSet<usize>) -> BTreeSet<VertexId> {
    s.iter().map(|&v| VertexId(v)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn step_matches_definition(g in random_graph(10), pick in proptest::collection::vec(any::<bool>(), 10)) {
        let t = g.topology();
        let s: BTreeSet<usize> = (0..g.n).filter(|&v| pick[v]).collect();
        let got = nicely_connected_step(&t, &ids(&s)).unwrap();
        prop_assert_eq!(got, ids(&naive_step(&g, &s)));
    }

    #[test]
    fn growth_is_bounded_by_bath_count(g in random_graph(12)) {
        let r = controls(&g.topology());
        for w in r.growth.windows(2) {
            prop_assert!(w[1] > w[0]);
            prop_assert!(w[1] <= w[0] + g.baths.len());
        }
    }

    #[test]
    fn depths_match_iterated_definition(g in random_graph(10)) {
        let r = controls(&g.topology());
        let mut s: BTreeSet<usize> = g.baths.iter().copied().collect();
        let mut level = vec![None; g.n];
        for &b in &s {
            level[b] = Some(0);
        }
        for k in 1..=g.n {
            let next = naive_step(&g, &s);
            for &v in next.difference(&s) {
                level[v] = Some(k);
            }
            s = next;
        }
        let expected: Vec<Depth> = level.iter().map(|l| l.map_or(Depth::Uncontrolled, Depth::Level)).collect();
        prop_assert_eq!(&r.depth, &expected);
        prop_assert_eq!(r.controlled, s.len() == g.n);
    }

    #[test]
    fn more_baths_never_shrink_the_controlled_set(g in random_graph(10), extra in 0usize..10) {
        let before = controls(&g.topology());
        let mut baths = g.baths.clone();
        baths.push(extra % g.n);
        let after = controls(&g.topology().with_baths(&baths).unwrap());
        for v in 0..g.n {
            if before.depth[v] != Depth::Uncontrolled {
                prop_assert!(after.depth[v] != Depth::Uncontrolled);
            }
        }
    }

    #[test]
    fn edge_order_and_orientation_do_not_matter(g in random_graph(10), seed in any::<u64>()) {
        let mut edges: Vec<(usize, usize)> = g.edges.iter().map(|&(a, b)| if seed % 2 == 0 { (b, a) } else { (a, b) }).collect();
        let len = edges.len();
        if len > 1 {
            edges.rotate_left((seed as usize) % len);
        }
        let shuffled = NetworkTopology::new(g.n, &edges, &g.baths).unwrap();
        prop_assert_eq!(controls(&shuffled), controls(&g.topology()));
    }

    #[test]
    fn relabelling_permutes_depths(g in random_graph(10), shift in 0usize..10) {
        let p = |v: usize| (v + shift) % g.n;
        let edges: Vec<(usize, usize)> = g.edges.iter().map(|&(a, b)| (p(a), p(b))).collect();
        let baths: Vec<usize> = g.baths.iter().map(|&b| p(b)).collect();
        let moved = controls(&NetworkTopology::new(g.n, &edges, &baths).unwrap());
        let orig = controls(&g.topology());
        for v in 0..g.n {
            prop_assert_eq!(moved.depth[p(v)], orig.depth[v]);
        }
    }
}

#[test]
fn names_resolve_both_ways() {
    let t = NetworkTopology::with_names(vec!["x".into(), "y".into()], &[(0, 1)], &[1]).unwrap();
    assert_eq!(t.vertex_by_name("y"), Some(VertexId(1)));
    assert_eq!(t.name(VertexId(0)), "x");
    assert!(t.is_bath(VertexId(1)) && !t.is_bath(VertexId(0)));
    assert!(NetworkTopology::with_names(vec!["x".into(), "x".into()], &[], &[]).is_err());
}

#[test]
fn topology_json_round_trip() {
    let t = oscnet::graph::builtin_fixture("fig2_hexcolumns").unwrap();
    let text = serde_json::to_string(&t).unwrap();
    let back: NetworkTopology = serde_json::from_str(&text).unwrap();
    assert_eq!(controls(&back), controls(&t));
    assert_eq!(back.neighbours(VertexId(0)), t.neighbours(VertexId(0)));
}

//! SSP and network simplex against exhaustive enumeration on tiny networks.

mod common;

use flowlab::netsimplex::{ns_run, NsOptions, TreeBasis};
use flowlab::ssp::{ssp_run, DEFAULT_MAX_ITERATIONS};
use flowlab::{flow_cost, ArcId, Capacity, Flow, Network, NetworkBuilder, NodeId, Rational};
use proptest::prelude::*;
use rand::Rng;

#[derive(Debug)]
struct Tiny {
    nodes: usize,
    // (tail, head, cost, capacity)
    arcs: Vec<(usize, usize, i64, i64)>,
}

fn network(t: &Tiny) -> Network {
    let mut b = NetworkBuilder::new();
    let ids: Vec<NodeId> = (0..t.nodes).map(|_| b.add_node(None, Rational::zero())).collect();
    for &(u, v, c, cap) in &t.arcs {
        b.add_arc(ids[u], ids[v], Rational::from_integer(c), Capacity::finite(cap), None);
    }
    b.set_terminals(ids[0], ids[t.nodes - 1]);
    b.build()
}

/// Max flow value and min cost among max flows, over all integer flows.
fn brute_force(t: &Tiny) -> (i64, i64) {
    let m = t.arcs.len();
    let mut best: Option<(i64, i64)> = None;
    let mut f = vec![0i64; m];
    loop {
        let mut excess = vec![0i64; t.nodes];
        for (k, &(u, v, _, _)) in t.arcs.iter().enumerate() {
            excess[u] -= f[k];
            excess[v] += f[k];
        }
        if excess[1..t.nodes - 1].iter().all(|&e| e == 0) {
            let value = excess[t.nodes - 1];
            let cost: i64 = t.arcs.iter().zip(&f).map(|(a, x)| a.2 * x).sum();
            best = match best {
                Some((bv, bc)) if bv > value || (bv == value && bc <= cost) => Some((bv, bc)),
                _ => Some((value, cost)),
            };
        }
        let mut k = 0;
        loop {
            if k == m {
                return best.unwrap();
            }
            if f[k] < t.arcs[k].3 {
                f[k] += 1;
                break;
            }
            f[k] = 0;
            k += 1;
        }
    }
}

fn arb_tiny() -> impl Strategy<Value = Tiny> {
    (3usize..=5).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, 0i64..=6, 0i64..=2), 1..=6).prop_map(move |raw| Tiny {
            nodes: n,
            arcs: raw.into_iter().filter(|a| a.0 != a.1).collect(),
        })
    })
}

proptest! {
    #[test]
    fn ssp_matches_enumeration(t in arb_tiny()) {
        prop_assume!(!t.arcs.is_empty());
        let net = network(&t);
        let trace = ssp_run(&net, &[], DEFAULT_MAX_ITERATIONS).unwrap();
        let (value, cost) = brute_force(&t);
        let routed: Rational = trace.iterations.iter().map(|it| &it.amount).sum();
        prop_assert_eq!(routed, Rational::from_integer(value));
        prop_assert_eq!(&trace.total_cost, &Rational::from_integer(cost));
        prop_assert_eq!(flow_cost(&net, &trace.final_flow), trace.total_cost.clone());
        for w in trace.iterations.windows(2) {
            prop_assert!(w[0].path_cost <= w[1].path_cost);
        }
    }
}

/// The same network with balances `+value` / `-value` at s / t and a big-M
/// artificial star from s, so that the star is a feasible starting tree.
fn with_artificial_start(t: &Tiny, value: i64) -> (Network, TreeBasis, Flow, Vec<ArcId>) {
    let big_m = 1000;
    let mut b = NetworkBuilder::new();
    let ids: Vec<NodeId> = (0..t.nodes).map(|_| b.add_node(None, Rational::zero())).collect();
    b.set_balance(ids[0], Rational::from_integer(value));
    b.set_balance(ids[t.nodes - 1], Rational::from_integer(-value));
    for &(u, v, c, cap) in &t.arcs {
        b.add_arc(ids[u], ids[v], Rational::from_integer(c), Capacity::finite(cap), None);
    }
    let mut star = Vec::new();
    for &v in &ids[1..] {
        star.push(b.add_arc(ids[0], v, Rational::from_integer(big_m), Capacity::Unbounded, None));
    }
    let net = b.build();
    let mut flow = Flow::zero(&net);
    flow.set(*star.last().unwrap(), Rational::from_integer(value));
    let basis = TreeBasis::with_tree(&net, ids[0], star.iter().copied());
    (net, basis, flow, star)
}

#[test]
fn simplex_matches_enumeration() {
    let mut r = common::rng(0x5eed);
    let mut checked = 0;
    for _ in 0..400 {
        let n = r.random_range(3..=5);
        let arcs: Vec<(usize, usize, i64, i64)> = (0..r.random_range(1..=6))
            .map(|_| (r.random_range(0..n), r.random_range(0..n), r.random_range(0..=6), r.random_range(0..=2)))
            .filter(|a| a.0 != a.1)
            .collect();
        if arcs.is_empty() {
            continue;
        }
        let t = Tiny { nodes: n, arcs };
        let (value, cost) = brute_force(&t);
        let (net, basis, flow, star) = with_artificial_start(&t, value);
        let opts = NsOptions {
            allow_degenerate: true,
            max_pivots: 10_000,
            check_invariants: true,
            ..NsOptions::default()
        };
        let trace = ns_run(&net, basis, flow, opts).unwrap();
        for a in &star {
            assert!(trace.final_flow.get(*a).is_zero(), "artificial arc still used");
        }
        assert_eq!(trace.objective, Rational::from_integer(cost));
        let ssp = ssp_run(&network(&t), &[], DEFAULT_MAX_ITERATIONS).unwrap();
        assert_eq!(trace.objective, ssp.total_cost);
        checked += 1;
    }
    assert!(checked > 300);
}

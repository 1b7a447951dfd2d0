//! Behaviour of the algorithms on the generated networks beyond the
//! acceptance criteria.

mod common;

use common::{instance, mixed_corpus, q};
use flowlab::experiments::{partition_oracle, ssp_budget};
use flowlab::gadgets::{build_gns_with, build_gssp, build_ns_harness, GnsOptions};
use flowlab::netsimplex::{ns_run, NsOptions};
use flowlab::ssp::SspRunner;
use flowlab::Rational;

#[test]
fn gssp_gadgets_move_in_lockstep() {
    for inst in mixed_corpus(0x10c, 20, 2, 7) {
        let g = build_gssp(&inst);
        let connectors: Vec<_> = g.parts.iter().flat_map(|p| p.connectors.clone()).collect();
        assert_eq!(connectors.len(), 4);
        let mut run = SspRunner::new(&g.net, &g.watched, ssp_budget(inst.len())).unwrap();
        let mut j = 0u64;
        loop {
            if run.iterations_done().is_multiple_of(2) {
                let want = Rational::from_integer((run.iterations_done() / 2) as i64);
                for a in &connectors {
                    assert_eq!(run.flow().get(*a), &want, "{:?} before iteration {j}", inst.raw);
                }
            }
            if run.step().unwrap().is_none() {
                break;
            }
            j += 1;
        }
        assert_eq!(j, 1 << (inst.len() + 1));
    }
}

#[test]
fn simplex_objective_strictly_decreases() {
    let inst = instance(&[3, 1, 2]);
    let h = build_ns_harness(&inst, -1, &q("2/5"), 3).unwrap();
    let g = build_gns_with(&inst, &GnsOptions::default());
    for net in [h, g] {
        let opts = NsOptions {
            watched: net.watched.clone(),
            ..NsOptions::default()
        };
        let start = flowlab::flow_cost(&net.net, &net.initial_flow);
        let trace = ns_run(&net.net, net.initial_basis.clone().unwrap(), net.initial_flow.clone(), opts).unwrap();
        let mut last = start;
        for p in &trace.pivots {
            assert!(p.objective < last, "pivot {} does not improve", p.index);
            last = p.objective.clone();
        }
    }
}

#[test]
fn perturbed_gns_gives_same_answer() {
    for inst in mixed_corpus(0x9e7, 16, 2, 6) {
        let mut counts = Vec::new();
        for perturb in [false, true] {
            let g = build_gns_with(&inst, &GnsOptions { perturb });
            let opts = NsOptions {
                watched: g.watched.clone(),
                ..NsOptions::default()
            };
            let trace = ns_run(&g.net, g.initial_basis.clone().unwrap(), g.initial_flow.clone(), opts).unwrap();
            let yes = partition_oracle(&inst).unwrap().is_some();
            assert_eq!(trace.first_watched_entry().is_some(), yes, "{:?}", inst.raw);
            counts.push(trace.pivots.len());
        }
        assert_eq!(counts[0], counts[1], "{:?}", inst.raw);
    }
}

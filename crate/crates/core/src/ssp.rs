//! Successive Shortest Path algorithm with a complete per-iteration trace.
//!
//! Starting from the zero flow, every iteration augments the bottleneck amount
//! along a minimum-cost source-sink path of the residual network. Distances
//! come from a FIFO label-correcting pass (backward arcs carry negative
//! costs). Among all shortest paths the one whose `(ArcId, direction)`
//! sequence is lexicographically smallest is selected, so the choice never
//! depends on the order in which labels happened to be corrected.

use std::collections::VecDeque;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{Capacity, Rational};
use crate::flownet::{
    residual_capacity, validate_network, ArcId, ArcStep, Flow, Network, NetworkError, NodeId,
};

pub const DEFAULT_MAX_ITERATIONS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SspError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("network has no designated source/sink")]
    MissingTerminals,
    #[error("successive shortest paths start from the zero flow, but node {0} has a nonzero balance")]
    NonzeroBalance(NodeId),
    #[error("residual network contains a negative-cost cycle")]
    NegativeCycleDetected,
    #[error("augmenting path has unbounded capacity")]
    UnboundedAugmentation,
    #[error("more than {0} iterations needed")]
    IterationBudgetExceeded(u64),
}

/// A minimum-cost residual path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualPath {
    pub nodes: Vec<NodeId>,
    pub arcs: Vec<ArcStep>,
    pub cost: Rational,
    pub bottleneck: Capacity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SspIteration {
    #[serde(rename = "j")]
    pub index: u64,
    #[serde(rename = "path")]
    pub path_nodes: Vec<NodeId>,
    #[serde(rename = "arcs")]
    pub path_arcs: Vec<ArcStep>,
    #[serde(rename = "cost")]
    pub path_cost: Rational,
    pub amount: Rational,
    #[serde(rename = "watchedFlow", default, skip_serializing_if = "Option::is_none")]
    pub watched_flow: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SspTrace {
    pub iterations: Vec<SspIteration>,
    #[serde(skip)]
    pub final_flow: Flow,
    #[serde(rename = "totalCost")]
    pub total_cost: Rational,
}

impl SspTrace {
    /// First iteration after which the watched arcs carry positive flow.
    pub fn first_watched_use(&self) -> Option<u64> {
        self.iterations
            .iter()
            .find(|it| it.watched_flow.as_ref().is_some_and(Rational::is_positive))
            .map(|it| it.index)
    }

    pub fn from_json(text: &str) -> Result<SspTrace, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        self.write_json(&mut out).expect("writing to a vec");
        String::from_utf8(out).expect("json is utf-8")
    }

    pub fn write_json<W: Write>(&self, w: W) -> io::Result<()> {
        let mut tw = SspTraceWriter::new(w)?;
        for it in &self.iterations {
            tw.write(it)?;
        }
        tw.finish(&self.total_cost)
    }
}

/// Streams a trace one iteration per line, so long runs need not be buffered.
pub struct SspTraceWriter<W: Write> {
    out: W,
    first: bool,
}

impl<W: Write> SspTraceWriter<W> {
    pub fn new(mut out: W) -> io::Result<Self> {
        out.write_all(b"{\"iterations\":[")?;
        Ok(SspTraceWriter { out, first: true })
    }

    pub fn write(&mut self, it: &SspIteration) -> io::Result<()> {
        self.out.write_all(if self.first { b"\n" } else { b",\n" })?;
        self.first = false;
        serde_json::to_writer(&mut self.out, it)?;
        Ok(())
    }

    pub fn finish(mut self, total_cost: &Rational) -> io::Result<()> {
        writeln!(self.out, "\n],\"totalCost\":\"{total_cost}\"}}")?;
        self.out.flush()
    }
}

struct ResidualEdge {
    step: ArcStep,
    to: NodeId,
    cost: Rational,
}

fn residual_adjacency(net: &Network, flow: &Flow) -> Vec<Vec<ResidualEdge>> {
    let mut out: Vec<Vec<ResidualEdge>> = (0..net.node_count()).map(|_| Vec::new()).collect();
    for a in net.arcs() {
        let f = flow.get(a.id);
        if a.capacity.minus(f).is_positive() {
            out[a.tail.0].push(ResidualEdge {
                step: ArcStep::forward(a.id),
                to: a.head,
                cost: a.cost.clone(),
            });
        }
        if f.is_positive() {
            out[a.head.0].push(ResidualEdge {
                step: ArcStep::backward(a.id),
                to: a.tail,
                cost: -&a.cost,
            });
        }
    }
    out
}

/// Minimum-cost `source -> sink` path in the residual network of `flow`, or
/// `None` when the sink is unreachable. Ties go to the lexicographically
/// smallest sequence of `(ArcId, direction)` pairs.
pub fn shortest_residual_path(
    net: &Network,
    flow: &Flow,
    source: NodeId,
    sink: NodeId,
) -> Result<Option<ResidualPath>, SspError> {
    let n = net.node_count();
    let adj = residual_adjacency(net, flow);

    let mut dist: Vec<Option<Rational>> = vec![None; n];
    let mut hops = vec![0usize; n];
    let mut queued = vec![false; n];
    let mut queue = VecDeque::new();
    dist[source.0] = Some(Rational::zero());
    queue.push_back(source);
    queued[source.0] = true;
    while let Some(u) = queue.pop_front() {
        queued[u.0] = false;
        let du = dist[u.0].clone().expect("queued nodes are labelled");
        for e in &adj[u.0] {
            let cand = &du + &e.cost;
            if dist[e.to.0].as_ref().is_none_or(|d| cand < *d) {
                hops[e.to.0] = hops[u.0] + 1;
                if hops[e.to.0] >= n {
                    return Err(SspError::NegativeCycleDetected);
                }
                dist[e.to.0] = Some(cand);
                if !queued[e.to.0] {
                    queued[e.to.0] = true;
                    queue.push_back(e.to);
                }
            }
        }
    }
    let Some(target) = dist[sink.0].clone() else {
        return Ok(None);
    };

    // Arcs lying on some shortest path from the source.
    let mut tight: Vec<Vec<&ResidualEdge>> = (0..n).map(|_| Vec::new()).collect();
    let mut tight_in: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for (u, edges) in adj.iter().enumerate() {
        let Some(du) = &dist[u] else { continue };
        for e in edges {
            if dist[e.to.0].as_ref() == Some(&(du + &e.cost)) {
                tight[u].push(e);
                tight_in[e.to.0].push(NodeId(u));
            }
        }
    }

    let mut on_path = vec![false; n];
    let mut nodes = vec![source];
    let mut arcs = Vec::new();
    on_path[source.0] = true;
    let mut cur = source;
    while cur != sink {
        let reach = reaches_sink(&tight_in, &on_path, sink);
        let next = tight[cur.0]
            .iter()
            .find(|e| !on_path[e.to.0] && reach[e.to.0])
            .expect("a tight path to the sink exists");
        arcs.push(next.step);
        nodes.push(next.to);
        on_path[next.to.0] = true;
        cur = next.to;
    }

    let bottleneck = arcs
        .iter()
        .map(|s| residual_capacity(net.arc(s.arc), flow.get(s.arc), s.dir))
        .fold(Capacity::Unbounded, Capacity::min);
    Ok(Some(ResidualPath {
        nodes,
        arcs,
        cost: target,
        bottleneck,
    }))
}

/// Nodes that reach `sink` through tight arcs while avoiding `blocked` nodes.
fn reaches_sink(tight_in: &[Vec<NodeId>], blocked: &[bool], sink: NodeId) -> Vec<bool> {
    let mut reach = vec![false; tight_in.len()];
    reach[sink.0] = true;
    let mut stack = vec![sink];
    while let Some(v) = stack.pop() {
        for &u in &tight_in[v.0] {
            if !reach[u.0] && !blocked[u.0] {
                reach[u.0] = true;
                stack.push(u);
            }
        }
    }
    reach
}

/// Step-wise SSP execution; [`ssp_run`] drives it to completion.
pub struct SspRunner<'a> {
    net: &'a Network,
    source: NodeId,
    sink: NodeId,
    watched: Vec<ArcId>,
    max_iterations: u64,
    flow: Flow,
    routed: Rational,
    total_cost: Rational,
    last_cost: Option<Rational>,
    next_index: u64,
    finished: bool,
}

impl<'a> SspRunner<'a> {
    pub fn new(net: &'a Network, watched: &[ArcId], max_iterations: u64) -> Result<Self, SspError> {
        validate_network(net)?;
        let (Some(source), Some(sink)) = (net.source(), net.sink()) else {
            return Err(SspError::MissingTerminals);
        };
        if let Some(v) = net.nodes().iter().find(|v| !v.balance.is_zero()) {
            return Err(SspError::NonzeroBalance(v.id));
        }
        Ok(SspRunner {
            net,
            source,
            sink,
            watched: watched.to_vec(),
            max_iterations,
            flow: Flow::zero(net),
            routed: Rational::zero(),
            total_cost: Rational::zero(),
            last_cost: None,
            next_index: 0,
            finished: false,
        })
    }

    pub fn flow(&self) -> &Flow {
        &self.flow
    }

    pub fn routed(&self) -> &Rational {
        &self.routed
    }

    pub fn total_cost(&self) -> &Rational {
        &self.total_cost
    }

    pub fn iterations_done(&self) -> u64 {
        self.next_index
    }

    /// Performs one augmentation; `Ok(None)` once the sink is unreachable.
    pub fn step(&mut self) -> Result<Option<SspIteration>, SspError> {
        if self.finished {
            return Ok(None);
        }
        let Some(path) = shortest_residual_path(self.net, &self.flow, self.source, self.sink)?
        else {
            self.finished = true;
            return Ok(None);
        };
        if self.next_index >= self.max_iterations {
            return Err(SspError::IterationBudgetExceeded(self.max_iterations));
        }
        let Capacity::Finite(amount) = path.bottleneck else {
            return Err(SspError::UnboundedAugmentation);
        };
        debug_assert!(
            self.last_cost.as_ref().is_none_or(|c| *c <= path.cost),
            "path costs must be nondecreasing"
        );
        for s in &path.arcs {
            self.flow.push(s.arc, s.dir, &amount);
        }
        self.routed += &amount;
        self.total_cost += &path.cost * &amount;
        self.last_cost = Some(path.cost.clone());
        debug_assert!(self.flow.check_feasible(self.net, &self.routed).is_ok());

        let watched_flow = (!self.watched.is_empty())
            .then(|| self.watched.iter().map(|a| self.flow.get(*a)).sum());
        let it = SspIteration {
            index: self.next_index,
            path_nodes: path.nodes,
            path_arcs: path.arcs,
            path_cost: path.cost,
            amount,
            watched_flow,
        };
        self.next_index += 1;
        Ok(Some(it))
    }

    pub fn into_flow(self) -> Flow {
        self.flow
    }
}

/// Runs SSP from the zero flow until the sink becomes unreachable.
pub fn ssp_run(net: &Network, watched: &[ArcId], max_iterations: u64) -> Result<SspTrace, SspError> {
    let mut runner = SspRunner::new(net, watched, max_iterations)?;
    let mut iterations = Vec::new();
    while let Some(it) = runner.step()? {
        iterations.push(it);
    }
    let total_cost = runner.total_cost().clone();
    Ok(SspTrace {
        iterations,
        final_flow: runner.into_flow(),
        total_cost,
    })
}

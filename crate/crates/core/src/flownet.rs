//! Network data model, flows, residual arcs and validation.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{Capacity, Rational};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArcId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for ArcId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("node balances sum to {0}, expected 0")]
    UnbalancedSupplies(Rational),
    #[error("arc {0} has an endpoint outside the node table")]
    DanglingEndpoint(ArcId),
    #[error("arc {0} has negative capacity")]
    NegativeCapacity(ArcId),
    #[error("arc {0} is a self-loop")]
    SelfLoop(ArcId),
    #[error("label {0:?} is used by more than one node")]
    DuplicateLabel(String),
    #[error("ids in the network file are not dense and ordered (expected {expected}, found {found})")]
    NonDenseIds { expected: usize, found: usize },
    #[error("source or sink {0} is not a node of the network")]
    UnknownTerminal(NodeId),
    #[error("flow on arc {0} violates its capacity bounds")]
    InfeasibleFlow(ArcId),
    #[error("flow conservation violated at node {0}")]
    ConservationViolated(NodeId),
    #[error("flow has {found} entries but the network has {expected} arcs")]
    FlowLength { expected: usize, found: usize },
    #[error("malformed network json: {0}")]
    Json(String),
}

/// Which way a residual arc traverses its base arc.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn reversed(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// One traversal of an arc, as used in augmenting paths and pivot cycles.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArcStep {
    pub arc: ArcId,
    pub dir: Direction,
}

impl ArcStep {
    pub fn new(arc: ArcId, dir: Direction) -> Self {
        ArcStep { arc, dir }
    }

    pub fn forward(arc: ArcId) -> Self {
        ArcStep::new(arc, Direction::Forward)
    }

    pub fn backward(arc: ArcId) -> Self {
        ArcStep::new(arc, Direction::Backward)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub balance: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arc {
    pub id: ArcId,
    pub tail: NodeId,
    pub head: NodeId,
    pub cost: Rational,
    pub capacity: Capacity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Arc {
    /// Start and end node when traversed in `dir`.
    pub fn endpoints(&self, dir: Direction) -> (NodeId, NodeId) {
        match dir {
            Direction::Forward => (self.tail, self.head),
            Direction::Backward => (self.head, self.tail),
        }
    }

    pub fn display_name(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.id.to_string())
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkJson {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sink: Option<NodeId>,
}

/// A directed multigraph with node balances. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    source: Option<NodeId>,
    sink: Option<NodeId>,
    // incident arcs per node, in ArcId order
    incident: Vec<Vec<ArcId>>,
}

impl Network {
    fn assemble(
        nodes: Vec<Node>,
        arcs: Vec<Arc>,
        source: Option<NodeId>,
        sink: Option<NodeId>,
    ) -> Network {
        let mut incident = vec![Vec::new(); nodes.len()];
        for a in &arcs {
            if let Some(list) = incident.get_mut(a.tail.0) {
                list.push(a.id);
            }
            if a.head != a.tail {
                if let Some(list) = incident.get_mut(a.head.0) {
                    list.push(a.id);
                }
            }
        }
        Network {
            nodes,
            arcs,
            source,
            sink,
            incident,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn arc(&self, id: ArcId) -> &Arc {
        &self.arcs[id.0]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn source(&self) -> Option<NodeId> {
        self.source
    }

    pub fn sink(&self) -> Option<NodeId> {
        self.sink
    }

    /// Arcs with `v` as tail or head, ascending by id.
    pub fn incident(&self, v: NodeId) -> &[ArcId] {
        &self.incident[v.0]
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.nodes
            .iter()
            .find(|n| n.label.as_deref() == Some(label))
            .map(|n| n.id)
    }

    pub fn arcs_by_label(&self, label: &str) -> Vec<ArcId> {
        self.arcs
            .iter()
            .filter(|a| a.label.as_deref() == Some(label))
            .map(|a| a.id)
            .collect()
    }

    pub fn node_name(&self, v: NodeId) -> String {
        self.node(v).label.clone().unwrap_or_else(|| v.to_string())
    }

    /// Copy of this network with one arc's cost replaced.
    pub fn with_arc_cost(&self, id: ArcId, cost: Rational) -> Network {
        let mut arcs = self.arcs.clone();
        arcs[id.0].cost = cost;
        Network::assemble(self.nodes.clone(), arcs, self.source, self.sink)
    }

    /// Canonical pretty JSON; identical networks always produce identical bytes.
    pub fn to_json(&self) -> String {
        let doc = NetworkJson {
            nodes: self.nodes.clone(),
            arcs: self.arcs.clone(),
            source: self.source,
            sink: self.sink,
        };
        serde_json::to_string_pretty(&doc).expect("network serializes")
    }

    /// Parses the JSON schema. Ids must be dense and listed in order; the
    /// result is not validated beyond that (see [`validate_network`]).
    pub fn from_json(text: &str) -> Result<Network, NetworkError> {
        let doc: NetworkJson =
            serde_json::from_str(text).map_err(|e| NetworkError::Json(e.to_string()))?;
        for (i, n) in doc.nodes.iter().enumerate() {
            if n.id.0 != i {
                return Err(NetworkError::NonDenseIds {
                    expected: i,
                    found: n.id.0,
                });
            }
        }
        for (i, a) in doc.arcs.iter().enumerate() {
            if a.id.0 != i {
                return Err(NetworkError::NonDenseIds {
                    expected: i,
                    found: a.id.0,
                });
            }
        }
        Ok(Network::assemble(doc.nodes, doc.arcs, doc.source, doc.sink))
    }
}

/// Incremental construction of a [`Network`]; ids are handed out densely.
#[derive(Debug, Default, Clone)]
pub struct NetworkBuilder {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    source: Option<NodeId>,
    sink: Option<NodeId>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts from a copy of an existing network.
    pub fn from_network(net: &Network) -> Self {
        NetworkBuilder {
            nodes: net.nodes.clone(),
            arcs: net.arcs.clone(),
            source: net.source,
            sink: net.sink,
        }
    }

    pub fn add_node(&mut self, label: Option<&str>, balance: Rational) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node {
            id,
            balance,
            label: label.map(str::to_string),
        });
        id
    }

    pub fn add_arc(
        &mut self,
        tail: NodeId,
        head: NodeId,
        cost: Rational,
        capacity: Capacity,
        label: Option<&str>,
    ) -> ArcId {
        let id = ArcId(self.arcs.len());
        self.arcs.push(Arc {
            id,
            tail,
            head,
            cost,
            capacity,
            label: label.map(str::to_string),
        });
        id
    }

    pub fn set_balance(&mut self, v: NodeId, balance: Rational) {
        self.nodes[v.0].balance = balance;
    }

    pub fn balance(&self, v: NodeId) -> &Rational {
        &self.nodes[v.0].balance
    }

    pub fn set_cost(&mut self, a: ArcId, cost: Rational) {
        self.arcs[a.0].cost = cost;
    }

    pub fn arc(&self, a: ArcId) -> &Arc {
        &self.arcs[a.0]
    }

    pub fn arc_mut(&mut self, a: ArcId) -> &mut Arc {
        &mut self.arcs[a.0]
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn set_terminals(&mut self, source: NodeId, sink: NodeId) {
        self.source = Some(source);
        self.sink = Some(sink);
    }

    pub fn build(self) -> Network {
        Network::assemble(self.nodes, self.arcs, self.source, self.sink)
    }
}

/// Checks balances, endpoints, capacities and node-label uniqueness.
pub fn validate_network(net: &Network) -> Result<(), NetworkError> {
    let n = net.node_count();
    for a in net.arcs() {
        if a.tail.0 >= n || a.head.0 >= n {
            return Err(NetworkError::DanglingEndpoint(a.id));
        }
        if a.tail == a.head {
            return Err(NetworkError::SelfLoop(a.id));
        }
        if let Capacity::Finite(c) = &a.capacity {
            if c.is_negative() {
                return Err(NetworkError::NegativeCapacity(a.id));
            }
        }
    }
    for t in [net.source(), net.sink()].into_iter().flatten() {
        if t.0 >= n {
            return Err(NetworkError::UnknownTerminal(t));
        }
    }
    let mut seen = HashSet::new();
    for node in net.nodes() {
        if let Some(l) = &node.label {
            if !seen.insert(l.as_str()) {
                return Err(NetworkError::DuplicateLabel(l.clone()));
            }
        }
    }
    let total: Rational = net.nodes().iter().map(|v| &v.balance).sum();
    if !total.is_zero() {
        return Err(NetworkError::UnbalancedSupplies(total));
    }
    Ok(())
}

/// Per-arc flow values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Flow {
    values: Vec<Rational>,
}

impl Flow {
    pub fn zero(net: &Network) -> Flow {
        Flow {
            values: vec![Rational::zero(); net.arc_count()],
        }
    }

    pub fn from_values(values: Vec<Rational>) -> Flow {
        Flow { values }
    }

    pub fn get(&self, a: ArcId) -> &Rational {
        &self.values[a.0]
    }

    pub fn set(&mut self, a: ArcId, value: Rational) {
        self.values[a.0] = value;
    }

    pub fn add(&mut self, a: ArcId, delta: &Rational) {
        self.values[a.0] += delta;
    }

    /// Pushes `amount` through `a` in direction `dir`.
    pub fn push(&mut self, a: ArcId, dir: Direction, amount: &Rational) {
        match dir {
            Direction::Forward => self.values[a.0] += amount,
            Direction::Backward => self.values[a.0] -= amount,
        }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `0 <= f(a) <= u(a)` on every arc.
    pub fn check_capacities(&self, net: &Network) -> Result<(), NetworkError> {
        if self.values.len() != net.arc_count() {
            return Err(NetworkError::FlowLength {
                expected: net.arc_count(),
                found: self.values.len(),
            });
        }
        for a in net.arcs() {
            let f = &self.values[a.id.0];
            if f.is_negative() || !a.capacity.admits(f) {
                return Err(NetworkError::InfeasibleFlow(a.id));
            }
        }
        Ok(())
    }

    /// Net outflow minus inflow at each node equals its balance, with `routed`
    /// extra units leaving the source and entering the sink.
    pub fn check_conservation(&self, net: &Network, routed: &Rational) -> Result<(), NetworkError> {
        let mut excess: Vec<Rational> = net.nodes().iter().map(|v| v.balance.clone()).collect();
        if !routed.is_zero() {
            if let (Some(s), Some(t)) = (net.source(), net.sink()) {
                excess[s.0] += routed;
                excess[t.0] -= routed;
            }
        }
        for a in net.arcs() {
            let f = &self.values[a.id.0];
            excess[a.tail.0] -= f;
            excess[a.head.0] += f;
        }
        match excess.iter().position(|e| !e.is_zero()) {
            Some(v) => Err(NetworkError::ConservationViolated(NodeId(v))),
            None => Ok(()),
        }
    }

    pub fn check_feasible(&self, net: &Network, routed: &Rational) -> Result<(), NetworkError> {
        self.check_capacities(net)?;
        self.check_conservation(net, routed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualArc {
    pub base: ArcId,
    pub direction: Direction,
    pub from: NodeId,
    pub to: NodeId,
    pub residual_capacity: Capacity,
    pub residual_cost: Rational,
}

/// Residual capacity of `a` in direction `dir` under `flow`.
pub fn residual_capacity(arc: &Arc, flow: &Rational, dir: Direction) -> Capacity {
    match dir {
        Direction::Forward => arc.capacity.minus(flow),
        Direction::Backward => Capacity::Finite(flow.clone()),
    }
}

pub fn residual_cost(arc: &Arc, dir: Direction) -> Rational {
    match dir {
        Direction::Forward => arc.cost.clone(),
        Direction::Backward => -&arc.cost,
    }
}

/// All residual arcs with positive capacity, ordered by base arc then
/// forward before backward.
pub fn residual_network(net: &Network, flow: &Flow) -> Result<Vec<ResidualArc>, NetworkError> {
    flow.check_capacities(net)?;
    let mut out = Vec::with_capacity(net.arc_count() * 2);
    for a in net.arcs() {
        for dir in [Direction::Forward, Direction::Backward] {
            let cap = residual_capacity(a, flow.get(a.id), dir);
            if cap.is_positive() {
                let (from, to) = a.endpoints(dir);
                out.push(ResidualArc {
                    base: a.id,
                    direction: dir,
                    from,
                    to,
                    residual_capacity: cap,
                    residual_cost: residual_cost(a, dir),
                });
            }
        }
    }
    Ok(out)
}

/// `sum_a cost(a) * flow(a)`.
pub fn flow_cost(net: &Network, flow: &Flow) -> Rational {
    net.arcs()
        .iter()
        .filter(|a| !flow.get(a.id).is_zero())
        .map(|a| &a.cost * flow.get(a.id))
        .sum()
}

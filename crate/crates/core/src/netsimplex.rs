//! Network Simplex with Dantzig's pivot rule over an explicit spanning-tree basis.
//!
//! Every arc is either a tree arc, or sits at its lower bound (flow 0) or at its
//! upper bound (flow = capacity). Node potentials make every tree arc tight; the
//! entering arc is the non-tree residual direction with the most negative
//! reduced cost, and the leaving arc is the first blocking arc met when walking
//! the fundamental cycle from the entering arc in the push direction.

use std::collections::{BTreeSet, VecDeque};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::exactnum::{Capacity, Rational};
use crate::flownet::{
    flow_cost, residual_capacity, validate_network, ArcId, ArcStep, Direction, Flow, Network,
    NetworkError, NodeId,
};

pub const DEFAULT_MAX_PIVOTS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NsError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("not a spanning tree: {0}")]
    NotATree(String),
    #[error("initial basis/flow is not a basic feasible solution: {0}")]
    InfeasibleStart(String),
    #[error("pivot {0} is degenerate (theta = 0)")]
    DegeneratePivot(u64),
    #[error("pivot {0} found a cycle of unbounded capacity")]
    UnboundedCycle(u64),
    #[error("more than {0} pivots needed")]
    PivotBudgetExceeded(u64),
}

/// Spanning-tree basis: tree arcs plus the bound every other arc sits at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeBasis {
    pub root: NodeId,
    #[serde(rename = "treeArcs")]
    pub tree_arcs: BTreeSet<ArcId>,
    #[serde(rename = "atLower")]
    pub at_lower: BTreeSet<ArcId>,
    #[serde(rename = "atUpper")]
    pub at_upper: BTreeSet<ArcId>,
}

impl TreeBasis {
    /// Tree arcs as given; every other arc is put at its lower bound.
    pub fn with_tree(net: &Network, root: NodeId, tree: impl IntoIterator<Item = ArcId>) -> Self {
        let tree_arcs: BTreeSet<ArcId> = tree.into_iter().collect();
        let at_lower = net
            .arcs()
            .iter()
            .map(|a| a.id)
            .filter(|a| !tree_arcs.contains(a))
            .collect();
        TreeBasis {
            root,
            tree_arcs,
            at_lower,
            at_upper: BTreeSet::new(),
        }
    }

    pub fn state(&self, a: ArcId) -> Option<ArcState> {
        if self.tree_arcs.contains(&a) {
            Some(ArcState::Tree)
        } else if self.at_lower.contains(&a) {
            Some(ArcState::Lower)
        } else if self.at_upper.contains(&a) {
            Some(ArcState::Upper)
        } else {
            None
        }
    }

    /// Short hex digest of the partition; equal bases give equal digests.
    pub fn summary_hash(&self) -> String {
        let mut h = Sha256::new();
        for (tag, set) in [("T", &self.tree_arcs), ("U", &self.at_upper)] {
            h.update(tag.as_bytes());
            for a in set {
                h.update(a.0.to_le_bytes());
            }
        }
        hex::encode(h.finalize())[..16].to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcState {
    Tree,
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodePotentials(pub Vec<Rational>);

impl NodePotentials {
    pub fn get(&self, v: NodeId) -> &Rational {
        &self.0[v.0]
    }

    /// `c(a) - pi(head) + pi(tail)`.
    pub fn reduced_cost(&self, net: &Network, a: ArcId) -> Rational {
        let arc = net.arc(a);
        &(&arc.cost - &self.0[arc.head.0]) + &self.0[arc.tail.0]
    }
}

struct Tree {
    // tree arc to the parent, None for the root
    parent: Vec<Option<ArcId>>,
    depth: Vec<usize>,
    // BFS order from the root
    order: Vec<NodeId>,
}

impl Tree {
    fn parent_node(&self, net: &Network, v: NodeId) -> Option<NodeId> {
        self.parent[v.0].map(|a| {
            let arc = net.arc(a);
            if arc.tail == v {
                arc.head
            } else {
                arc.tail
            }
        })
    }
}

fn build_tree(net: &Network, basis: &TreeBasis) -> Result<Tree, NsError> {
    let n = net.node_count();
    if basis.root.0 >= n {
        return Err(NsError::NotATree(format!("root {} is not a node", basis.root)));
    }
    if basis.tree_arcs.len() + 1 != n {
        return Err(NsError::NotATree(format!(
            "{} tree arcs for {} nodes",
            basis.tree_arcs.len(),
            n
        )));
    }
    let mut adj: Vec<Vec<(ArcId, NodeId)>> = vec![Vec::new(); n];
    for &a in &basis.tree_arcs {
        if a.0 >= net.arc_count() {
            return Err(NsError::NotATree(format!("unknown arc {a}")));
        }
        let arc = net.arc(a);
        adj[arc.tail.0].push((a, arc.head));
        adj[arc.head.0].push((a, arc.tail));
    }
    let mut parent = vec![None; n];
    let mut depth = vec![0; n];
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::from([basis.root]);
    seen[basis.root.0] = true;
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &(a, v) in &adj[u.0] {
            if Some(a) == parent[u.0] {
                continue;
            }
            if seen[v.0] {
                return Err(NsError::NotATree(format!("arc {a} closes a cycle")));
            }
            seen[v.0] = true;
            parent[v.0] = Some(a);
            depth[v.0] = depth[u.0] + 1;
            queue.push_back(v);
        }
    }
    if order.len() != n {
        return Err(NsError::NotATree("tree arcs do not span every node".into()));
    }
    Ok(Tree {
        parent,
        depth,
        order,
    })
}

fn potentials_from_tree(net: &Network, tree: &Tree) -> NodePotentials {
    let mut pi = vec![Rational::zero(); net.node_count()];
    for &v in &tree.order {
        if let Some(a) = tree.parent[v.0] {
            let arc = net.arc(a);
            pi[v.0] = if arc.head == v {
                &pi[arc.tail.0] + &arc.cost
            } else {
                &pi[arc.head.0] - &arc.cost
            };
        }
    }
    NodePotentials(pi)
}

/// Potentials with `pi(root) = 0` that make every tree arc tight.
pub fn compute_potentials(net: &Network, basis: &TreeBasis) -> Result<NodePotentials, NsError> {
    let tree = build_tree(net, basis)?;
    Ok(potentials_from_tree(net, &tree))
}

/// Checks that `basis` is a spanning tree partitioning the arcs, with every
/// non-tree arc at the bound it claims under `flow`, and that `flow` is feasible.
pub fn validate_basis(net: &Network, basis: &TreeBasis, flow: &Flow) -> Result<(), NsError> {
    build_tree(net, basis)?;
    flow.check_feasible(net, &Rational::zero())
        .map_err(|e| NsError::InfeasibleStart(e.to_string()))?;
    let total = basis.tree_arcs.len() + basis.at_lower.len() + basis.at_upper.len();
    if total != net.arc_count() {
        return Err(NsError::InfeasibleStart(
            "tree/lower/upper sets do not partition the arcs".into(),
        ));
    }
    for a in net.arcs() {
        let f = flow.get(a.id);
        match basis.state(a.id) {
            None => {
                return Err(NsError::InfeasibleStart(format!("arc {} has no state", a.id)));
            }
            Some(ArcState::Tree) => {}
            Some(ArcState::Lower) => {
                if !f.is_zero() {
                    return Err(NsError::InfeasibleStart(format!(
                        "arc {} at lower bound carries {f}",
                        a.id
                    )));
                }
            }
            Some(ArcState::Upper) => match &a.capacity {
                Capacity::Finite(c) if c == f => {}
                _ => {
                    return Err(NsError::InfeasibleStart(format!(
                        "arc {} at upper bound is not saturated",
                        a.id
                    )));
                }
            },
        }
    }
    Ok(())
}

/// Candidate chosen by Dantzig's rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entering {
    pub step: ArcStep,
    pub reduced_cost: Rational,
    /// another candidate had the same reduced cost
    pub tie: bool,
}

/// Most negative reduced cost among non-tree residual directions; ties go to
/// the smaller ArcId. `None` means the basis is optimal.
pub fn dantzig_entering(
    net: &Network,
    flow: &Flow,
    basis: &TreeBasis,
    potentials: &NodePotentials,
) -> Option<Entering> {
    let mut best: Option<Entering> = None;
    for a in net.arcs() {
        let dir = match basis.state(a.id) {
            Some(ArcState::Lower) => Direction::Forward,
            Some(ArcState::Upper) => Direction::Backward,
            _ => continue,
        };
        if !residual_capacity(a, flow.get(a.id), dir).is_positive() {
            continue;
        }
        let rc = potentials.reduced_cost(net, a.id);
        let rc = match dir {
            Direction::Forward => rc,
            Direction::Backward => -rc,
        };
        if !rc.is_negative() {
            continue;
        }
        match &mut best {
            Some(b) if b.reduced_cost < rc => {}
            Some(b) if b.reduced_cost == rc => b.tie = true,
            _ => {
                best = Some(Entering {
                    step: ArcStep::new(a.id, dir),
                    reduced_cost: rc,
                    tie: false,
                })
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leaving {
    pub arc: ArcId,
    pub bound: Bound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PivotRecord {
    /// 0-based
    pub index: u64,
    pub entering: ArcStep,
    #[serde(rename = "reducedCost")]
    pub reduced_cost: Rational,
    #[serde(rename = "cycleArcs")]
    pub cycle_arcs: Vec<ArcStep>,
    pub theta: Rational,
    pub leaving: Leaving,
    #[serde(rename = "basisAfter")]
    pub basis_after: String,
    #[serde(rename = "watchedInBasis")]
    pub watched_in_basis: bool,
    #[serde(rename = "watchedEntered")]
    pub watched_entered: bool,
    #[serde(rename = "enteringTie")]
    pub entering_tie: bool,
    #[serde(rename = "leavingTie")]
    pub leaving_tie: bool,
    pub objective: Rational,
}

impl PivotRecord {
    /// Cost change along the cycle restricted to `arcs`, per unit pushed, times theta.
    pub fn cost_on(&self, net: &Network, arcs: &BTreeSet<ArcId>) -> Rational {
        let per_unit: Rational = self
            .cycle_arcs
            .iter()
            .filter(|s| arcs.contains(&s.arc))
            .map(|s| match s.dir {
                Direction::Forward => net.arc(s.arc).cost.clone(),
                Direction::Backward => -&net.arc(s.arc).cost,
            })
            .sum();
        &per_unit * &self.theta
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NsTrace {
    pub pivots: Vec<PivotRecord>,
    #[serde(rename = "finalFlow")]
    pub final_flow: Flow,
    #[serde(rename = "finalBasis")]
    pub final_basis: TreeBasis,
    pub objective: Rational,
}

impl NsTrace {
    /// Index of the first pivot in which a watched arc entered the basis.
    pub fn first_watched_entry(&self) -> Option<u64> {
        self.pivots.iter().find(|p| p.watched_entered).map(|p| p.index)
    }

    pub fn from_json(text: &str) -> Result<NsTrace, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        self.write_json(&mut out).expect("writing to a vec");
        String::from_utf8(out).expect("json is utf-8")
    }

    pub fn write_json<W: Write>(&self, w: W) -> io::Result<()> {
        let mut tw = NsTraceWriter::new(w)?;
        for p in &self.pivots {
            tw.write(p)?;
        }
        tw.finish(&self.final_flow, &self.final_basis, &self.objective)
    }
}

/// Streams pivot records one per line.
pub struct NsTraceWriter<W: Write> {
    out: W,
    first: bool,
}

impl<W: Write> NsTraceWriter<W> {
    pub fn new(mut out: W) -> io::Result<Self> {
        out.write_all(b"{\"pivots\":[")?;
        Ok(NsTraceWriter { out, first: true })
    }

    pub fn write(&mut self, p: &PivotRecord) -> io::Result<()> {
        self.out.write_all(if self.first { b"\n" } else { b",\n" })?;
        self.first = false;
        serde_json::to_writer(&mut self.out, p)?;
        Ok(())
    }

    pub fn finish(mut self, flow: &Flow, basis: &TreeBasis, objective: &Rational) -> io::Result<()> {
        self.out.write_all(b"\n],\"finalFlow\":")?;
        serde_json::to_writer(&mut self.out, flow)?;
        self.out.write_all(b",\"finalBasis\":")?;
        serde_json::to_writer(&mut self.out, basis)?;
        writeln!(self.out, ",\"objective\":\"{objective}\"}}")?;
        self.out.flush()
    }
}

#[derive(Debug, Clone)]
pub struct NsOptions {
    pub watched: Vec<ArcId>,
    pub max_pivots: u64,
    /// re-verify flow, basis and potentials after every pivot
    pub check_invariants: bool,
    /// accept pivots with theta = 0 instead of failing
    pub allow_degenerate: bool,
}

impl Default for NsOptions {
    fn default() -> Self {
        NsOptions {
            watched: Vec::new(),
            max_pivots: DEFAULT_MAX_PIVOTS,
            check_invariants: cfg!(debug_assertions),
            allow_degenerate: false,
        }
    }
}

/// Step-by-step Network Simplex state.
pub struct NsRunner<'a> {
    net: &'a Network,
    opts: NsOptions,
    flow: Flow,
    basis: TreeBasis,
    tree: Tree,
    potentials: NodePotentials,
    objective: Rational,
    pivots: u64,
}

impl<'a> NsRunner<'a> {
    pub fn new(
        net: &'a Network,
        basis: TreeBasis,
        flow: Flow,
        opts: NsOptions,
    ) -> Result<Self, NsError> {
        validate_network(net)?;
        validate_basis(net, &basis, &flow)?;
        let tree = build_tree(net, &basis)?;
        let potentials = potentials_from_tree(net, &tree);
        let objective = flow_cost(net, &flow);
        Ok(NsRunner {
            net,
            opts,
            flow,
            basis,
            tree,
            potentials,
            objective,
            pivots: 0,
        })
    }

    pub fn flow(&self) -> &Flow {
        &self.flow
    }

    pub fn basis(&self) -> &TreeBasis {
        &self.basis
    }

    pub fn potentials(&self) -> &NodePotentials {
        &self.potentials
    }

    pub fn objective(&self) -> &Rational {
        &self.objective
    }

    pub fn pivots_done(&self) -> u64 {
        self.pivots
    }

    /// Runs one pivot, or returns `None` once the basis is optimal.
    pub fn step(&mut self) -> Result<Option<PivotRecord>, NsError> {
        let Some(entering) = dantzig_entering(self.net, &self.flow, &self.basis, &self.potentials)
        else {
            return Ok(None);
        };
        if self.pivots >= self.opts.max_pivots {
            return Err(NsError::PivotBudgetExceeded(self.opts.max_pivots));
        }
        let rec = self.pivot(entering)?;
        Ok(Some(rec))
    }

    fn cycle(&self, entering: ArcStep) -> Vec<ArcStep> {
        let net = self.net;
        let (from, to) = net.arc(entering.arc).endpoints(entering.dir);
        // walk up from `to` and from `from` until the paths meet
        let mut up = Vec::new();
        let mut down = Vec::new();
        let (mut x, mut y) = (to, from);
        while x != y {
            if self.tree.depth[x.0] >= self.tree.depth[y.0] {
                let a = self.tree.parent[x.0].expect("non-root has a parent");
                let dir = if net.arc(a).tail == x {
                    Direction::Forward
                } else {
                    Direction::Backward
                };
                up.push(ArcStep::new(a, dir));
                x = self.tree.parent_node(net, x).expect("non-root");
            } else {
                let a = self.tree.parent[y.0].expect("non-root has a parent");
                // traversed parent -> y
                let dir = if net.arc(a).head == y {
                    Direction::Forward
                } else {
                    Direction::Backward
                };
                down.push(ArcStep::new(a, dir));
                y = self.tree.parent_node(net, y).expect("non-root");
            }
        }
        let mut cycle = Vec::with_capacity(1 + up.len() + down.len());
        cycle.push(entering);
        cycle.extend(up);
        cycle.extend(down.into_iter().rev());
        cycle
    }

    fn pivot(&mut self, entering: Entering) -> Result<PivotRecord, NsError> {
        let net = self.net;
        let index = self.pivots;
        let cycle = self.cycle(entering.step);

        let mut theta = Capacity::Unbounded;
        let mut blocking: Option<usize> = None;
        let mut leaving_tie = false;
        for (i, s) in cycle.iter().enumerate() {
            let res = residual_capacity(net.arc(s.arc), self.flow.get(s.arc), s.dir);
            if res < theta {
                theta = res;
                blocking = Some(i);
                leaving_tie = false;
            } else if blocking.is_some() && res == theta {
                leaving_tie = true;
            }
        }
        let (Capacity::Finite(theta), Some(bi)) = (theta, blocking) else {
            return Err(NsError::UnboundedCycle(index));
        };
        if theta.is_zero() && !self.opts.allow_degenerate {
            return Err(NsError::DegeneratePivot(index));
        }

        for s in &cycle {
            self.flow.push(s.arc, s.dir, &theta);
        }
        self.objective += &(&entering.reduced_cost * &theta);

        let leave = cycle[bi];
        let bound = match leave.dir {
            Direction::Forward => Bound::Upper,
            Direction::Backward => Bound::Lower,
        };
        let ent = entering.step.arc;
        self.basis.at_lower.remove(&ent);
        self.basis.at_upper.remove(&ent);
        if leave.arc == ent {
            match bound {
                Bound::Upper => self.basis.at_upper.insert(ent),
                Bound::Lower => self.basis.at_lower.insert(ent),
            };
        } else {
            self.shift_cut_subtree(leave.arc, ent);
            self.basis.tree_arcs.remove(&leave.arc);
            self.basis.tree_arcs.insert(ent);
            match bound {
                Bound::Upper => self.basis.at_upper.insert(leave.arc),
                Bound::Lower => self.basis.at_lower.insert(leave.arc),
            };
            self.tree = build_tree(net, &self.basis)?;
        }
        self.pivots = index + 1;

        if self.opts.check_invariants {
            self.check_invariants(index);
        }

        let watched_in_basis = self
            .opts
            .watched
            .iter()
            .any(|a| self.basis.tree_arcs.contains(a));
        Ok(PivotRecord {
            index,
            entering: entering.step,
            reduced_cost: entering.reduced_cost,
            cycle_arcs: cycle,
            theta,
            leaving: Leaving {
                arc: leave.arc,
                bound,
            },
            basis_after: self.basis.summary_hash(),
            watched_in_basis,
            watched_entered: self.opts.watched.contains(&ent),
            entering_tie: entering.tie,
            leaving_tie,
            objective: self.objective.clone(),
        })
    }

    // Removing `leaving` cuts off the subtree below it; shift that side's
    // potentials so that `entering` becomes tight.
    fn shift_cut_subtree(&mut self, leaving: ArcId, entering: ArcId) {
        let net = self.net;
        let la = net.arc(leaving);
        let child = if self.tree.parent[la.tail.0] == Some(leaving) {
            la.tail
        } else {
            la.head
        };
        let mut in_sub = vec![false; net.node_count()];
        in_sub[child.0] = true;
        for &v in &self.tree.order {
            if let Some(p) = self.tree.parent_node(net, v) {
                if in_sub[p.0] {
                    in_sub[v.0] = true;
                }
            }
        }
        let ea = net.arc(entering);
        let rc = self.potentials.reduced_cost(net, entering);
        let delta = if in_sub[ea.head.0] { rc } else { -rc };
        for (v, inside) in in_sub.iter().enumerate() {
            if *inside {
                self.potentials.0[v] += &delta;
            }
        }
    }

    fn check_invariants(&self, index: u64) {
        let net = self.net;
        if let Err(e) = validate_basis(net, &self.basis, &self.flow) {
            panic!("pivot {index} broke the basis: {e}");
        }
        let fresh = potentials_from_tree(net, &self.tree);
        assert_eq!(fresh, self.potentials, "pivot {index}: potentials drifted");
        assert_eq!(
            flow_cost(net, &self.flow),
            self.objective,
            "pivot {index}: objective drifted"
        );
    }

    pub fn into_parts(self) -> (Flow, TreeBasis, Rational) {
        (self.flow, self.basis, self.objective)
    }
}

/// Pivots to optimality and returns the full trace.
pub fn ns_run(
    net: &Network,
    basis: TreeBasis,
    flow: Flow,
    opts: NsOptions,
) -> Result<NsTrace, NsError> {
    let mut runner = NsRunner::new(net, basis, flow, opts)?;
    let mut pivots = Vec::new();
    while let Some(p) = runner.step()? {
        pivots.push(p);
    }
    let (final_flow, final_basis, objective) = runner.into_parts();
    Ok(NsTrace {
        pivots,
        final_flow,
        final_basis,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flownet::NetworkBuilder;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn potentials_examples() {
        let mut b = NetworkBuilder::new();
        let r = b.add_node(None, Rational::zero());
        let v = b.add_node(None, Rational::zero());
        b.add_arc(r, v, q("5"), Capacity::Unbounded, None);
        let net = b.build();
        let pi = compute_potentials(&net, &TreeBasis::with_tree(&net, r, [ArcId(0)])).unwrap();
        assert_eq!(pi.0, vec![q("0"), q("5")]);

        let mut b = NetworkBuilder::new();
        let r = b.add_node(None, Rational::zero());
        let u = b.add_node(None, Rational::zero());
        let v = b.add_node(None, Rational::zero());
        b.add_arc(r, u, q("1/3"), Capacity::Unbounded, None);
        b.add_arc(u, v, q("1/3"), Capacity::Unbounded, None);
        let net = b.build();
        let pi = compute_potentials(&net, &TreeBasis::with_tree(&net, r, [ArcId(0), ArcId(1)]))
            .unwrap();
        assert_eq!(pi.0, vec![q("0"), q("1/3"), q("2/3")]);

        let mut b = NetworkBuilder::new();
        let r = b.add_node(None, Rational::zero());
        let v = b.add_node(None, Rational::zero());
        b.add_arc(v, r, q("2"), Capacity::Unbounded, None);
        let net = b.build();
        let pi = compute_potentials(&net, &TreeBasis::with_tree(&net, r, [ArcId(0)])).unwrap();
        assert_eq!(pi.0, vec![q("0"), q("-2")]);
    }

    #[test]
    fn non_trees_are_rejected() {
        let mut b = NetworkBuilder::new();
        let x = b.add_node(None, Rational::zero());
        let y = b.add_node(None, Rational::zero());
        let z = b.add_node(None, Rational::zero());
        b.add_arc(x, y, q("1"), Capacity::Unbounded, None);
        b.add_arc(y, x, q("1"), Capacity::Unbounded, None);
        b.add_arc(y, z, q("1"), Capacity::Unbounded, None);
        let net = b.build();
        let cyc = TreeBasis::with_tree(&net, x, [ArcId(0), ArcId(1)]);
        assert!(matches!(compute_potentials(&net, &cyc), Err(NsError::NotATree(_))));
        let short = TreeBasis::with_tree(&net, x, [ArcId(0)]);
        assert!(matches!(compute_potentials(&net, &short), Err(NsError::NotATree(_))));
    }

    // star around a root: every arc r -> leaf with the given cost, plus
    // candidate arcs between leaves
    fn candidates(costs: &[(usize, &str)]) -> (Network, TreeBasis) {
        let mut b = NetworkBuilder::new();
        let r = b.add_node(None, Rational::zero());
        let leaves: Vec<NodeId> = (0..8).map(|_| b.add_node(None, Rational::zero())).collect();
        for &l in &leaves {
            b.add_arc(r, l, q("0"), Capacity::Unbounded, None);
        }
        let mut tree = Vec::new();
        for i in 0..8 {
            tree.push(ArcId(i));
        }
        // pad so that candidate ArcIds can be chosen explicitly
        let mut next = 8;
        for &(id, c) in costs {
            while next < id {
                b.add_arc(leaves[0], leaves[1], q("5"), Capacity::Unbounded, None);
                next += 1;
            }
            b.add_arc(leaves[2], leaves[3], q(c), Capacity::Unbounded, None);
            next += 1;
        }
        let net = b.build();
        let basis = TreeBasis::with_tree(&net, r, tree);
        (net, basis)
    }

    #[test]
    fn dantzig_examples() {
        let pick = |costs: &[(usize, &str)]| {
            let (net, basis) = candidates(costs);
            let flow = Flow::zero(&net);
            let pi = compute_potentials(&net, &basis).unwrap();
            dantzig_entering(&net, &flow, &basis, &pi)
        };
        let e = pick(&[(8, "-1/3"), (9, "-2/3")]).unwrap();
        assert_eq!((e.step, e.reduced_cost), (ArcStep::forward(ArcId(9)), q("-2/3")));
        assert!(pick(&[(8, "0"), (9, "1")]).is_none());
        let e = pick(&[(11, "-1/2"), (14, "-1/2")]).unwrap();
        assert_eq!(e.step.arc, ArcId(11));
        assert!(e.tie);
    }

    #[test]
    fn bottleneck_arc_leaves() {
        // entering arc has spare capacity 3, the cycle uses a capacity-1 arc backward
        let mut b = NetworkBuilder::new();
        let x = b.add_node(None, q("1"));
        let y = b.add_node(None, q("-1"));
        let cheap = b.add_arc(x, y, q("0"), Capacity::finite(q("3")), None);
        let dear = b.add_arc(x, y, q("1"), Capacity::finite(q("1")), None);
        let net = b.build();
        let mut flow = Flow::zero(&net);
        flow.set(dear, q("1"));
        let basis = TreeBasis::with_tree(&net, x, [dear]);
        let trace = ns_run(&net, basis, flow, NsOptions::default()).unwrap();
        assert_eq!(trace.pivots.len(), 1);
        let p = &trace.pivots[0];
        assert_eq!(p.entering, ArcStep::forward(cheap));
        assert_eq!(p.theta, q("1"));
        assert_eq!(p.leaving, Leaving { arc: dear, bound: Bound::Lower });
        assert_eq!(trace.objective, q("0"));
    }

    #[test]
    fn optimal_start_takes_no_pivots() {
        let mut b = NetworkBuilder::new();
        let x = b.add_node(None, q("2"));
        let y = b.add_node(None, q("-2"));
        let a = b.add_arc(x, y, q("1"), Capacity::Unbounded, None);
        b.add_arc(x, y, q("3"), Capacity::Unbounded, None);
        let net = b.build();
        let mut flow = Flow::zero(&net);
        flow.set(a, q("2"));
        let trace = ns_run(&net, TreeBasis::with_tree(&net, x, [a]), flow, NsOptions::default())
            .unwrap();
        assert!(trace.pivots.is_empty());
        assert_eq!(trace.objective, q("2"));
    }

    #[test]
    fn entering_arc_can_flip_bounds() {
        // the entering arc is its own bottleneck
        let mut b = NetworkBuilder::new();
        let x = b.add_node(None, q("2"));
        let y = b.add_node(None, q("-2"));
        let a = b.add_arc(x, y, q("3"), Capacity::Unbounded, None);
        let c = b.add_arc(x, y, q("1"), Capacity::finite(q("1")), None);
        let net = b.build();
        let mut flow = Flow::zero(&net);
        flow.set(a, q("2"));
        let trace = ns_run(&net, TreeBasis::with_tree(&net, x, [a]), flow, NsOptions::default())
            .unwrap();
        assert_eq!(trace.pivots.len(), 1);
        let p = &trace.pivots[0];
        assert_eq!(p.leaving, Leaving { arc: c, bound: Bound::Upper });
        assert!(trace.final_basis.at_upper.contains(&c));
        assert_eq!(trace.objective, q("4"));
    }

    #[test]
    fn degenerate_pivot_is_reported() {
        let mut b = NetworkBuilder::new();
        let x = b.add_node(None, Rational::zero());
        let y = b.add_node(None, Rational::zero());
        let t = b.add_arc(x, y, q("0"), Capacity::finite(q("0")), None);
        b.add_arc(y, x, q("-1"), Capacity::finite(q("1")), None);
        let net = b.build();
        let basis = TreeBasis::with_tree(&net, x, [t]);
        let err = ns_run(&net, basis.clone(), Flow::zero(&net), NsOptions::default()).unwrap_err();
        assert_eq!(err, NsError::DegeneratePivot(0));
        let opts = NsOptions {
            allow_degenerate: true,
            ..NsOptions::default()
        };
        let trace = ns_run(&net, basis, Flow::zero(&net), opts).unwrap();
        assert_eq!(trace.pivots[0].theta, q("0"));
    }

    #[test]
    fn unbounded_cycle_is_reported() {
        let mut b = NetworkBuilder::new();
        let x = b.add_node(None, Rational::zero());
        let y = b.add_node(None, Rational::zero());
        let t = b.add_arc(x, y, q("0"), Capacity::Unbounded, None);
        b.add_arc(y, x, q("-1"), Capacity::Unbounded, None);
        let net = b.build();
        let err = ns_run(&net, TreeBasis::with_tree(&net, x, [t]), Flow::zero(&net), NsOptions::default())
            .unwrap_err();
        assert_eq!(err, NsError::UnboundedCycle(0));
    }

    #[test]
    fn bad_start_is_rejected() {
        let mut b = NetworkBuilder::new();
        let x = b.add_node(None, q("1"));
        let y = b.add_node(None, q("-1"));
        let a = b.add_arc(x, y, q("0"), Capacity::Unbounded, None);
        let c = b.add_arc(x, y, q("0"), Capacity::Unbounded, None);
        let net = b.build();
        let mut flow = Flow::zero(&net);
        flow.set(c, q("1"));
        let err = ns_run(&net, TreeBasis::with_tree(&net, x, [a]), flow, NsOptions::default())
            .unwrap_err();
        assert!(matches!(err, NsError::InfeasibleStart(_)));
    }

    #[test]
    fn trace_json_round_trip() {
        let mut b = NetworkBuilder::new();
        let x = b.add_node(None, q("1"));
        let y = b.add_node(None, q("-1"));
        b.add_arc(x, y, q("0"), Capacity::finite(q("3")), None);
        let dear = b.add_arc(x, y, q("1"), Capacity::finite(q("1")), None);
        let net = b.build();
        let mut flow = Flow::zero(&net);
        flow.set(dear, q("1"));
        let opts = NsOptions {
            watched: vec![dear],
            ..NsOptions::default()
        };
        let trace = ns_run(&net, TreeBasis::with_tree(&net, x, [dear]), flow, opts).unwrap();
        let text = trace.to_json();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(NsTrace::from_json(&text).unwrap(), trace);
    }
}

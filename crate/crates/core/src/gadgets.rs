//! Network families used to make the two algorithms count: the SSP counting
//! gadget `N_i`, its doubled network `G_ssp`, the simplex counting gadget `S_i`,
//! a single-gadget harness for it, and the doubled network `G_ns`.
//!
//! Instances are normalized so that the entries sum to 1/13 and are integer
//! multiples of a common granularity epsilon.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{Capacity, Rational};
use crate::flownet::{validate_network, ArcId, Flow, Network, NetworkBuilder, NetworkError, NodeId};
use crate::netsimplex::{validate_basis, NsError, TreeBasis};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GadgetError {
    #[error("instance is empty")]
    EmptyInstance,
    #[error("instance entries must be positive, found {0}")]
    NonPositiveEntry(Rational),
    #[error("level {level} out of range 0..={n}")]
    LevelOutOfRange { level: usize, n: usize },
    #[error("r = {0} must lie in (2A, 1-2A) and differ from 1/2")]
    InvalidR(Rational),
    #[error("expected a {expected:?} network, found {found:?}")]
    WrongFamily { expected: Family, found: Family },
    #[error("need 0 <= i1 <= i2 <= {len}, got i1 = {i1}, i2 = {i2}")]
    IndexOrder { i1: usize, i2: usize, len: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Basis(#[from] NsError),
    #[error("sidecar: {0}")]
    Sidecar(String),
}

/// `floor(k / 2^j) mod 2`.
pub fn bit_of(k: u64, j: u32) -> u64 {
    if j >= 64 {
        0
    } else {
        (k >> j) & 1
    }
}

/// `sum_{j=i1+1}^{i2} (-1)^{bit_of(k, j-1)} v_j` with `v` indexed from 1.
pub fn signed_sum(v: &[Rational], i1: usize, i2: usize, k: u64) -> Result<Rational, GadgetError> {
    if i1 > i2 || i2 > v.len() {
        return Err(GadgetError::IndexOrder {
            i1,
            i2,
            len: v.len(),
        });
    }
    let mut acc = Rational::zero();
    for j in i1 + 1..=i2 {
        if bit_of(k, (j - 1) as u32) == 1 {
            acc -= &v[j - 1];
        } else {
            acc += &v[j - 1];
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionInstance {
    pub raw: Vec<Rational>,
    pub normalized: Vec<Rational>,
    pub epsilon: Rational,
    pub total: Rational,
}

impl PartitionInstance {
    pub fn len(&self) -> usize {
        self.normalized.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normalized.is_empty()
    }

    /// Normalized entries as integer multiples of epsilon.
    pub fn units(&self) -> Vec<BigInt> {
        self.normalized
            .iter()
            .map(|a| {
                (a / &self.epsilon)
                    .to_integer()
                    .expect("entries are multiples of epsilon")
            })
            .collect()
    }

    /// `sign * normalized`.
    pub fn signed(&self, sign: i8) -> Vec<Rational> {
        self.normalized
            .iter()
            .map(|a| if sign < 0 { -a } else { a.clone() })
            .collect()
    }
}

/// Scales `raw` to integers, then divides by 13 times their sum.
pub fn normalize_instance(raw: &[Rational]) -> Result<PartitionInstance, GadgetError> {
    if raw.is_empty() {
        return Err(GadgetError::EmptyInstance);
    }
    if let Some(bad) = raw.iter().find(|a| !a.is_positive()) {
        return Err(GadgetError::NonPositiveEntry(bad.clone()));
    }
    let lcm = raw.iter().fold(BigInt::one(), |l, a| l.lcm(&a.denom()));
    let ints: Vec<BigInt> = raw.iter().map(|a| a.numer() * (&lcm / a.denom())).collect();
    let sum: BigInt = ints.iter().sum();
    let gcd = ints.iter().fold(BigInt::zero(), |g, p| g.gcd(p));
    let scale = BigInt::from(13) * sum;
    let q = |num: BigInt| Rational::from_bigints(num, scale.clone()).expect("positive scale");
    let normalized: Vec<Rational> = ints.into_iter().map(q).collect();
    let total = normalized.iter().sum();
    Ok(PartitionInstance {
        raw: raw.to_vec(),
        normalized,
        epsilon: q(gcd),
        total,
    })
}

/// `x_i = 3 * 2^(i-1) - 1` for `i >= 1`, and 0 for `i = 0`.
pub fn x_param(i: usize) -> Rational {
    if i == 0 {
        return Rational::zero();
    }
    &(&Rational::from_integer(3) * &Rational::pow2(i as u32 - 1)) - &Rational::one()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    N,
    Gssp,
    S,
    Gns,
    Harness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetMeta {
    pub family: Family,
    /// recursion depth of the counting gadget(s)
    pub n: usize,
    pub sign: i8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Rational>,
    #[serde(default)]
    pub perturbed: bool,
}

/// Arcs of one counting gadget inside a generated network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetPart {
    pub sign: i8,
    /// `levels[0]` holds the base arc(s); `levels[i]` the four arcs
    /// `(s_i,s_{i-1}), (t_{i-1},t_i), (s_i,t_{i-1}), (s_{i-1},t_i)`.
    pub levels: Vec<Vec<ArcId>>,
    /// arcs joining the gadget to the rest of the network
    #[serde(default)]
    pub connectors: Vec<ArcId>,
}

impl GadgetPart {
    pub fn arcs(&self) -> BTreeSet<ArcId> {
        self.levels.iter().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetNetwork {
    pub net: Network,
    pub roles: BTreeMap<String, NodeId>,
    pub watched: Vec<ArcId>,
    pub initial_flow: Flow,
    /// arcs drawn bold: the (possibly partial) initial basis
    pub basis_arcs: BTreeSet<ArcId>,
    pub initial_basis: Option<TreeBasis>,
    pub meta: GadgetMeta,
    pub parts: Vec<GadgetPart>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    watched: Vec<ArcId>,
    roles: BTreeMap<String, NodeId>,
    #[serde(rename = "initialFlow")]
    initial_flow: BTreeMap<usize, Rational>,
    #[serde(rename = "basisArcs", default)]
    basis_arcs: BTreeSet<ArcId>,
    #[serde(rename = "initialBasis", default, skip_serializing_if = "Option::is_none")]
    initial_basis: Option<TreeBasis>,
    meta: GadgetMeta,
    #[serde(default)]
    parts: Vec<GadgetPart>,
}

impl GadgetNetwork {
    pub fn node(&self, label: &str) -> NodeId {
        self.roles[label]
    }

    /// The unique arc with this label.
    pub fn arc(&self, label: &str) -> Option<ArcId> {
        match self.net.arcs_by_label(label).as_slice() {
            [a] => Some(*a),
            _ => None,
        }
    }

    pub fn sidecar_json(&self) -> String {
        let side = Sidecar {
            watched: self.watched.clone(),
            roles: self.roles.clone(),
            initial_flow: self
                .initial_flow
                .values()
                .iter()
                .enumerate()
                .filter(|(_, f)| !f.is_zero())
                .map(|(i, f)| (i, f.clone()))
                .collect(),
            basis_arcs: self.basis_arcs.clone(),
            initial_basis: self.initial_basis.clone(),
            meta: self.meta.clone(),
            parts: self.parts.clone(),
        };
        serde_json::to_string_pretty(&side).expect("sidecar serializes") + "\n"
    }

    pub fn from_sidecar(net: Network, sidecar: &str) -> Result<GadgetNetwork, GadgetError> {
        let side: Sidecar =
            serde_json::from_str(sidecar).map_err(|e| GadgetError::Sidecar(e.to_string()))?;
        let mut flow = Flow::zero(&net);
        for (a, f) in side.initial_flow {
            if a >= net.arc_count() {
                return Err(GadgetError::Sidecar(format!("unknown arc {a} in initialFlow")));
            }
            flow.set(ArcId(a), f);
        }
        let g = GadgetNetwork {
            net,
            roles: side.roles,
            watched: side.watched,
            initial_flow: flow,
            basis_arcs: side.basis_arcs,
            initial_basis: side.initial_basis,
            meta: side.meta,
            parts: side.parts,
        };
        g.validate()?;
        Ok(g)
    }

    /// Network, flow and (when present) basis are mutually consistent.
    pub fn validate(&self) -> Result<(), GadgetError> {
        validate_network(&self.net)?;
        self.initial_flow.check_feasible(&self.net, &Rational::zero())?;
        if let Some(b) = &self.initial_basis {
            validate_basis(&self.net, b, &self.initial_flow)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// construction helpers

struct Builder {
    b: NetworkBuilder,
    names: Vec<String>,
    flow: Vec<Rational>,
    bold: BTreeSet<ArcId>,
}

struct Counting {
    s: Vec<NodeId>,
    t: Vec<NodeId>,
    levels: Vec<Vec<ArcId>>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            b: NetworkBuilder::new(),
            names: Vec::new(),
            flow: Vec::new(),
            bold: BTreeSet::new(),
        }
    }

    fn node(&mut self, label: String) -> NodeId {
        let v = self.b.add_node(Some(&label), Rational::zero());
        self.names.push(label);
        v
    }

    fn supply(&mut self, v: NodeId, delta: &Rational) {
        let bal = self.b.balance(v) + delta;
        self.b.set_balance(v, bal);
    }

    fn arc(&mut self, tail: NodeId, head: NodeId, cost: Rational, cap: Capacity) -> ArcId {
        let label = format!("{}->{}", self.names[tail.0], self.names[head.0]);
        self.flow.push(Rational::zero());
        self.b.add_arc(tail, head, cost, cap, Some(&label))
    }

    fn set_flow(&mut self, a: ArcId, f: Rational) {
        self.flow[a.0] = f;
    }

    fn finish(self) -> (Network, Flow, BTreeSet<ArcId>) {
        (self.b.build(), Flow::from_values(self.flow), self.bold)
    }
}

fn nodes_for(b: &mut Builder, i: usize, suffix: &str) -> (Vec<NodeId>, Vec<NodeId>) {
    let mut s = Vec::new();
    let mut t = Vec::new();
    for j in 0..=i {
        s.push(b.node(format!("s_{j}{suffix}")));
        t.push(b.node(format!("t_{j}{suffix}")));
    }
    (s, t)
}

fn half(x: &Rational) -> Rational {
    x * &Rational::frac(1, 2)
}

fn add_n_gadget(b: &mut Builder, v: &[Rational], i: usize, suffix: &str, base_cost: Rational) -> Counting {
    let (s, t) = nodes_for(b, i, suffix);
    let mut levels = vec![vec![b.arc(s[0], t[0], base_cost, Capacity::finite(1))]];
    for l in 1..=i {
        let vl = &v[l - 1];
        let cap = Capacity::Finite(Rational::pow2(l as u32 - 1));
        let outer = half(vl);
        let diag = half(&(&(&Rational::pow2(l as u32) - &Rational::one()) - vl));
        levels.push(vec![
            b.arc(s[l], s[l - 1], outer.clone(), cap.clone()),
            b.arc(t[l - 1], t[l], outer, cap.clone()),
            b.arc(s[l], t[l - 1], diag.clone(), cap.clone()),
            b.arc(s[l - 1], t[l], diag, cap),
        ]);
    }
    Counting { s, t, levels }
}

// Splitting the base arc of S_i through a middle node `c`.
struct Split {
    into_c: Rational,
    out_of_c: Rational,
}

#[allow(clippy::too_many_arguments)]
fn add_s_gadget(
    b: &mut Builder,
    v: &[Rational],
    r: &Rational,
    i: usize,
    suffix: &str,
    level_offset: Option<&Rational>,
    split: Option<Split>,
) -> (Counting, Option<NodeId>) {
    let (s, t) = nodes_for(b, i, suffix);
    let one = Rational::one();
    let mut c_node = None;
    let base = match split {
        None => vec![b.arc(s[0], t[0], Rational::zero(), Capacity::finite(1))],
        Some(sp) => {
            let c = b.node(format!("c{suffix}"));
            c_node = Some(c);
            vec![
                b.arc(s[0], c, sp.into_c, Capacity::finite(2)),
                b.arc(c, t[0], sp.out_of_c, Capacity::finite(2)),
            ]
        }
    };
    let mut levels = vec![base];
    for l in 1..=i {
        let vl = &v[l - 1];
        let p = Rational::pow2(l as u32 - 1);
        let cap = Capacity::Finite(&x_param(l) + &one);
        let off = match level_offset {
            Some(unit) => unit * &Rational::from_integer(l as i64),
            None => Rational::zero(),
        };
        let outer = &half(vl) + &off;
        let d1 = &(&(&p - r) - &half(vl)) + &off;
        let d2 = &(&(&p - &(&one - r)) - &half(vl)) + &off;
        let ss = b.arc(s[l], s[l - 1], outer.clone(), cap.clone());
        let tt = b.arc(t[l - 1], t[l], outer, cap.clone());
        let st = b.arc(s[l], t[l - 1], d1, cap.clone());
        let ts = b.arc(s[l - 1], t[l], d2, cap);
        for a in [ss, tt] {
            b.set_flow(a, one.clone());
            b.bold.insert(a);
        }
        levels.push(vec![ss, tt, st, ts]);
    }
    // unit flow on s_i..s_0 and t_0..t_i
    if i > 0 {
        b.supply(s[i], &one);
        b.supply(t[0], &one);
        b.supply(s[0], &-&one);
        b.supply(t[i], &-&one);
    }
    (Counting { s, t, levels }, c_node)
}

fn roles_of(net: &Network) -> BTreeMap<String, NodeId> {
    net.nodes()
        .iter()
        .filter_map(|v| v.label.clone().map(|l| (l, v.id)))
        .collect()
}

fn check_level(inst: &PartitionInstance, i: usize) -> Result<(), GadgetError> {
    if i > inst.len() {
        return Err(GadgetError::LevelOutOfRange {
            level: i,
            n: inst.len(),
        });
    }
    Ok(())
}

fn check_r(inst: &PartitionInstance, r: &Rational) -> Result<(), GadgetError> {
    let two_a = &inst.total * &Rational::from_integer(2);
    let upper = &Rational::one() - &two_a;
    if *r <= two_a || *r >= upper || *r == Rational::frac(1, 2) {
        return Err(GadgetError::InvalidR(r.clone()));
    }
    Ok(())
}

fn sign_of(sign: i8) -> i8 {
    if sign < 0 {
        -1
    } else {
        1
    }
}

// ---------------------------------------------------------------------------
// SSP families

/// `N_i^v` with `v = sign * normalized`; SSP runs from `s_i` to `t_i`.
pub fn build_counting_ssp(inst: &PartitionInstance, sign: i8, i: usize) -> Result<GadgetNetwork, GadgetError> {
    check_level(inst, i)?;
    let sign = sign_of(sign);
    let v = inst.signed(sign);
    let mut b = Builder::new();
    let g = add_n_gadget(&mut b, &v, i, "", Rational::zero());
    b.b.set_terminals(g.s[i], g.t[i]);
    let (net, flow, bold) = b.finish();
    Ok(GadgetNetwork {
        roles: roles_of(&net),
        net,
        watched: Vec::new(),
        initial_flow: flow,
        basis_arcs: bold,
        initial_basis: None,
        meta: GadgetMeta {
            family: Family::N,
            n: i,
            sign,
            r: None,
            perturbed: false,
        },
        parts: vec![GadgetPart {
            sign,
            levels: g.levels,
            connectors: Vec::new(),
        }],
    })
}

fn gssp(inst: &PartitionInstance, minus_base_extra: Option<Rational>) -> GadgetNetwork {
    let n = inst.len();
    let eps5 = &inst.epsilon * &Rational::frac(1, 5);
    let cap = Capacity::Finite(Rational::pow2(n as u32));
    let mut b = Builder::new();
    let s = b.node("s".into());
    let t = b.node("t".into());
    let mut parts = Vec::new();
    let mut gadgets = Vec::new();
    for (sign, suffix) in [(1i8, "+"), (-1, "-")] {
        let base = match (&minus_base_extra, sign) {
            (Some(extra), -1) => &eps5 + extra,
            _ => eps5.clone(),
        };
        let g = add_n_gadget(&mut b, &inst.signed(sign), n, suffix, base);
        let cin = b.arc(s, g.s[n], Rational::zero(), cap.clone());
        let cout = b.arc(g.t[n], t, Rational::zero(), cap.clone());
        parts.push(GadgetPart {
            sign,
            levels: g.levels.clone(),
            connectors: vec![cin, cout],
        });
        gadgets.push(g);
    }
    let e = b.arc(gadgets[0].s[0], gadgets[1].t[0], Rational::zero(), Capacity::finite(1));
    b.b.arc_mut(e).label = Some("e".into());
    b.b.set_terminals(s, t);
    let (net, flow, bold) = b.finish();
    GadgetNetwork {
        roles: roles_of(&net),
        net,
        watched: vec![e],
        initial_flow: flow,
        basis_arcs: bold,
        initial_basis: None,
        meta: GadgetMeta {
            family: Family::Gssp,
            n,
            sign: 1,
            r: None,
            perturbed: minus_base_extra.is_some(),
        },
        parts,
    }
}

/// `G_ssp`: `N_n^a` and `N_n^{-a}` in parallel between `s` and `t`, plus the
/// watched arc `e` from `s_0+` to `t_0-`.
pub fn build_gssp(inst: &PartitionInstance) -> GadgetNetwork {
    gssp(inst, None)
}

/// `G_ssp` with the base arc of `N^{-a}` made ε/25 dearer, so that every
/// successive shortest path has a distinct cost.
pub fn build_gssp_perturbed(inst: &PartitionInstance) -> GadgetNetwork {
    gssp(inst, Some(&inst.epsilon * &Rational::frac(1, 25)))
}

/// Replaces `e` by two parallel arcs of capacity 1/2 and costs ε/25, 2ε/25.
pub fn split_watched_arc(g: &GadgetNetwork, inst: &PartitionInstance) -> Result<GadgetNetwork, GadgetError> {
    if g.meta.family != Family::Gssp {
        return Err(GadgetError::WrongFamily {
            expected: Family::Gssp,
            found: g.meta.family,
        });
    }
    let e = g.watched[0];
    let (tail, head) = {
        let a = g.net.arc(e);
        (a.tail, a.head)
    };
    let unit = &inst.epsilon * &Rational::frac(1, 25);
    let halfcap = Capacity::Finite(Rational::frac(1, 2));
    let mut b = NetworkBuilder::from_network(&g.net);
    {
        let a = b.arc_mut(e);
        a.cost = unit.clone();
        a.capacity = halfcap.clone();
        a.label = Some("e1".into());
    }
    let e2 = b.add_arc(tail, head, &unit * &Rational::from_integer(2), halfcap, Some("e2"));
    let net = b.build();
    let mut flow = g.initial_flow.values().to_vec();
    flow.push(Rational::zero());
    Ok(GadgetNetwork {
        roles: g.roles.clone(),
        initial_flow: Flow::from_values(flow),
        net,
        watched: vec![e, e2],
        basis_arcs: g.basis_arcs.clone(),
        initial_basis: None,
        meta: g.meta.clone(),
        parts: g.parts.clone(),
    })
}

// ---------------------------------------------------------------------------
// simplex families

/// `S_i^{v,r}` with its unit boundary flow; `basis_arcs` holds the bold arcs
/// (the gadget alone does not span, so there is no full basis).
pub fn build_counting_ns(
    inst: &PartitionInstance,
    sign: i8,
    r: &Rational,
    i: usize,
) -> Result<GadgetNetwork, GadgetError> {
    check_level(inst, i)?;
    check_r(inst, r)?;
    let sign = sign_of(sign);
    let mut b = Builder::new();
    let (g, _) = add_s_gadget(&mut b, &inst.signed(sign), r, i, "", None, None);
    let (net, flow, bold) = b.finish();
    Ok(GadgetNetwork {
        roles: roles_of(&net),
        net,
        watched: Vec::new(),
        initial_flow: flow,
        basis_arcs: bold,
        initial_basis: None,
        meta: GadgetMeta {
            family: Family::S,
            n: i,
            sign,
            r: Some(r.clone()),
            perturbed: false,
        },
        parts: vec![GadgetPart {
            sign,
            levels: g.levels,
            connectors: Vec::new(),
        }],
    })
}

/// `S_i^{v,r}` wrapped between `s` and `t` with a backbone arc `(s,t)` whose
/// reverse is a permanently cheap tree path from `t_i` back to `s_i`.
pub fn build_ns_harness(
    inst: &PartitionInstance,
    sign: i8,
    r: &Rational,
    i: usize,
) -> Result<GadgetNetwork, GadgetError> {
    check_level(inst, i)?;
    check_r(inst, r)?;
    let sign = sign_of(sign);
    let one = Rational::one();
    let two_x = &x_param(i) * &Rational::from_integer(2);
    let mut b = Builder::new();
    let (g, _) = add_s_gadget(&mut b, &inst.signed(sign), r, i, "", None, None);
    let s = b.node("s".into());
    let t = b.node("t".into());
    let cin = b.arc(s, g.s[i], Rational::zero(), Capacity::Unbounded);
    let cout = b.arc(g.t[i], t, Rational::zero(), Capacity::Unbounded);
    let backbone_cost = &Rational::pow2(i as u32 + 1) + &one;
    let backbone = b.arc(s, t, backbone_cost, Capacity::Unbounded);
    if i > 0 {
        // the gadget's boundary supplies move out to s and t
        b.supply(g.s[i], &-&one);
        b.supply(g.t[i], &one);
    }
    let total = &two_x + &Rational::from_integer(2);
    b.supply(s, &total);
    b.supply(t, &-&total);
    if i > 0 {
        b.set_flow(cin, one.clone());
        b.set_flow(cout, one.clone());
        b.set_flow(backbone, &two_x + &one);
    } else {
        b.set_flow(backbone, total.clone());
    }
    for a in [cin, cout, backbone] {
        b.bold.insert(a);
    }
    let (net, flow, bold) = b.finish();
    let basis = TreeBasis::with_tree(&net, s, bold.iter().copied());
    let out = GadgetNetwork {
        roles: roles_of(&net),
        net,
        watched: Vec::new(),
        initial_flow: flow,
        basis_arcs: bold,
        initial_basis: Some(basis),
        meta: GadgetMeta {
            family: Family::Harness,
            n: i,
            sign,
            r: Some(r.clone()),
            perturbed: false,
        },
        parts: vec![GadgetPart {
            sign,
            levels: g.levels,
            connectors: vec![cin, cout],
        }],
    };
    out.validate()?;
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct GnsOptions {
    /// add `l * ε/1000` to every level-l arc of `S^{-a}`
    pub perturb: bool,
}

/// `G_ns` for the instance with a zero element prepended.
pub fn build_gns(inst: &PartitionInstance) -> GadgetNetwork {
    build_gns_with(inst, &GnsOptions::default())
}

pub fn build_gns_with(inst: &PartitionInstance, opts: &GnsOptions) -> GadgetNetwork {
    let mut a = vec![Rational::zero()];
    a.extend(inst.normalized.iter().cloned());
    let n = a.len();
    let r = Rational::frac(1, 3);
    let one = Rational::one();
    let eps5 = &inst.epsilon * &Rational::frac(1, 5);
    let xn = x_param(n);
    let four_x = &xn * &Rational::from_integer(4);
    let offset = opts
        .perturb
        .then(|| &inst.epsilon * &Rational::frac(1, 1000));

    let mut b = Builder::new();
    let mut parts = Vec::new();
    let mut counting = Vec::new();
    let mut cs = Vec::new();
    for (sign, suffix) in [(1i8, "+"), (-1, "-")] {
        let v: Vec<Rational> = a.iter().map(|x| if sign < 0 { -x } else { x.clone() }).collect();
        let split = if sign > 0 {
            Split {
                into_c: Rational::zero(),
                out_of_c: eps5.clone(),
            }
        } else {
            Split {
                into_c: eps5.clone(),
                out_of_c: Rational::zero(),
            }
        };
        let lvl_off = if sign < 0 { offset.as_ref() } else { None };
        let (g, c) = add_s_gadget(&mut b, &v, &r, n, suffix, lvl_off, Some(split));
        let c = c.expect("split gadget has a middle node");
        // the base demand/supply moves onto c
        if sign > 0 {
            b.supply(g.s[0], &one);
            b.supply(c, &-&one);
            b.set_flow(g.levels[0][0], one.clone());
            b.bold.insert(g.levels[0][0]);
        } else {
            b.supply(g.t[0], &-&one);
            b.supply(c, &one);
            b.set_flow(g.levels[0][1], one.clone());
            b.bold.insert(g.levels[0][1]);
        }
        counting.push(g);
        cs.push(c);
    }
    let s = b.node("s".into());
    let t = b.node("t".into());
    for (k, sign) in [(0usize, 1i8), (1, -1)] {
        let g = &counting[k];
        let (sn, tn) = (g.s[n], g.t[n]);
        let cin = b.arc(s, sn, Rational::zero(), Capacity::Unbounded);
        let cout = b.arc(tn, t, Rational::zero(), Capacity::Unbounded);
        b.supply(sn, &-&one);
        b.supply(tn, &one);
        b.set_flow(cin, one.clone());
        b.set_flow(cout, one.clone());
        b.bold.insert(cin);
        b.bold.insert(cout);
        parts.push(GadgetPart {
            sign,
            levels: g.levels.clone(),
            connectors: vec![cin, cout],
        });
    }
    let backbone = b.arc(s, t, Rational::pow2(n as u32 + 1), Capacity::Unbounded);
    b.set_flow(backbone, four_x.clone());
    b.bold.insert(backbone);
    let total = &four_x + &Rational::from_integer(2);
    b.supply(s, &total);
    b.supply(t, &-&total);
    let e = b.arc(cs[0], cs[1], Rational::zero(), Capacity::Finite(Rational::frac(1, 2)));
    b.b.arc_mut(e).label = Some("e".into());
    let (net, flow, bold) = b.finish();
    let basis = TreeBasis::with_tree(&net, s, bold.iter().copied());
    GadgetNetwork {
        roles: roles_of(&net),
        net,
        watched: vec![e],
        initial_flow: flow,
        basis_arcs: bold,
        initial_basis: Some(basis),
        meta: GadgetMeta {
            family: Family::Gns,
            n,
            sign: 1,
            r: Some(r),
            perturbed: opts.perturb,
        },
        parts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn inst(xs: &[&str]) -> PartitionInstance {
        normalize_instance(&xs.iter().map(|x| q(x)).collect::<Vec<_>>()).unwrap()
    }

    fn cost(g: &GadgetNetwork, label: &str) -> Rational {
        g.net.arc(g.arc(label).unwrap()).cost.clone()
    }

    fn cap(g: &GadgetNetwork, label: &str) -> Capacity {
        g.net.arc(g.arc(label).unwrap()).capacity.clone()
    }

    #[test]
    fn bits() {
        assert_eq!(bit_of(5, 0), 1);
        assert_eq!(bit_of(5, 1), 0);
        for j in 0..70 {
            assert_eq!(bit_of(0, j), 0);
        }
    }

    #[test]
    fn signed_sum_examples() {
        let v = [q("1"), q("2"), q("4")];
        assert_eq!(signed_sum(&v, 0, 3, 0).unwrap(), q("7"));
        assert_eq!(signed_sum(&v, 0, 3, 5).unwrap(), q("-3"));
        for i in 0..=3 {
            assert_eq!(signed_sum(&v, i, i, 6).unwrap(), q("0"));
        }
        assert!(matches!(signed_sum(&v, 2, 1, 0), Err(GadgetError::IndexOrder { .. })));
        assert!(matches!(signed_sum(&v, 0, 4, 0), Err(GadgetError::IndexOrder { .. })));
    }

    #[test]
    fn normalization_examples() {
        let a = inst(&["1", "2", "3"]);
        assert_eq!(a.normalized, vec![q("1/78"), q("2/78"), q("3/78")]);
        assert_eq!(a.epsilon, q("1/78"));
        assert_eq!(a.total, q("1/13"));
        let a = inst(&["5"]);
        assert_eq!(a.normalized, vec![q("1/13")]);
        assert_eq!(a.epsilon, q("1/13"));
        let a = inst(&["1/2", "1/2"]);
        assert_eq!(a.normalized, vec![q("1/26"), q("1/26")]);
        assert_eq!(a.epsilon, q("1/26"));
        assert_eq!(normalize_instance(&[]), Err(GadgetError::EmptyInstance));
        assert_eq!(
            normalize_instance(&[q("1"), q("0")]),
            Err(GadgetError::NonPositiveEntry(q("0")))
        );
    }

    #[test]
    fn counting_ssp_examples() {
        let a = inst(&["1", "2", "3"]);
        let g0 = build_counting_ssp(&a, 1, 0).unwrap();
        assert_eq!((g0.net.node_count(), g0.net.arc_count()), (2, 1));
        assert_eq!(cost(&g0, "s_0->t_0"), q("0"));
        assert_eq!(cap(&g0, "s_0->t_0"), Capacity::finite(1));

        let one = inst(&["1"]);
        let g1 = build_counting_ssp(&one, 1, 1).unwrap();
        for l in ["s_1->s_0", "t_0->t_1"] {
            assert_eq!(cost(&g1, l), q("1/26"));
            assert_eq!(cap(&g1, l), Capacity::finite(1));
        }
        for l in ["s_1->t_0", "s_0->t_1"] {
            assert_eq!(cost(&g1, l), q("6/13"));
        }
        assert_eq!(g1.net.source(), Some(g1.node("s_1")));
        assert_eq!(g1.net.sink(), Some(g1.node("t_1")));

        let g2 = build_counting_ssp(&a, 1, 2).unwrap();
        assert_eq!((g2.net.node_count(), g2.net.arc_count()), (6, 9));
        assert_eq!(cap(&g2, "s_2->s_1"), Capacity::finite(2));
        assert!(matches!(
            build_counting_ssp(&a, 1, 4),
            Err(GadgetError::LevelOutOfRange { level: 4, n: 3 })
        ));
    }

    #[test]
    fn gssp_shape() {
        let a = inst(&["1", "2"]);
        let g = build_gssp(&a);
        assert_eq!((g.net.node_count(), g.net.arc_count()), (14, 23));
        let e = g.watched[0];
        assert_eq!(g.arc("e"), Some(e));
        assert_eq!(g.net.arc(e).cost, q("0"));
        assert_eq!(g.net.arc(e).capacity, Capacity::finite(1));
        assert_eq!(g.net.arc(e).tail, g.node("s_0+"));
        assert_eq!(g.net.arc(e).head, g.node("t_0-"));
        let eps5 = &a.epsilon * &q("1/5");
        assert_eq!(cost(&g, "s_0+->t_0+"), eps5);
        assert_eq!(cost(&g, "s_0-->t_0-"), eps5);
        assert_eq!(cap(&g, "s->s_2+"), Capacity::finite(4));
        g.validate().unwrap();

        let split = split_watched_arc(&g, &a).unwrap();
        assert_eq!(split.net.arc_count(), 24);
        assert_eq!(split.watched.len(), 2);
        let costs: Vec<Rational> = split.watched.iter().map(|&w| split.net.arc(w).cost.clone()).collect();
        assert_eq!(costs, vec![&a.epsilon * &q("1/25"), &a.epsilon * &q("2/25")]);
        for &w in &split.watched {
            assert_eq!(split.net.arc(w).capacity, Capacity::finite(q("1/2")));
        }
        let not_gssp = build_counting_ssp(&a, 1, 1).unwrap();
        assert!(matches!(split_watched_arc(&not_gssp, &a), Err(GadgetError::WrongFamily { .. })));
    }

    #[test]
    fn counting_ns_examples() {
        assert_eq!(x_param(1), q("2"));
        assert_eq!(x_param(2), q("5"));
        let one = inst(&["1"]);
        let r = q("1/3");
        let g = build_counting_ns(&one, 1, &r, 1).unwrap();
        assert_eq!(cap(&g, "s_1->s_0"), Capacity::finite(3));
        assert_eq!(cap(&g, "s_1->t_0"), Capacity::finite(3));
        assert_eq!(cost(&g, "s_1->t_0"), q("49/78"));
        assert_eq!(cost(&g, "s_0->t_1"), &(&q("1") - &q("2/3")) - &q("1/26"));
        assert_eq!(g.meta.r, Some(r.clone()));
        assert_eq!(g.basis_arcs.len(), 2);
        g.validate().unwrap();
        for bad in ["1/2", "2/13", "11/13", "0", "1"] {
            assert_eq!(
                build_counting_ns(&one, 1, &q(bad), 1),
                Err(GadgetError::InvalidR(q(bad)))
            );
        }
    }

    #[test]
    fn harness_shape() {
        let a = inst(&["1", "2"]);
        let r = q("1/3");
        let h = build_ns_harness(&a, 1, &r, 2).unwrap();
        let backbone = h.arc("s->t").unwrap();
        assert_eq!(h.initial_flow.get(backbone), &q("11"));
        assert_eq!(h.net.arc(backbone).cost, q("9"));
        let h1 = build_ns_harness(&a, -1, &r, 1).unwrap();
        assert_eq!(h1.net.node_count(), 6);
        assert_eq!(h1.initial_basis.as_ref().unwrap().tree_arcs.len(), 5);
    }

    #[test]
    fn gns_shape() {
        let a = inst(&["1"]);
        let g = build_gns(&a);
        assert_eq!(g.meta.n, 2);
        assert_eq!((g.net.node_count(), g.net.arc_count()), (16, 26));
        let e = g.net.arc(g.watched[0]);
        assert_eq!((e.cost.clone(), e.capacity.clone()), (q("0"), Capacity::finite(q("1/2"))));
        let backbone = g.arc("s->t").unwrap();
        assert_eq!(g.net.arc(backbone).cost, q("8"));
        assert_eq!(g.initial_flow.get(backbone), &(&x_param(2) * &q("4")));
        let eps5 = &a.epsilon * &q("1/5");
        assert_eq!(cost(&g, "c+->t_0+"), eps5);
        assert_eq!(cost(&g, "s_0-->c-"), eps5);
        assert_eq!(cap(&g, "s_0+->c+"), Capacity::finite(2));
        g.validate().unwrap();
        let b = g.initial_basis.as_ref().unwrap();
        assert_eq!(b.tree_arcs.len(), 4 * 2 + 7);

        let p = build_gns_with(&a, &GnsOptions { perturb: true });
        p.validate().unwrap();
        assert_ne!(cost(&p, "s_2-->s_1-"), cost(&g, "s_2-->s_1-"));
    }

    #[test]
    fn sidecar_round_trip() {
        let a = inst(&["1", "2", "3"]);
        for g in [build_gssp(&a), build_gns(&a), build_ns_harness(&a, 1, &q("2/5"), 3).unwrap()] {
            let back = GadgetNetwork::from_sidecar(
                Network::from_json(&g.net.to_json()).unwrap(),
                &g.sidecar_json(),
            )
            .unwrap();
            assert_eq!(back, g);
        }
    }

    fn arb_instance() -> impl Strategy<Value = PartitionInstance> {
        prop::collection::vec((1i64..50, 1i64..6), 1..7).prop_map(|xs| {
            let raw: Vec<Rational> = xs.iter().map(|&(p, d)| Rational::frac(p, d)).collect();
            normalize_instance(&raw).unwrap()
        })
    }

    proptest! {
        #[test]
        fn normalized_is_scaled_raw(a in arb_instance()) {
            prop_assert_eq!(&a.total, &q("1/13"));
            let ratio = &a.normalized[0] / &a.raw[0];
            for (x, r) in a.normalized.iter().zip(&a.raw) {
                prop_assert_eq!(&(x / r), &ratio);
                prop_assert!((x / &a.epsilon).is_integer());
            }
        }

        #[test]
        fn complement_flips_sign(a in arb_instance(), k in 0u64..64) {
            let n = a.len();
            let k = k % (1 << n);
            let full = (1u64 << n) - 1;
            prop_assert_eq!(
                signed_sum(&a.normalized, 0, n, k).unwrap(),
                -signed_sum(&a.normalized, 0, n, full - k).unwrap()
            );
        }

        #[test]
        fn generated_networks_are_consistent(a in arb_instance(), i in 0usize..7, neg in any::<bool>()) {
            let i = i.min(a.len());
            let sign = if neg { -1 } else { 1 };
            let r = q("2/5");
            let n = build_counting_ssp(&a, sign, i).unwrap();
            n.validate().unwrap();
            prop_assert_eq!(n.net.node_count(), 2 * i + 2);
            prop_assert_eq!(n.net.arc_count(), 4 * i + 1);
            build_counting_ns(&a, sign, &r, i).unwrap().validate().unwrap();
            build_ns_harness(&a, sign, &r, i).unwrap().validate().unwrap();
            let m = a.len();
            let g = build_gssp(&a);
            g.validate().unwrap();
            prop_assert_eq!((g.net.node_count(), g.net.arc_count()), (4 * m + 6, 8 * m + 7));
            let g = build_gns(&a);
            g.validate().unwrap();
            let m = m + 1;
            prop_assert_eq!((g.net.node_count(), g.net.arc_count()), (4 * m + 8, 8 * m + 10));
        }
    }

    #[test]
    fn counting_ssp_closed_forms_up_to_ten() {
        let a = inst(&["1", "2", "3", "4", "5", "6", "7", "8", "9", "10"]);
        for i in 0..=10 {
            let g = build_counting_ssp(&a, 1, i).unwrap();
            assert_eq!((g.net.node_count(), g.net.arc_count()), (2 * i + 2, 4 * i + 1));
        }
        assert!(q("2/13") < q("1/3") && q("1/3") < q("11/13"));
    }
}

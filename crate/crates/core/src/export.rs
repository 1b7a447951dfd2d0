//! Graphviz rendering of generated networks: each arc is labelled
//! "cost; capacity", the watched arc is dashed and initial basis arcs are bold.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::flownet::{ArcId, Network};
use crate::gadgets::GadgetNetwork;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn export_dot(g: &GadgetNetwork) -> String {
    export_network_dot(&g.net, &g.watched, &g.basis_arcs)
}

pub fn export_network_dot(net: &Network, watched: &[ArcId], bold: &BTreeSet<ArcId>) -> String {
    let mut out = String::from("digraph flow {\n  rankdir=LR;\n");
    for v in net.nodes() {
        let name = quote(&net.node_name(v.id));
        if v.balance.is_zero() {
            let _ = writeln!(out, "  {name};");
        } else {
            let _ = writeln!(out, "  {name} [xlabel={}];", quote(&v.balance.to_string()));
        }
    }
    for a in net.arcs() {
        let mut style = Vec::new();
        if bold.contains(&a.id) {
            style.push("bold");
        }
        if watched.contains(&a.id) {
            style.push("dashed");
        }
        let label = quote(&format!("{}; {}", a.cost, a.capacity));
        let _ = write!(
            out,
            "  {} -> {} [label={label}",
            quote(&net.node_name(a.tail)),
            quote(&net.node_name(a.head))
        );
        if !style.is_empty() {
            let _ = write!(out, ", style={}", quote(&style.join(",")));
        }
        out.push_str("];\n");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::{build_counting_ssp, build_gns, build_gssp, normalize_instance};
    use crate::Rational;

    #[test]
    fn dot_examples() {
        let inst = normalize_instance(&[Rational::from_integer(1)]).unwrap();
        let n0 = export_dot(&build_counting_ssp(&inst, 1, 0).unwrap());
        let edges: Vec<&str> = n0.lines().filter(|l| l.contains("->")).collect();
        assert_eq!(edges, vec!["  \"s_0\" -> \"t_0\" [label=\"0; 1\"];"]);

        let gns = export_dot(&build_gns(&inst));
        assert!(gns.contains("\"s\" -> \"t\" [label=\"8; inf\", style=\"bold\"]"));
        assert!(gns.contains("\"c+\" -> \"c-\" [label=\"0; 1/2\", style=\"dashed\"]"));

        let gssp = export_dot(&build_gssp(&inst));
        assert!(gssp.contains("\"s_0+\" -> \"t_0-\" [label=\"0; 1\", style=\"dashed\"]"));
    }
}

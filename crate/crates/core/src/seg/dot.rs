use std::fmt::Write;

use super::Seg;
use crate::syntax::print_network;

fn escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\l"),
            c => out.push(c),
        }
    }
    out
}

/// Graphviz rendering; node labels are the printed networks.
pub fn export_dot(seg: &Seg) -> String {
    let mut out = String::from("digraph seg {\n    node [shape=box, fontname=\"monospace\"];\n");
    for n in &seg.nodes {
        let text = format!("#{} rc={}\n{}", n.id, n.reset_count, print_network(&n.state.network));
        let style = if n.id == seg.root { ", penwidth=2" } else { "" };
        let _ = writeln!(out, "    n{} [label=\"{}\"{}];", n.id, escape(&text), style);
    }
    for e in &seg.edges {
        match &e.loop_mapping {
            Some(m) => {
                let _ = writeln!(
                    out,
                    "    n{} -> n{} [label=\"{}\\n{}\", style=dashed];",
                    e.from,
                    e.to,
                    escape(&e.label.to_string()),
                    escape(&m.non_identity().to_string())
                );
            }
            None => {
                let _ = writeln!(out, "    n{} -> n{} [label=\"{}\"];", e.from, e.to, escape(&e.label.to_string()));
            }
        }
    }
    out.push_str("}\n");
    out
}

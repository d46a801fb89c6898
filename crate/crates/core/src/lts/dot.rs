//! Graphviz rendering.

use std::fmt::Write as _;

use super::format::sorted_transitions;
use super::{Lts, Side};

/// Edge color for mediator actions on the left port.
pub const LEFT_EDGE_COLOR: &str = "blue";
/// Edge color for mediator actions on the right port.
pub const RIGHT_EDGE_COLOR: &str = "darkorange";

/// Renders the machine as a `digraph`. Final states are double circles, the
/// initial state is drawn bold. Edges of port-qualified actions are colored
/// by port.
pub fn export_dot(lts: &Lts) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", lts.name);
    let _ = writeln!(out, "  rankdir=LR;");
    for s in &lts.states {
        let shape = if lts.is_final(s) { "doublecircle" } else { "circle" };
        let style = if *s == lts.initial { ", style=bold, penwidth=2" } else { "" };
        let _ = writeln!(out, "  \"{s}\" [shape={shape}{style}];");
    }
    for t in sorted_transitions(lts) {
        let color = match t.action.port {
            Some(Side::Left) => format!(", color={LEFT_EDGE_COLOR}, fontcolor={LEFT_EDGE_COLOR}"),
            Some(Side::Right) => format!(", color={RIGHT_EDGE_COLOR}, fontcolor={RIGHT_EDGE_COLOR}"),
            None => String::new(),
        };
        let _ = writeln!(out, "  \"{}\" -> \"{}\" [label=\"{}\"{color}];", t.source, t.target, t.action);
    }
    out.push_str("}\n");
    out
}

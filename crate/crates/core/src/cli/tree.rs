use std::fmt::Write as _;

use super::run::NodeStat;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\\\""))
}

/// DOT digraph of the result tree: one node per cut predicate labeled with
/// its name and P/R/F1, one edge per parent link, bin nodes dashed.
pub fn export_tree(stats: &[NodeStat]) -> String {
    let mut out = String::from("digraph result_tree {\n  rankdir=BT;\n  node [shape=box];\n");
    for s in stats {
        let name = if s.name.is_empty() { &s.id } else { &s.name };
        let label = format!(
            "{name}\\nP={:.3} R={:.3} F1={:.3}",
            s.precision, s.recall, s.f1
        );
        let style = if s.bin { ", style=dashed" } else { "" };
        writeln!(out, "  {} [label={}{style}];", quote(&s.id), quote(&label))
            .expect("writing to a String");
    }
    for s in stats {
        for p in &s.parents {
            writeln!(out, "  {} -> {};", quote(&s.id), quote(p)).expect("writing to a String");
        }
    }
    out.push_str("}\n");
    out
}

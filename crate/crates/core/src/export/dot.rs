use alloc::format;
use alloc::string::String;
use core::fmt::{self, Write};

use crate::error::{Error, Result};
use crate::pi::{PiExplanation, PiGraph};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotStyle {
    pub proponent_color: String,
    pub opponent_color: String,
    pub support_color: String,
    pub attack_color: String,
    /// Label every arc with its influence value to two decimals.
    pub weight_labels: bool,
}

impl Default for DotStyle {
    fn default() -> Self {
        Self {
            proponent_color: "green".into(),
            opponent_color: "red".into(),
            support_color: "green".into(),
            attack_color: "red".into(),
            weight_labels: true,
        }
    }
}

/// A single `digraph` in Graphviz syntax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotDocument {
    pub text: String,
}

impl fmt::Display for DotDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders the graph. Vertices are `f0..f{m-1}` labelled with feature
/// names; vertices and arcs are emitted in feature-index order.
pub fn emit_dot(g: &PiGraph, e: &PiExplanation, style: &DotStyle) -> Result<DotDocument> {
    if g.feature_names != e.feature_names {
        return Err(Error::Consistency(
            "graph and explanation name different features".into(),
        ));
    }
    let m = g.n_features();
    let mut text = String::new();
    let w = &mut text;
    // writing into a String cannot fail
    let _ = writeln!(w, "digraph pi_graph {{");
    let _ = writeln!(w, "  node [shape=ellipse, style=filled];");
    for (i, name) in g.feature_names.iter().enumerate() {
        let color = if g.is_proponent(i) {
            &style.proponent_color
        } else {
            &style.opponent_color
        };
        let _ = writeln!(
            w,
            "  f{} [label={}, fillcolor={}];",
            i,
            quote(name),
            quote(color)
        );
    }
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let v = e.matrix[i][j];
            let color = if v >= 0.0 {
                &style.support_color
            } else {
                &style.attack_color
            };
            let _ = write!(w, "  f{} -> f{} [color={}", i, j, quote(color));
            if style.weight_labels {
                let _ = write!(w, ", label={}", quote(&format!("{:.2}", v)));
            }
            let _ = writeln!(w, "];");
        }
    }
    let _ = writeln!(w, "}}");
    Ok(DotDocument { text })
}

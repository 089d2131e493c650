//! Text renderings: Graphviz DOT for the influence graph and plain-text
//! alteration tables.

mod dot;
mod table;

pub use dot::{emit_dot, DotDocument, DotStyle};
pub use table::emit_table;

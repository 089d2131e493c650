use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use crate::error::{Error, Result};
use crate::pi::{AlterationKind, AlterationResult, PiGraph};

/// Plain-text alteration table: one row per candidate feature with its
/// 1-based index, name, proponent/opponent side and row sum. Selected rows
/// carry a `*`. Influence sums print with two decimals, conflict sums as
/// integers.
pub fn emit_table(r: &AlterationResult, names: &[String], graph: &PiGraph) -> Result<String> {
    let m = r.row_sums.len();
    if names.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: names.len(),
        });
    }
    if graph.n_features() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: graph.n_features(),
        });
    }
    let width = names
        .iter()
        .map(|n| n.chars().count())
        .max()
        .unwrap_or(0)
        .max(12);
    let heading = match r.kind {
        AlterationKind::Alt => "influence sum",
        AlterationKind::Calt => "conflict sum",
    };
    let mut out = String::new();
    let mut line = String::new();
    let _ = write!(
        line,
        "{:>3}  {:<width$}  {:<3}  {:>13}  selected",
        "i",
        "feature",
        "P/O",
        heading,
        width = width
    );
    push_line(&mut out, &mut line);
    for (i, name) in names.iter().enumerate() {
        if !r.is_candidate(i) {
            continue;
        }
        let side = if graph.is_proponent(i) { "P" } else { "O" };
        let sum = match r.kind {
            AlterationKind::Alt => format!("{:.2}", r.row_sums[i]),
            AlterationKind::Calt => format!("{:.0}", r.row_sums[i]),
        };
        let mark = if r.is_selected(i) { "*" } else { "" };
        let _ = write!(
            line,
            "{:>3}  {:<width$}  {:<3}  {:>13}  {}",
            i + 1,
            name,
            side,
            sum,
            mark,
            width = width
        );
        push_line(&mut out, &mut line);
    }
    Ok(out)
}

fn push_line(out: &mut String, line: &mut String) {
    out.push_str(line.trim_end());
    out.push('\n');
    line.clear();
}

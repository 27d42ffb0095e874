//! Line-oriented model dump format and DOT export.
//!
//! ```text
//! points:
//! w0
//! w1
//! order:
//! w0 -> w1
//! val p:
//! w1
//! ```
//!
//! `order:` lists the covering relation; the full order is its
//! reflexive-transitive closure. Blank lines and `#` comments are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use super::{FrameError, KripkeFrame, KripkeModel, ModelError, Valuation};

#[derive(Debug, Error)]
pub enum ModelParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn write_model(model: &KripkeModel) -> String {
    let frame = model.frame();
    let mut out = String::from("points:\n");
    for label in frame.labels() {
        out.push_str(label);
        out.push('\n');
    }
    out.push_str("order:\n");
    for w in 0..frame.len() {
        if frame.covers(w).is_empty() {
            continue;
        }
        out.push_str(frame.label(w));
        out.push_str(" ->");
        for &c in frame.covers(w) {
            out.push(' ');
            out.push_str(frame.label(c));
        }
        out.push('\n');
    }
    for (var, set) in model.valuation().iter() {
        let _ = writeln!(out, "val {var}:");
        for w in set.ones() {
            out.push_str(frame.label(w));
            out.push('\n');
        }
    }
    out
}

enum Section {
    None,
    Points,
    Order,
    Val,
}

pub fn parse_model(text: &str) -> Result<KripkeModel, ModelParseError> {
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    let mut vals: Vec<(String, Vec<(usize, String)>)> = Vec::new();
    let mut section = Section::None;
    let syntax = |line: usize, message: String| ModelParseError::Syntax { line, message };

    let mut order_lines: Vec<(usize, String, Vec<String>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line == "points:" {
            section = Section::Points;
            continue;
        }
        if line == "order:" {
            section = Section::Order;
            continue;
        }
        if let Some(rest) = line.strip_prefix("val ") {
            let Some(var) = rest.strip_suffix(':') else {
                return Err(syntax(
                    line_no,
                    format!("malformed section header `{line}`"),
                ));
            };
            let var = var.trim().to_owned();
            section = Section::Val;
            vals.push((var, Vec::new()));
            continue;
        }
        match &section {
            Section::None => {
                return Err(syntax(line_no, "content before any section".into()));
            }
            Section::Points => {
                if line.contains(char::is_whitespace) {
                    return Err(syntax(
                        line_no,
                        format!("point id `{line}` contains whitespace"),
                    ));
                }
                if index.insert(line.to_owned(), labels.len()).is_some() {
                    return Err(syntax(line_no, format!("duplicate point `{line}`")));
                }
                labels.push(line.to_owned());
            }
            Section::Order => {
                let Some((from, to)) = line.split_once("->") else {
                    return Err(syntax(
                        line_no,
                        format!("expected `w -> w1 w2 ...`, got `{line}`"),
                    ));
                };
                order_lines.push((
                    line_no,
                    from.trim().to_owned(),
                    to.split_whitespace().map(str::to_owned).collect(),
                ));
            }
            Section::Val => {
                vals.last_mut()
                    .expect("val section open")
                    .1
                    .push((line_no, line.to_owned()));
            }
        }
    }
    let lookup = |line: usize, id: &str| {
        index
            .get(id)
            .copied()
            .ok_or_else(|| syntax(line, format!("unknown point `{id}`")))
    };
    for (line, from, tos) in &order_lines {
        let a = lookup(*line, from)?;
        for to in tos {
            pairs.push((*line, a, lookup(*line, to)?));
        }
    }
    let base: Vec<(usize, usize)> = pairs.iter().map(|&(_, a, b)| (a, b)).collect();
    let frame = KripkeFrame::closure(labels, &base)?;
    let mut valuation = Valuation::new();
    for (var, entries) in vals {
        let mut set = FixedBitSet::with_capacity(frame.len());
        for (line, id) in entries {
            set.insert(lookup(line, &id)?);
        }
        valuation.set(&var, set);
    }
    Ok(KripkeModel::new(frame, valuation)?)
}

/// One digraph over the covering relation; points in `highlight` (e.g.
/// refuters of a designated formula) are drawn double-circled.
pub fn to_dot(frame: &KripkeFrame, highlight: Option<&FixedBitSet>) -> String {
    let mut out = String::from("digraph frame {\n  rankdir=BT;\n");
    for w in 0..frame.len() {
        let shape = if highlight.is_some_and(|h| h.contains(w)) {
            "doublecircle"
        } else {
            "circle"
        };
        let _ = writeln!(out, "  n{w} [label=\"{}\", shape={shape}];", frame.label(w));
    }
    for w in 0..frame.len() {
        for &c in frame.covers(w) {
            let _ = writeln!(out, "  n{w} -> n{c};");
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::point_set;

    #[test]
    fn dump_round_trips() {
        let frame = KripkeFrame::closure_unlabelled(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let mut val = Valuation::new();
        val.set("p", point_set(3, [1, 2]));
        val.set("q", point_set(3, []));
        let m = KripkeModel::new(frame, val).unwrap();
        let text = write_model(&m);
        assert!(text.contains("w0 -> w1\n"));
        assert!(!text.contains("w0 -> w1 w2"));
        let back = parse_model(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(parse_model("w0\n").is_err());
        assert!(parse_model("points:\nw0\norder:\nw0 -> w9\n").is_err());
        assert!(matches!(
            parse_model("points:\na\nb\norder:\na -> b\nb -> a\n"),
            Err(ModelParseError::Frame(FrameError::Cycle(..)))
        ));
        assert!(matches!(
            parse_model("points:\na\nb\norder:\na -> b\nval p:\na\n"),
            Err(ModelParseError::Model(_))
        ));
    }

    #[test]
    fn dot_marks_highlighted_points() {
        let frame = KripkeFrame::closure_unlabelled(2, &[(0, 1)]).unwrap();
        let dot = to_dot(&frame, Some(&point_set(2, [0])));
        assert!(dot.contains("n0 [label=\"w0\", shape=doublecircle]"));
        assert!(dot.contains("n1 [label=\"w1\", shape=circle]"));
        assert!(dot.contains("n0 -> n1;"));
    }
}

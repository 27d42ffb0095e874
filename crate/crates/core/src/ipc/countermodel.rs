//! Turning the search's countermodel DAG into a [`KripkeModel`].

use std::collections::HashMap;
use std::rc::Rc;

use fixedbitset::FixedBitSet;

use super::CmNode;
use crate::formula::Formula;
use crate::kripke::{force, KripkeFrame, KripkeModel, Point, Valuation};

/// Greedy minimization is skipped above this many points.
const MINIMIZE_LIMIT: usize = 512;

/// One point per distinct node; a node lies below everything reachable
/// from it. Returns the model and the point of `root`.
pub(super) fn flatten(root: &Rc<CmNode>) -> (KripkeModel, Point) {
    let mut index: HashMap<*const CmNode, Point> = HashMap::new();
    let mut nodes: Vec<&CmNode> = Vec::new();
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        let key = Rc::as_ptr(node);
        if index.contains_key(&key) {
            continue;
        }
        index.insert(key, nodes.len());
        nodes.push(node);
        stack.extend(node.children.iter());
    }
    let mut base = Vec::new();
    for (i, node) in nodes.iter().enumerate() {
        for c in &node.children {
            base.push((i, index[&Rc::as_ptr(c)]));
        }
    }
    let frame =
        KripkeFrame::closure_unlabelled(nodes.len(), &base).expect("countermodel DAG is acyclic");
    let n = frame.len();
    let mut sets: HashMap<&str, FixedBitSet> = HashMap::new();
    for (i, node) in nodes.iter().enumerate() {
        for atom in &node.atoms {
            let set = sets
                .entry(atom.as_str())
                .or_insert_with(|| FixedBitSet::with_capacity(n));
            set.union_with(frame.upset(i));
        }
    }
    let mut val = Valuation::new();
    for (name, set) in sets {
        val.set(name, set);
    }
    let model = KripkeModel::new(frame, val).expect("valuation is upward closed");
    (model, 0)
}

/// Drops points one at a time, keeping the removal whenever `witness`
/// still refutes `formula`. Starts from the witness's upset, which alone
/// decides forcing there.
pub(super) fn minimize(
    model: KripkeModel,
    witness: Point,
    formula: &Formula,
) -> (KripkeModel, Point) {
    let mut keep: Vec<Point> = model.frame().upset(witness).ones().collect();
    if keep.len() <= MINIMIZE_LIMIT {
        let mut i = keep.len();
        while i > 0 {
            i -= 1;
            if keep[i] == witness {
                continue;
            }
            let mut trial = keep.clone();
            trial.remove(i);
            let w = trial.binary_search(&witness).expect("witness kept");
            if !force(&model.restrict(&trial), w, formula) {
                keep = trial;
            }
        }
    }
    let sub = model.restrict(&keep);
    let w = keep.binary_search(&witness).expect("witness kept");
    relabel(sub, w)
}

fn relabel(model: KripkeModel, witness: Point) -> (KripkeModel, Point) {
    let n = model.len();
    let labels = (0..n).map(|i| format!("w{i}")).collect();
    let frame =
        KripkeFrame::from_order(labels, model.frame().order().to_vec()).expect("order is a poset");
    let model = KripkeModel::new(frame, model.valuation().clone()).expect("valuation unchanged");
    (model, witness)
}

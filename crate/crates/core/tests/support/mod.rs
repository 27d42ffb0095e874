//! Oracles and generators shared by the integration tests. Nothing here
//! calls the library's evaluator.

#![allow(dead_code)]

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use proptest::prelude::*;
use supint::formula::{Formula, Kind};
use supint::kripke::{KripkeFrame, KripkeModel, Point, Valuation};

/// Forcing by the textbook clauses, memoised per subformula and point.
pub struct Naive<'m> {
    model: &'m KripkeModel,
    memo: HashMap<(u32, Point), bool>,
}

impl<'m> Naive<'m> {
    pub fn new(model: &'m KripkeModel) -> Self {
        Naive {
            model,
            memo: HashMap::new(),
        }
    }

    pub fn force(&mut self, w: Point, f: &Formula) -> bool {
        if let Some(&b) = self.memo.get(&(f.id(), w)) {
            return b;
        }
        let frame = self.model.frame();
        let b = match f.kind() {
            Kind::Bottom => false,
            Kind::Var(v) => self.model.valuation().get(v).is_some_and(|s| s.contains(w)),
            Kind::And(a, b) => self.force(w, a) && self.force(w, b),
            Kind::Or(a, b) => self.force(w, a) || self.force(w, b),
            Kind::Implies(a, b) => (0..frame.len())
                .filter(|&v| frame.le(w, v))
                .all(|v| !self.force(v, a) || self.force(v, b)),
        };
        self.memo.insert((f.id(), w), b);
        b
    }

    pub fn refuters(&mut self, f: &Formula) -> FixedBitSet {
        let n = self.model.len();
        let mut s = FixedBitSet::with_capacity(n);
        for w in 0..n {
            if !self.force(w, f) {
                s.insert(w);
            }
        }
        s
    }
}

/// Reflexive-transitive closure by Warshall's algorithm.
pub fn warshall(n: usize, base: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in base {
        r[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

pub const VARS: [&str; 3] = ["p", "q", "r"];

pub fn formula(depth: u32, vars: &'static [&'static str]) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        1 => Just(Formula::bottom()),
        6 => proptest::sample::select(vars).prop_map(Formula::var),
    ];
    leaf.prop_recursive(depth, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(&a, &b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(&a, &b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(&a, &b)),
            inner.prop_map(|a| Formula::not(&a)),
        ]
    })
}

/// Base pairs `(i, j)` with `i < j`, so the closure is always a poset.
pub fn acyclic_base(max_points: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1..=max_points).prop_flat_map(|n| {
        let pairs = proptest::collection::vec((0..n, 0..n), 0..=2 * n).prop_map(|v| {
            v.into_iter()
                .filter(|&(a, b)| a != b)
                .map(|(a, b)| (a.min(b), a.max(b)))
                .collect::<Vec<_>>()
        });
        (Just(n), pairs)
    })
}

/// A random finite model: an acyclic frame and, for each variable, the
/// upward closure of a random set of generators.
pub fn model(max_points: usize) -> impl Strategy<Value = KripkeModel> {
    acyclic_base(max_points).prop_flat_map(|(n, base)| {
        let gens =
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), n), VARS.len());
        (Just(n), Just(base), gens).prop_map(|(n, base, gens)| {
            let frame = KripkeFrame::closure_unlabelled(n, &base).expect("acyclic");
            let mut val = Valuation::new();
            for (var, g) in VARS.iter().zip(gens) {
                let mut set = FixedBitSet::with_capacity(n);
                for (w, on) in g.into_iter().enumerate() {
                    if on {
                        set.union_with(frame.upset(w));
                    }
                }
                val.set(var, set);
            }
            KripkeModel::new(frame, val).expect("upward closed")
        })
    })
}

pub fn is_upset(model: &KripkeModel, set: &FixedBitSet) -> bool {
    let frame = model.frame();
    set.ones()
        .all(|w| (0..frame.len()).all(|v| !frame.le(w, v) || set.contains(v)))
}

pub fn is_downset(model: &KripkeModel, set: &FixedBitSet) -> bool {
    let frame = model.frame();
    set.ones()
        .all(|w| (0..frame.len()).all(|v| !frame.le(v, w) || set.contains(v)))
}

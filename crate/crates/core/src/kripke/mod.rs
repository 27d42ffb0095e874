//! Finite intuitionistic Kripke frames and models.
//!
//! A [`KripkeFrame`] stores the reflexive-transitive order as one upset and
//! one downset bitset per point, plus the covering relation (Hasse diagram).
//! Forcing is computed per formula node as the set of points forcing it,
//! memoized by node id inside an [`Evaluator`].

mod io;
mod search;

use std::collections::{BTreeMap, HashMap};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::formula::{Formula, Kind};

pub use io::{parse_model, to_dot, write_model, ModelParseError};
pub use search::{countervaluation, CounterValuation, DEFAULT_SEARCH_BUDGET};

/// Index of a point inside a frame.
pub type Point = usize;

/// A law of partial orders broken by a relation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PosetViolation {
    #[error("point {0} is not related to itself")]
    NotReflexive(Point),
    #[error("{0} <= {1} and {1} <= {2} but not {0} <= {2}")]
    NotTransitive(Point, Point, Point),
    #[error("{0} <= {1} and {1} <= {0} for distinct points")]
    NotAntisymmetric(Point, Point),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("base relation has a cycle through {0} and {1}")]
    Cycle(Point, Point),
    #[error("pair ({0}, {1}) mentions a point outside the frame")]
    OutOfRange(Point, Point),
    #[error(transparent)]
    NotAPoset(#[from] PosetViolation),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("valuation of `{var}` is not upward closed: holds at {from} but not at {to}")]
    NotUpwardClosed { var: String, from: Point, to: Point },
    #[error("valuation of `{var}` has {got} entries, frame has {expected} points")]
    WrongSize {
        var: String,
        got: usize,
        expected: usize,
    },
}

/// Checks that `order` is a partial order, where
/// `order[w]` is the set of points `w'` with `w ≤ w'`.
pub fn check_poset(order: &[FixedBitSet]) -> Result<(), PosetViolation> {
    let n = order.len();
    for (w, up) in order.iter().enumerate() {
        if !up.contains(w) {
            return Err(PosetViolation::NotReflexive(w));
        }
    }
    for (a, up_a) in order.iter().enumerate() {
        for b in up_a.ones().filter(|&b| b < n) {
            if b != a && order[b].contains(a) {
                return Err(PosetViolation::NotAntisymmetric(a.min(b), a.max(b)));
            }
            if !order[b].is_subset(up_a) {
                let c = order[b].difference(up_a).next().unwrap();
                return Err(PosetViolation::NotTransitive(a, b, c));
            }
        }
    }
    Ok(())
}

/// A finite partial order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeFrame {
    labels: Vec<String>,
    up: Vec<FixedBitSet>,
    down: Vec<FixedBitSet>,
    covers: Vec<Vec<Point>>,
}

impl KripkeFrame {
    /// Builds a frame from an explicit order relation, rejecting non-posets.
    pub fn from_order(labels: Vec<String>, order: Vec<FixedBitSet>) -> Result<Self, FrameError> {
        let n = labels.len();
        let order: Vec<FixedBitSet> = order
            .into_iter()
            .map(|mut s| {
                s.grow(n);
                s
            })
            .collect();
        check_poset(&order)?;
        Ok(Self::from_checked_order(labels, order))
    }

    fn from_checked_order(labels: Vec<String>, up: Vec<FixedBitSet>) -> Self {
        let n = labels.len();
        let mut down = vec![FixedBitSet::with_capacity(n); n];
        for (w, s) in up.iter().enumerate() {
            for v in s.ones() {
                down[v].insert(w);
            }
        }
        // w' covers w iff w < w' and no w'' strictly between.
        let mut covers = vec![Vec::new(); n];
        for w in 0..n {
            for v in up[w].ones().filter(|&v| v != w) {
                let between = up[w].ones().any(|u| u != w && u != v && up[u].contains(v));
                if !between {
                    covers[w].push(v);
                }
            }
        }
        KripkeFrame {
            labels,
            up,
            down,
            covers,
        }
    }

    /// Reflexive-transitive closure of `base` over the given points. Self
    /// loops are allowed; a cycle through distinct points is an error.
    pub fn closure(labels: Vec<String>, base: &[(Point, Point)]) -> Result<Self, FrameError> {
        let n = labels.len();
        let mut adj = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for &(a, b) in base {
            if a >= n || b >= n {
                return Err(FrameError::OutOfRange(a, b));
            }
            if a != b {
                adj[a].push(b);
                indeg[b] += 1;
            }
        }
        // Kahn's algorithm; anything left over sits on a cycle.
        let mut order = Vec::with_capacity(n);
        let mut queue: Vec<Point> = (0..n).filter(|&w| indeg[w] == 0).collect();
        while let Some(w) = queue.pop() {
            order.push(w);
            for &v in &adj[w] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push(v);
                }
            }
        }
        if order.len() < n {
            let a = (0..n).find(|&w| indeg[w] > 0).unwrap();
            let b = adj[a].iter().copied().find(|&v| indeg[v] > 0).unwrap();
            return Err(FrameError::Cycle(a, b));
        }
        let mut up = vec![FixedBitSet::with_capacity(n); n];
        for &w in order.iter().rev() {
            let mut s = FixedBitSet::with_capacity(n);
            s.insert(w);
            for &v in &adj[w] {
                s.union_with(&up[v]);
            }
            up[w] = s;
        }
        Ok(Self::from_checked_order(labels, up))
    }

    /// A frame with `n` points labelled `w0 … w{n-1}`.
    pub fn closure_unlabelled(n: usize, base: &[(Point, Point)]) -> Result<Self, FrameError> {
        Self::closure((0..n).map(|i| format!("w{i}")).collect(), base)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, w: Point) -> &str {
        &self.labels[w]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<Point> {
        self.labels.iter().position(|l| l == label)
    }

    /// `{ w' | w ≤ w' }`, including `w`.
    pub fn upset(&self, w: Point) -> &FixedBitSet {
        &self.up[w]
    }

    /// `{ w' | w' ≤ w }`, including `w`.
    pub fn downset(&self, w: Point) -> &FixedBitSet {
        &self.down[w]
    }

    pub fn le(&self, w: Point, v: Point) -> bool {
        self.up[w].contains(v)
    }

    /// Immediate successors of `w`.
    pub fn covers(&self, w: Point) -> &[Point] {
        &self.covers[w]
    }

    pub fn order(&self) -> &[FixedBitSet] {
        &self.up
    }

    /// All points ordered so that every point comes after its strict
    /// successors (maximal points first). Ties break by index.
    pub fn maximal_first(&self) -> Vec<Point> {
        let mut pts: Vec<Point> = (0..self.len()).collect();
        pts.sort_by_key(|&w| (self.up[w].count_ones(..), w));
        pts
    }

    pub fn is_upset(&self, set: &FixedBitSet) -> bool {
        set.ones().all(|w| self.up[w].is_subset(set))
    }

    pub fn all_points(&self) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.len());
        s.insert_range(..);
        s
    }

    /// The subframe on `keep` (in increasing index order), with the
    /// induced order.
    pub fn restrict(&self, keep: &[Point]) -> KripkeFrame {
        let n = keep.len();
        let labels = keep.iter().map(|&w| self.labels[w].clone()).collect();
        let up = keep
            .iter()
            .map(|&w| {
                let mut s = FixedBitSet::with_capacity(n);
                for (i, &v) in keep.iter().enumerate() {
                    if self.up[w].contains(v) {
                        s.insert(i);
                    }
                }
                s
            })
            .collect();
        Self::from_checked_order(labels, up)
    }
}

/// A monotone assignment of point sets to variable names. Variables not in
/// the map hold nowhere.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Valuation {
    sets: BTreeMap<String, FixedBitSet>,
}

impl Valuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, var: &str, points: FixedBitSet) {
        self.sets.insert(var.to_owned(), points);
    }

    pub fn get(&self, var: &str) -> Option<&FixedBitSet> {
        self.sets.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &FixedBitSet)> {
        self.sets.iter().map(|(k, v)| (k.as_str(), v))
    }
}

/// A frame together with a monotone valuation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    frame: KripkeFrame,
    valuation: Valuation,
}

impl KripkeModel {
    pub fn new(frame: KripkeFrame, valuation: Valuation) -> Result<Self, ModelError> {
        let n = frame.len();
        let mut fixed = Valuation::new();
        for (var, set) in valuation.iter() {
            if set.len() > n && set.ones().any(|w| w >= n) {
                return Err(ModelError::WrongSize {
                    var: var.to_owned(),
                    got: set.len(),
                    expected: n,
                });
            }
            let mut set = set.clone();
            set.grow(n);
            for w in set.ones() {
                if let Some(to) = frame.upset(w).difference(&set).next() {
                    return Err(ModelError::NotUpwardClosed {
                        var: var.to_owned(),
                        from: w,
                        to,
                    });
                }
            }
            let mut trimmed = FixedBitSet::with_capacity(n);
            trimmed.extend(set.ones().filter(|&w| w < n));
            fixed.set(var, trimmed);
        }
        Ok(KripkeModel {
            frame,
            valuation: fixed,
        })
    }

    pub fn frame(&self) -> &KripkeFrame {
        &self.frame
    }

    pub fn valuation(&self) -> &Valuation {
        &self.valuation
    }

    pub fn len(&self) -> usize {
        self.frame.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame.is_empty()
    }

    /// The submodel on `keep`. Only meaningful when `keep` is an upset or
    /// when the caller re-checks forcing afterwards.
    pub fn restrict(&self, keep: &[Point]) -> KripkeModel {
        let frame = self.frame.restrict(keep);
        let mut val = Valuation::new();
        for (var, set) in self.valuation.iter() {
            let mut s = FixedBitSet::with_capacity(keep.len());
            for (i, &w) in keep.iter().enumerate() {
                if set.contains(w) {
                    s.insert(i);
                }
            }
            val.set(var, s);
        }
        KripkeModel {
            frame,
            valuation: val,
        }
    }
}

/// Memoized forcing evaluation against one model.
pub struct Evaluator<'m> {
    model: &'m KripkeModel,
    memo: HashMap<u32, FixedBitSet>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m KripkeModel) -> Self {
        Evaluator {
            model,
            memo: HashMap::new(),
        }
    }

    pub fn model(&self) -> &'m KripkeModel {
        self.model
    }

    /// The set of points forcing `f`.
    pub fn truth_set(&mut self, f: &Formula) -> &FixedBitSet {
        if !self.memo.contains_key(&f.id()) {
            for node in f.subformulas() {
                if self.memo.contains_key(&node.id()) {
                    continue;
                }
                let set = self.compute(&node);
                self.memo.insert(node.id(), set);
            }
        }
        &self.memo[&f.id()]
    }

    fn compute(&self, node: &Formula) -> FixedBitSet {
        let frame = &self.model.frame;
        let n = frame.len();
        match node.kind() {
            Kind::Bottom => FixedBitSet::with_capacity(n),
            Kind::Var(name) => self
                .model
                .valuation
                .get(name)
                .cloned()
                .unwrap_or_else(|| FixedBitSet::with_capacity(n)),
            Kind::And(a, b) => {
                let mut s = self.memo[&a.id()].clone();
                s.intersect_with(&self.memo[&b.id()]);
                s
            }
            Kind::Or(a, b) => {
                let mut s = self.memo[&a.id()].clone();
                s.union_with(&self.memo[&b.id()]);
                s
            }
            Kind::Implies(a, b) => {
                // Points where a holds but b fails; w forces a → b iff its
                // upset avoids them.
                let mut bad = self.memo[&a.id()].clone();
                bad.difference_with(&self.memo[&b.id()]);
                let mut s = FixedBitSet::with_capacity(n);
                for w in 0..n {
                    if frame.upset(w).is_disjoint(&bad) {
                        s.insert(w);
                    }
                }
                s
            }
        }
    }

    pub fn force(&mut self, w: Point, f: &Formula) -> bool {
        self.truth_set(f).contains(w)
    }

    pub fn refuters(&mut self, f: &Formula) -> FixedBitSet {
        let mut s = self.truth_set(f).clone();
        s.toggle_range(..);
        s
    }
}

/// `(𝔐, w) ⊨ f`.
pub fn force(model: &KripkeModel, w: Point, f: &Formula) -> bool {
    Evaluator::new(model).force(w, f)
}

/// Points at which `f` is refuted; always a downset.
pub fn refuters(model: &KripkeModel, f: &Formula) -> FixedBitSet {
    Evaluator::new(model).refuters(f)
}

pub fn valid_in_model(model: &KripkeModel, f: &Formula) -> bool {
    refuters(model, f).is_clear()
}

/// Bitset helper: the set containing exactly `points`.
pub fn point_set(n: usize, points: impl IntoIterator<Item = Point>) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(n);
    s.extend(points);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn chain2() -> KripkeFrame {
        KripkeFrame::closure_unlabelled(2, &[(0, 1)]).unwrap()
    }

    #[test]
    fn poset_checks() {
        let single = vec![point_set(1, [0])];
        assert_eq!(check_poset(&single), Ok(()));
        let sym = vec![point_set(2, [0, 1]), point_set(2, [0, 1])];
        assert_eq!(
            check_poset(&sym),
            Err(PosetViolation::NotAntisymmetric(0, 1))
        );
        let irr = vec![point_set(1, [])];
        assert_eq!(check_poset(&irr), Err(PosetViolation::NotReflexive(0)));
        let intrans = vec![
            point_set(3, [0, 1]),
            point_set(3, [1, 2]),
            point_set(3, [2]),
        ];
        assert_eq!(
            check_poset(&intrans),
            Err(PosetViolation::NotTransitive(0, 1, 2))
        );
    }

    #[test]
    fn closure_examples() {
        let one = KripkeFrame::closure_unlabelled(1, &[]).unwrap();
        assert!(one.le(0, 0));
        let chain = KripkeFrame::closure_unlabelled(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(chain.le(0, 2));
        assert!(!chain.le(2, 0));
        assert_eq!(chain.covers(0), &[1]);
        assert!(check_poset(chain.order()).is_ok());
        assert!(matches!(
            KripkeFrame::closure_unlabelled(2, &[(0, 1), (1, 0)]),
            Err(FrameError::Cycle(..))
        ));
        assert!(KripkeFrame::closure_unlabelled(1, &[(0, 0)]).is_ok());
    }

    #[test]
    fn valuation_must_be_monotone() {
        let mut val = Valuation::new();
        val.set("p", point_set(2, [0]));
        assert!(matches!(
            KripkeModel::new(chain2(), val),
            Err(ModelError::NotUpwardClosed { .. })
        ));
    }

    #[test]
    fn excluded_middle_fails_on_two_chain() {
        let mut val = Valuation::new();
        val.set("p", point_set(2, [1]));
        let m = KripkeModel::new(chain2(), val).unwrap();
        let lem = parse("p | ~p").unwrap();
        assert!(!force(&m, 0, &lem));
        assert!(force(&m, 1, &lem));
        assert_eq!(refuters(&m, &lem), point_set(2, [0]));
    }

    #[test]
    fn constants() {
        let m = KripkeModel::new(chain2(), Valuation::new()).unwrap();
        assert!(!force(&m, 1, &Formula::bottom()));
        assert!(refuters(&m, &Formula::top()).is_clear());
        assert_eq!(refuters(&m, &Formula::bottom()), point_set(2, [0, 1]));
        assert!(valid_in_model(&m, &Formula::top()));
        assert!(!valid_in_model(&m, &Formula::bottom()));
        // unknown variables hold nowhere
        assert!(!force(&m, 1, &parse("zz").unwrap()));
    }

    #[test]
    fn maximal_first_order() {
        let f = KripkeFrame::closure_unlabelled(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(f.maximal_first(), vec![2, 1, 0]);
    }
}

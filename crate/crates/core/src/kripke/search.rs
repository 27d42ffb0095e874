//! Countervaluation search: find a monotone valuation on a fixed frame that
//! refutes a formula somewhere, or show that none exists.
//!
//! The search assigns `(point, variable)` atoms in a fixed order (maximal
//! points first, variables by name, `true` before `false`). Monotonicity and
//! the forcing clauses of every subformula are kept as clauses over
//! three-valued `(point, node)` cells, so each assignment is followed by
//! unit propagation; conflicts are analysed and learned so the search can
//! jump back past irrelevant choices.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use super::{Evaluator, KripkeFrame, KripkeModel, Point, Valuation};
use crate::formula::{variables, Formula, Kind};

pub const DEFAULT_SEARCH_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug)]
pub enum CounterValuation {
    /// The valuation refutes the formula at `witness`.
    Found { model: KripkeModel, witness: Point },
    /// The whole space was covered; the formula is valid in the frame.
    Exhausted { nodes: u64 },
    /// The node budget ran out first.
    Unknown { nodes: u64 },
}

impl CounterValuation {
    pub fn is_found(&self) -> bool {
        matches!(self, CounterValuation::Found { .. })
    }

    pub fn is_exhausted(&self) -> bool {
        matches!(self, CounterValuation::Exhausted { .. })
    }
}

/// Searches for a monotone valuation on `frame` refuting `formula`. Only
/// variables occurring in the formula are searched.
pub fn countervaluation(frame: &KripkeFrame, formula: &Formula, budget: u64) -> CounterValuation {
    if frame.is_empty() {
        return CounterValuation::Exhausted { nodes: 0 };
    }
    let enc = Encoding::new(frame, formula);
    let mut solver = enc.solver;
    match solver.solve(&enc.decisions, budget) {
        Outcome::Sat => {
            let mut val = Valuation::new();
            for (k, name) in enc.var_names.iter().enumerate() {
                let mut set = FixedBitSet::with_capacity(frame.len());
                for w in 0..frame.len() {
                    if solver.value(enc.atoms[k][w]) == Some(true) {
                        set.insert(w);
                    }
                }
                val.set(name, set);
            }
            let model = KripkeModel::new(frame.clone(), val)
                .expect("monotonicity clauses keep the valuation upward closed");
            let witness = {
                let mut ev = Evaluator::new(&model);
                ev.refuters(formula).ones().next()
            };
            match witness {
                Some(witness) => CounterValuation::Found { model, witness },
                None => unreachable!("satisfying assignment must refute the formula"),
            }
        }
        Outcome::Unsat => CounterValuation::Exhausted {
            nodes: solver.nodes,
        },
        Outcome::Budget => CounterValuation::Unknown {
            nodes: solver.nodes,
        },
    }
}

struct Encoding {
    solver: Solver,
    var_names: Vec<String>,
    /// `atoms[k][w]`: solver variable for variable `k` at point `w`.
    atoms: Vec<Vec<u32>>,
    decisions: Vec<Lit>,
}

impl Encoding {
    fn new(frame: &KripkeFrame, formula: &Formula) -> Self {
        let n = frame.len();
        let mut solver = Solver::default();
        let var_names: Vec<String> = variables(formula).into_iter().collect();
        let falsum = solver.new_var();
        solver.add_clause(vec![Lit::neg(falsum)]);

        let mut cells: HashMap<u32, Vec<u32>> = HashMap::new();
        let mut atoms = Vec::new();
        for name in &var_names {
            let vs: Vec<u32> = (0..n).map(|_| solver.new_var()).collect();
            cells.insert(Formula::var(name).id(), vs.clone());
            atoms.push(vs);
        }
        for node in formula.subformulas() {
            if cells.contains_key(&node.id()) {
                continue;
            }
            let vs: Vec<u32> = match node.kind() {
                Kind::Bottom => vec![falsum; n],
                Kind::Var(_) => unreachable!("variables are allocated up front"),
                _ => (0..n).map(|_| solver.new_var()).collect(),
            };
            for w in 0..n {
                let t = Lit::pos(vs[w]);
                match node.kind() {
                    Kind::Bottom | Kind::Var(_) => {}
                    Kind::And(a, b) => {
                        let (a, b) = (Lit::pos(cells[&a.id()][w]), Lit::pos(cells[&b.id()][w]));
                        solver.add_clause(vec![!t, a]);
                        solver.add_clause(vec![!t, b]);
                        solver.add_clause(vec![t, !a, !b]);
                    }
                    Kind::Or(a, b) => {
                        let (a, b) = (Lit::pos(cells[&a.id()][w]), Lit::pos(cells[&b.id()][w]));
                        solver.add_clause(vec![!t, a, b]);
                        solver.add_clause(vec![t, !a]);
                        solver.add_clause(vec![t, !b]);
                    }
                    Kind::Implies(a, b) => {
                        // t ⇔ (¬a ∨ b at w) ∧ t at every cover of w
                        let (a, b) = (Lit::pos(cells[&a.id()][w]), Lit::pos(cells[&b.id()][w]));
                        let k = Lit::pos(solver.new_var());
                        solver.add_clause(vec![!k, !a, b]);
                        solver.add_clause(vec![k, a]);
                        solver.add_clause(vec![k, !b]);
                        solver.add_clause(vec![!t, k]);
                        let mut back = vec![t, !k];
                        for &c in frame.covers(w) {
                            let tc = Lit::pos(vs[c]);
                            back.push(!tc);
                        }
                        solver.add_clause(back);
                    }
                }
                // persistence along covers
                if !node.is_bottom() {
                    for &c in frame.covers(w) {
                        solver.add_clause(vec![!t, Lit::pos(vs[c])]);
                    }
                }
            }
            cells.insert(node.id(), vs);
        }
        for vs in &atoms {
            for w in 0..n {
                for &c in frame.covers(w) {
                    solver.add_clause(vec![Lit::neg(vs[w]), Lit::pos(vs[c])]);
                }
            }
        }
        let root = &cells[&formula.id()];
        solver.add_clause(root.iter().map(|&v| Lit::neg(v)).collect());

        let mut decisions = Vec::new();
        for w in frame.maximal_first() {
            for vs in &atoms {
                decisions.push(Lit::pos(vs[w]));
            }
        }
        Encoding {
            solver,
            var_names,
            atoms,
            decisions,
        }
    }
}

// ---------------------------------------------------------------------------
// A small conflict-driven clause-learning engine with a caller-supplied
// decision order.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Lit(u32);

impl Lit {
    fn pos(v: u32) -> Lit {
        Lit(v << 1)
    }
    fn neg(v: u32) -> Lit {
        Lit((v << 1) | 1)
    }
    fn var(self) -> u32 {
        self.0 >> 1
    }
    fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

enum Outcome {
    Sat,
    Unsat,
    Budget,
}

#[derive(Default)]
struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    /// 0 unassigned, 1 true, 2 false
    assign: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    units: Vec<Lit>,
    empty: bool,
    seen: Vec<bool>,
    nodes: u64,
}

impl Solver {
    fn new_var(&mut self) -> u32 {
        let v = self.assign.len() as u32;
        self.assign.push(0);
        self.level.push(0);
        self.reason.push(None);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        v
    }

    fn value(&self, v: u32) -> Option<bool> {
        match self.assign[v as usize] {
            1 => Some(true),
            2 => Some(false),
            _ => None,
        }
    }

    fn lit_value(&self, l: Lit) -> Option<bool> {
        self.value(l.var()).map(|b| b != l.is_neg())
    }

    fn add_clause(&mut self, mut lits: Vec<Lit>) {
        lits.sort_by_key(|l| l.0);
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return; // tautology
        }
        match lits.len() {
            0 => self.empty = true,
            1 => self.units.push(lits[0]),
            _ => {
                let idx = self.clauses.len();
                self.watches[(!lits[0]).0 as usize].push(idx);
                self.watches[(!lits[1]).0 as usize].push(idx);
                self.clauses.push(lits);
            }
        }
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) -> bool {
        match self.lit_value(l) {
            Some(v) => v,
            None => {
                let v = l.var() as usize;
                self.assign[v] = if l.is_neg() { 2 } else { 1 };
                self.level[v] = self.trail_lim.len() as u32;
                self.reason[v] = reason;
                self.trail.push(l);
                true
            }
        }
    }

    /// Returns the index of a conflicting clause, if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            // clauses watching ¬p, which just became false, live under p
            let mut ws = std::mem::take(&mut self.watches[p.0 as usize]);
            let false_lit = !p;
            let mut i = 0;
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                let clause = &mut self.clauses[ci];
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                if self.assign[first.var() as usize] != 0
                    && (self.assign[first.var() as usize] == 1) != first.is_neg()
                {
                    i += 1;
                    continue;
                }
                // look for a new literal to watch
                let mut found = false;
                for k in 2..clause.len() {
                    let l = clause[k];
                    let val = self.assign[l.var() as usize];
                    let is_false = val != 0 && (val == 1) == l.is_neg();
                    if !is_false {
                        clause.swap(1, k);
                        let neww = (!clause[1]).0 as usize;
                        self.watches[neww].push(ci);
                        ws.swap_remove(i);
                        found = true;
                        break;
                    }
                }
                if found {
                    continue;
                }
                let first = self.clauses[ci][0];
                if !self.enqueue(first, Some(ci)) {
                    conflict = Some(ci);
                    break;
                }
                i += 1;
            }
            // restore the remaining watchers
            let mut rest = std::mem::take(&mut self.watches[p.0 as usize]);
            ws.append(&mut rest);
            self.watches[p.0 as usize] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, u32) {
        let current = self.trail_lim.len() as u32;
        let mut learnt = vec![Lit(0)];
        let mut counter = 0;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        loop {
            let clause = self.clauses[confl].clone();
            for &q in clause.iter() {
                if Some(q) == p {
                    continue;
                }
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var() as usize] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            self.seen[lit.var() as usize] = false;
            counter -= 1;
            if counter == 0 {
                learnt[0] = !lit;
                break;
            }
            confl = self.reason[lit.var() as usize].expect("implied literal has a reason");
        }
        for l in &learnt[1..] {
            self.seen[l.var() as usize] = false;
        }
        let mut back = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var() as usize] > self.level[learnt[max_i].var() as usize] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            back = self.level[learnt[1].var() as usize];
        }
        (learnt, back)
    }

    fn backtrack(&mut self, level: u32) {
        if self.trail_lim.len() as u32 <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for l in self.trail.drain(lim..) {
            let v = l.var() as usize;
            self.assign[v] = 0;
            self.reason[v] = None;
        }
        self.trail_lim.truncate(level as usize);
        self.qhead = self.trail.len();
    }

    fn solve(&mut self, order: &[Lit], budget: u64) -> Outcome {
        if self.empty {
            return Outcome::Unsat;
        }
        for l in std::mem::take(&mut self.units) {
            if !self.enqueue(l, None) {
                return Outcome::Unsat;
            }
        }
        let mut cursor = 0usize;
        loop {
            if let Some(confl) = self.propagate() {
                self.nodes += 1;
                if self.trail_lim.is_empty() {
                    return Outcome::Unsat;
                }
                let (learnt, back) = self.analyze(confl);
                self.backtrack(back);
                cursor = 0;
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let ci = self.clauses.len();
                    self.watches[(!learnt[0]).0 as usize].push(ci);
                    self.watches[(!learnt[1]).0 as usize].push(ci);
                    let first = learnt[0];
                    self.clauses.push(learnt);
                    self.enqueue(first, Some(ci));
                }
                continue;
            }
            if self.nodes >= budget {
                return Outcome::Budget;
            }
            // next decision in the fixed order, then any leftover variable
            while cursor < order.len() && self.value(order[cursor].var()).is_some() {
                cursor += 1;
            }
            let decision = if cursor < order.len() {
                Some(order[cursor])
            } else {
                (0..self.assign.len() as u32)
                    .find(|&v| self.value(v).is_none())
                    .map(Lit::neg)
            };
            let Some(d) = decision else {
                return Outcome::Sat;
            };
            self.nodes += 1;
            self.trail_lim.push(self.trail.len());
            self.enqueue(d, None);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::kripke::force;

    #[test]
    fn single_point_is_classical() {
        let frame = KripkeFrame::closure_unlabelled(1, &[]).unwrap();
        let lem = parse("p | ~p").unwrap();
        assert!(countervaluation(&frame, &lem, 1000).is_exhausted());
    }

    #[test]
    fn two_chain_refutes_excluded_middle() {
        let frame = KripkeFrame::closure_unlabelled(2, &[(0, 1)]).unwrap();
        let lem = parse("p | ~p").unwrap();
        match countervaluation(&frame, &lem, 1000) {
            CounterValuation::Found { model, witness } => {
                assert_eq!(witness, 0);
                assert!(!force(&model, witness, &lem));
                let p = model.valuation().get("p").unwrap();
                assert!(!p.contains(0) && p.contains(1));
            }
            other => panic!("expected a countervaluation, got {other:?}"),
        }
    }

    #[test]
    fn budget_zero_is_unknown_unless_trivial() {
        let frame = KripkeFrame::closure_unlabelled(3, &[(0, 1), (0, 2)]).unwrap();
        let f = parse("~p | ~~p").unwrap();
        assert!(matches!(
            countervaluation(&frame, &f, 0),
            CounterValuation::Unknown { .. }
        ));
        assert!(countervaluation(&frame, &f, 10_000).is_found());
    }

    #[test]
    fn bottom_and_top() {
        let frame = KripkeFrame::closure_unlabelled(2, &[(0, 1)]).unwrap();
        assert!(countervaluation(&frame, &Formula::bottom(), 10).is_found());
        assert!(countervaluation(&frame, &Formula::top(), 10).is_exhausted());
    }
}

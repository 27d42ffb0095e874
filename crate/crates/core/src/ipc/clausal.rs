//! Intuitionistic proof search on top of a classical SAT solver.
//!
//! Every subformula gets an atom together with one-sided definitions
//! chosen by polarity. Definitions of `∧`, `∨`, `⊥` and the elimination
//! half of `→` are *flat* clauses (a conjunction of atoms implying a
//! disjunction of atoms); for such clauses classical and intuitionistic
//! consequence coincide, so a SAT solver decides them. The introduction
//! half of `→` becomes an *implication clause* `(a → b) → c`, handled
//! lazily: a classical model `M` that falsifies `c`, `a` and `b` must be
//! extended by a later world with `a` but not `b`. That is a recursive
//! query `M ∪ {a} ⊢ b`; when it succeeds with core `K`, the flat clause
//! `K ∖ {a} → c` is a valid consequence and is learned.
//!
//! A query either ends in an unsatisfiable SAT call (proved) or in a
//! model whose implication clauses all have failing recursive queries;
//! the models of those queries sit above it, giving a finite Kripke
//! countermodel. Recursion always grows the assumption set, so search
//! terminates.

use std::collections::HashMap;
use std::rc::Rc;

use fixedbitset::FixedBitSet;
use varisat::{ExtendFormula, Lit, Solver};

use super::{CmNode, ReplayError};
use crate::formula::{Formula, Kind};

const POS: u8 = 1;
const NEG: u8 = 2;

type Atom = usize;

/// The clausal form of a sequent `Γ ⇒ goal`.
#[derive(Clone, Debug)]
pub(super) struct Clauses {
    atoms: usize,
    names: Vec<Option<String>>,
    flat: Vec<Vec<Lit>>,
    /// `(a, b, c)` stands for `(a → b) → c`.
    imps: Vec<(Atom, Atom, Atom)>,
    goal: Atom,
}

fn lit(a: Atom, positive: bool) -> Lit {
    Lit::from_index(a, positive)
}

impl Clauses {
    pub(super) fn new(hypotheses: &[Formula], goal: &Formula) -> Self {
        let mut polarity: HashMap<u32, (Formula, u8)> = HashMap::new();
        let mut stack: Vec<(Formula, u8)> = hypotheses.iter().map(|h| (h.clone(), NEG)).collect();
        stack.push((goal.clone(), POS));
        while let Some((f, pol)) = stack.pop() {
            let entry = polarity.entry(f.id()).or_insert_with(|| (f.clone(), 0));
            let fresh = pol & !entry.1;
            if fresh == 0 {
                continue;
            }
            entry.1 |= fresh;
            match f.kind() {
                Kind::And(a, b) | Kind::Or(a, b) => {
                    stack.push((a.clone(), fresh));
                    stack.push((b.clone(), fresh));
                }
                Kind::Implies(a, b) => {
                    let flipped = ((fresh & POS) << 1) | ((fresh & NEG) >> 1);
                    stack.push((a.clone(), flipped));
                    stack.push((b.clone(), fresh));
                }
                Kind::Bottom | Kind::Var(_) => {}
            }
        }
        let mut nodes: Vec<(Formula, u8)> = polarity.into_values().collect();
        nodes.sort_by_key(|(f, _)| f.id());
        let index: HashMap<u32, Atom> = nodes
            .iter()
            .enumerate()
            .map(|(i, (f, _))| (f.id(), i))
            .collect();
        let atom = |f: &Formula| index[&f.id()];

        let mut flat = Vec::new();
        let mut imps = Vec::new();
        for (x, (f, pol)) in nodes.iter().enumerate() {
            let neg = pol & NEG != 0;
            let pos = pol & POS != 0;
            match f.kind() {
                Kind::Var(_) => {}
                Kind::Bottom => {
                    if neg {
                        flat.push(vec![lit(x, false)]);
                    }
                }
                Kind::And(a, b) => {
                    let (a, b) = (atom(a), atom(b));
                    if neg {
                        flat.push(vec![lit(x, false), lit(a, true)]);
                        flat.push(vec![lit(x, false), lit(b, true)]);
                    }
                    if pos {
                        flat.push(vec![lit(a, false), lit(b, false), lit(x, true)]);
                    }
                }
                Kind::Or(a, b) => {
                    let (a, b) = (atom(a), atom(b));
                    if neg {
                        flat.push(vec![lit(x, false), lit(a, true), lit(b, true)]);
                    }
                    if pos {
                        flat.push(vec![lit(a, false), lit(x, true)]);
                        flat.push(vec![lit(b, false), lit(x, true)]);
                    }
                }
                Kind::Implies(a, b) => {
                    let (a, b) = (atom(a), atom(b));
                    if neg {
                        flat.push(vec![lit(x, false), lit(a, false), lit(b, true)]);
                    }
                    if pos {
                        flat.push(vec![lit(b, false), lit(x, true)]);
                        imps.push((a, b, x));
                    }
                }
            }
        }
        for h in hypotheses {
            flat.push(vec![lit(atom(h), true)]);
        }
        Clauses {
            atoms: nodes.len(),
            names: nodes
                .iter()
                .map(|(f, _)| f.var_name().map(str::to_owned))
                .collect(),
            flat,
            imps,
            goal: atom(goal),
        }
    }

    fn solver(&self) -> Solver<'static> {
        let mut solver = Solver::new();
        for _ in 0..self.atoms {
            solver.new_var();
        }
        for c in &self.flat {
            solver.add_clause(c);
        }
        solver
    }
}

/// A flat clause `body → head` learned from implication clause `imp`:
/// the query `body ∪ {a} ⊢ b` succeeded for `imp = (a → b) → head`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearnedClause {
    pub body: Vec<usize>,
    pub head: usize,
    pub imp: usize,
}

/// The learned clauses of a successful search, in learning order. The
/// goal atom follows classically from the flat clauses and all of them.
#[derive(Clone, Debug)]
pub struct ClausalProof {
    pub learned: Vec<LearnedClause>,
    /// SAT calls made by the search.
    pub calls: u64,
}

impl ClausalProof {
    pub fn len(&self) -> usize {
        self.learned.len()
    }

    pub fn is_empty(&self) -> bool {
        self.learned.is_empty()
    }

    /// Re-derives the clausal form of `hypotheses ⇒ goal` and checks every
    /// learned clause, and then the goal, with a fresh SAT solver.
    pub fn replay(&self, hypotheses: &[Formula], goal: &Formula) -> Result<(), ReplayError> {
        let clauses = Clauses::new(hypotheses, goal);
        let mut solver = clauses.solver();
        for (i, step) in self.learned.iter().enumerate() {
            let &(a, b, c) = clauses
                .imps
                .get(step.imp)
                .ok_or(ReplayError::BadStep { step: i })?;
            if c != step.head || step.body.iter().any(|&x| x >= clauses.atoms) {
                return Err(ReplayError::BadStep { step: i });
            }
            let mut assume: Vec<Lit> = step.body.iter().map(|&x| lit(x, true)).collect();
            assume.push(lit(a, true));
            assume.push(lit(b, false));
            solver.assume(&assume);
            if solver.solve().expect("solver error") {
                return Err(ReplayError::NotEntailed { step: i });
            }
            let mut clause: Vec<Lit> = step.body.iter().map(|&x| lit(x, false)).collect();
            clause.push(lit(c, true));
            solver.add_clause(&clause);
        }
        solver.assume(&[lit(clauses.goal, false)]);
        if solver.solve().expect("solver error") {
            return Err(ReplayError::GoalNotEntailed);
        }
        Ok(())
    }
}

pub(super) enum Outcome {
    Proved(ClausalProof),
    Refuted(Rc<CmNode>),
    Budget(u64),
}

enum Res {
    Yes(Vec<Atom>),
    No(Rc<CmNode>),
    Budget,
}

struct Engine<'c> {
    clauses: &'c Clauses,
    solver: Solver<'static>,
    budget: u64,
    calls: u64,
    learned: Vec<LearnedClause>,
    memo: HashMap<(Vec<Atom>, Atom), Rc<CmNode>>,
}

pub(super) fn search(hypotheses: &[Formula], goal: &Formula, budget: u64) -> Outcome {
    let clauses = Clauses::new(hypotheses, goal);
    let mut engine = Engine {
        clauses: &clauses,
        solver: clauses.solver(),
        budget,
        calls: 0,
        learned: Vec::new(),
        memo: HashMap::new(),
    };
    match engine.prove(&[], clauses.goal) {
        Res::Yes(_) => Outcome::Proved(ClausalProof {
            learned: engine.learned,
            calls: engine.calls,
        }),
        Res::No(node) => Outcome::Refuted(node),
        Res::Budget => Outcome::Budget(engine.calls),
    }
}

impl Engine<'_> {
    /// Does `assumptions ⊢ q` follow? `assumptions` is sorted.
    fn prove(&mut self, assumptions: &[Atom], q: Atom) -> Res {
        let key = (assumptions.to_vec(), q);
        if let Some(node) = self.memo.get(&key) {
            return Res::No(node.clone());
        }
        'restart: loop {
            if self.calls >= self.budget {
                return Res::Budget;
            }
            self.calls += 1;
            let mut assume: Vec<Lit> = assumptions.iter().map(|&x| lit(x, true)).collect();
            assume.push(lit(q, false));
            self.solver.assume(&assume);
            if !self.solver.solve().expect("solver error") {
                let mut core: Vec<Atom> = self
                    .solver
                    .failed_core()
                    .expect("unsat under assumptions")
                    .iter()
                    .filter(|l| l.is_positive())
                    .map(|l| l.index())
                    .collect();
                core.sort_unstable();
                core.dedup();
                return Res::Yes(core);
            }
            let mut model = FixedBitSet::with_capacity(self.clauses.atoms);
            for l in self.solver.model().expect("sat") {
                if l.is_positive() {
                    model.insert(l.index());
                }
            }
            let world: Vec<Atom> = model.ones().collect();
            let mut children = Vec::new();
            for (k, &(a, b, c)) in self.clauses.imps.iter().enumerate() {
                if model.contains(a) || model.contains(b) || model.contains(c) {
                    continue;
                }
                let mut next = world.clone();
                let at = next.binary_search(&a).unwrap_err();
                next.insert(at, a);
                match self.prove(&next, b) {
                    Res::Yes(core) => {
                        let body: Vec<Atom> = core.into_iter().filter(|&x| x != a).collect();
                        let mut clause: Vec<Lit> = body.iter().map(|&x| lit(x, false)).collect();
                        clause.push(lit(c, true));
                        self.solver.add_clause(&clause);
                        self.learned.push(LearnedClause {
                            body,
                            head: c,
                            imp: k,
                        });
                        continue 'restart;
                    }
                    Res::No(node) => children.push(node),
                    Res::Budget => return Res::Budget,
                }
            }
            let atoms = world
                .iter()
                .filter_map(|&x| self.clauses.names[x].clone())
                .collect();
            let node = Rc::new(CmNode { atoms, children });
            self.memo.insert(key, node.clone());
            return Res::No(node);
        }
    }
}

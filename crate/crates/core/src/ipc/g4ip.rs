//! Backtracking proof search in the contraction-free sequent calculus of
//! [`rules`](super::rules).
//!
//! Invertible rules are applied eagerly; at an irreducible sequent every
//! non-invertible choice is tried in a fixed order. When all of them fail,
//! the failed premises' models are hung below a fresh root carrying the
//! sequent's atoms, which yields a finite countermodel. Results are
//! memoized per sequent, and the budget counts expanded sequents.
//!
//! This engine is exponential on the deeply nested one-variable chains of
//! the encoding; [`super::prove`] uses the clausal engine instead and this
//! one serves as an independent cross-check on small inputs.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use super::rules::{apply, next_invertible, Rule, Sequent};
use super::{on_big_stack, refuted, CmNode, Proof, ProverVerdict, ReplayError};
use crate::formula::{Formula, Kind};

/// Above this many free variables the classical shortcut is skipped.
const CLASSICAL_VAR_LIMIT: usize = 10;

/// Sequent-calculus verdict for `goal`.
pub fn prove(goal: &Formula, budget: u64) -> ProverVerdict {
    prove_sequent(&[], goal, budget)
}

/// Sequent-calculus verdict for `hypotheses ⇒ goal`.
pub fn prove_sequent(hypotheses: &[Formula], goal: &Formula, budget: u64) -> ProverVerdict {
    let root = Sequent::new(hypotheses.to_vec(), vec![goal.clone()]);
    let formula = Formula::implies(&Formula::and_all(hypotheses), goal);
    on_big_stack(|| run(&root, &formula, budget))
}

/// One inference of a closed derivation.
#[derive(Clone, Debug)]
pub struct DerivationStep {
    pub sequent: Sequent,
    pub rule: Rule,
    pub principal: Formula,
    /// Indices of earlier steps proving the premises, in rule order.
    pub premises: Vec<usize>,
}

/// A closed derivation stored as a DAG of steps, premises before
/// conclusions; the last step proves the goal.
#[derive(Clone, Debug)]
pub struct Derivation {
    steps: Vec<DerivationStep>,
    /// Sequents expanded by the search that produced this derivation.
    pub expanded: u64,
}

impl Derivation {
    pub fn steps(&self) -> &[DerivationStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The applied rules, conclusion first.
    pub fn trace(&self) -> Vec<(Rule, Formula)> {
        self.steps
            .iter()
            .rev()
            .map(|s| (s.rule, s.principal.clone()))
            .collect()
    }

    /// Re-applies every rule and checks that the premises are exactly the
    /// sequents proved by the referenced earlier steps.
    pub fn replay(&self, goal: &Sequent) -> Result<(), ReplayError> {
        let last = self.steps.last().ok_or(ReplayError::Empty)?;
        if &last.sequent != goal {
            return Err(ReplayError::WrongRoot(last.sequent.to_string()));
        }
        for (i, step) in self.steps.iter().enumerate() {
            let premises = apply(step.rule, &step.principal, &step.sequent).ok_or(
                ReplayError::NotApplicable {
                    step: i,
                    rule: step.rule,
                },
            )?;
            if premises.len() != step.premises.len() {
                return Err(ReplayError::PremiseMismatch { step: i });
            }
            for (expected, &j) in premises.iter().zip(&step.premises) {
                if j >= i {
                    return Err(ReplayError::Forward {
                        step: i,
                        premise: j,
                    });
                }
                if &self.steps[j].sequent != expected {
                    return Err(ReplayError::PremiseMismatch { step: i });
                }
            }
        }
        Ok(())
    }
}

fn run(root: &Sequent, formula: &Formula, budget: u64) -> ProverVerdict {
    let mut search = Search::new(budget);
    match search.prove(root) {
        Outcome::Proved(idx) => ProverVerdict::Proved(Proof::Sequent(search.extract(idx))),
        Outcome::Refuted(node) => refuted(&node, formula),
        Outcome::Budget => ProverVerdict::Unknown {
            spent: search.expanded,
        },
    }
}

#[derive(Clone)]
enum Outcome {
    Proved(usize),
    Refuted(Rc<CmNode>),
    Budget,
}

type Key = (Box<[u32]>, Box<[u32]>);

struct Search {
    budget: u64,
    expanded: u64,
    memo: HashMap<Key, Outcome>,
    steps: Vec<(Sequent, Rule, Formula, Vec<usize>)>,
}

impl Search {
    fn new(budget: u64) -> Self {
        Search {
            budget,
            expanded: 0,
            memo: HashMap::new(),
            steps: Vec::new(),
        }
    }

    fn step(
        &mut self,
        seq: &Sequent,
        rule: Rule,
        principal: Formula,
        premises: Vec<usize>,
    ) -> Outcome {
        self.steps.push((seq.clone(), rule, principal, premises));
        Outcome::Proved(self.steps.len() - 1)
    }

    fn prove(&mut self, seq: &Sequent) -> Outcome {
        let key = seq.key();
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        if self.expanded >= self.budget {
            return Outcome::Budget;
        }
        self.expanded += 1;
        let out = self.expand(seq);
        if !matches!(out, Outcome::Budget) {
            self.memo.insert(key, out.clone());
        }
        out
    }

    fn expand(&mut self, seq: &Sequent) -> Outcome {
        if let Some((rule, principal)) = next_invertible(seq) {
            let premises = apply(rule, &principal, seq).expect("selected rule applies");
            let mut proofs = Vec::with_capacity(premises.len());
            for p in &premises {
                match self.prove(p) {
                    Outcome::Proved(i) => proofs.push(i),
                    // an invertible rule: the premise's model refutes the conclusion
                    other => return other,
                }
            }
            return self.step(seq, rule, principal, proofs);
        }
        if let Some(node) = classical_countermodel(seq) {
            return Outcome::Refuted(node);
        }

        let mut children = Vec::new();
        let lefts: Vec<Formula> = seq
            .antecedent()
            .iter()
            .filter(|f| matches!(f.kind(), Kind::Implies(a, _) if matches!(a.kind(), Kind::Implies(..))))
            .cloned()
            .collect();
        let rights: Vec<Formula> = seq
            .succedent()
            .iter()
            .filter(|f| matches!(f.kind(), Kind::Implies(..)))
            .cloned()
            .collect();

        // The right premise of each left implication is invertible: a
        // countermodel there refutes the whole sequent.
        let mut right_proofs = Vec::with_capacity(lefts.len());
        for f in &lefts {
            let premises = apply(Rule::ImpLImp, f, seq).expect("left implication applies");
            match self.prove(&premises[1]) {
                Outcome::Proved(i) => right_proofs.push((i, premises)),
                other => return other,
            }
        }
        for f in &rights {
            let premises = apply(Rule::ImpR, f, seq).expect("right implication applies");
            match self.prove(&premises[0]) {
                Outcome::Proved(i) => return self.step(seq, Rule::ImpR, f.clone(), vec![i]),
                Outcome::Refuted(m) => children.push(m),
                Outcome::Budget => return Outcome::Budget,
            }
        }
        for (f, (right, premises)) in lefts.iter().zip(right_proofs) {
            match self.prove(&premises[0]) {
                Outcome::Proved(left) => {
                    return self.step(seq, Rule::ImpLImp, f.clone(), vec![left, right])
                }
                Outcome::Refuted(m) => children.push(m),
                Outcome::Budget => return Outcome::Budget,
            }
        }
        let atoms = seq
            .antecedent()
            .iter()
            .filter_map(|f| f.var_name().map(str::to_owned))
            .collect();
        Outcome::Refuted(Rc::new(CmNode { atoms, children }))
    }

    fn extract(&self, root: usize) -> Derivation {
        // Keep only steps reachable from the root, renumbered so premises
        // precede conclusions.
        let mut order = Vec::new();
        let mut index: HashMap<usize, usize> = HashMap::new();
        let mut stack = vec![(root, false)];
        while let Some((i, done)) = stack.pop() {
            if index.contains_key(&i) {
                continue;
            }
            if done {
                index.insert(i, order.len());
                order.push(i);
                continue;
            }
            stack.push((i, true));
            for &p in &self.steps[i].3 {
                if !index.contains_key(&p) {
                    stack.push((p, false));
                }
            }
        }
        let steps = order
            .iter()
            .map(|&i| {
                let (seq, rule, principal, premises) = &self.steps[i];
                DerivationStep {
                    sequent: seq.clone(),
                    rule: *rule,
                    principal: principal.clone(),
                    premises: premises.iter().map(|p| index[p]).collect(),
                }
            })
            .collect();
        Derivation {
            steps,
            expanded: self.expanded,
        }
    }
}

/// A one-point model (a classical valuation) making every antecedent
/// formula true and every succedent formula false, if one exists among
/// the valuations extending the antecedent's atoms.
fn classical_countermodel(seq: &Sequent) -> Option<Rc<CmNode>> {
    let mut vars = BTreeSet::new();
    for f in seq.antecedent().iter().chain(seq.succedent()) {
        for g in f.subformulas() {
            if g.is_var() {
                vars.insert(g);
            }
        }
    }
    let fixed: BTreeSet<Formula> = seq
        .antecedent()
        .iter()
        .filter(|f| f.is_var())
        .cloned()
        .collect();
    let free: Vec<Formula> = vars.difference(&fixed).cloned().collect();
    if free.len() > CLASSICAL_VAR_LIMIT {
        return None;
    }
    let mut memo: HashMap<u32, bool> = HashMap::new();
    for mask in 0u32..(1 << free.len()) {
        memo.clear();
        let truth = |v: &Formula| {
            fixed.contains(v)
                || free
                    .iter()
                    .position(|x| x == v)
                    .is_some_and(|i| mask >> i & 1 == 1)
        };
        let ok = seq
            .antecedent()
            .iter()
            .all(|f| classical_eval(f, &truth, &mut memo))
            && seq
                .succedent()
                .iter()
                .all(|f| !classical_eval(f, &truth, &mut memo));
        if ok {
            let atoms = vars
                .iter()
                .filter(|v| truth(v))
                .filter_map(|v| v.var_name().map(str::to_owned))
                .collect();
            return Some(Rc::new(CmNode {
                atoms,
                children: Vec::new(),
            }));
        }
    }
    None
}

fn classical_eval(
    f: &Formula,
    truth: &impl Fn(&Formula) -> bool,
    memo: &mut HashMap<u32, bool>,
) -> bool {
    if let Some(&v) = memo.get(&f.id()) {
        return v;
    }
    let v = match f.kind() {
        Kind::Bottom => false,
        Kind::Var(_) => truth(f),
        Kind::And(a, b) => classical_eval(a, truth, memo) && classical_eval(b, truth, memo),
        Kind::Or(a, b) => classical_eval(a, truth, memo) || classical_eval(b, truth, memo),
        Kind::Implies(a, b) => !classical_eval(a, truth, memo) || classical_eval(b, truth, memo),
    };
    memo.insert(f.id(), v);
    v
}

//! Decision procedure for the intuitionistic propositional calculus.
//!
//! [`prove`] runs the clausal engine of [`clausal`]: classical SAT over
//! flat clauses with lazily checked implication clauses. The sequent
//! calculus search in [`g4ip`] decides the same relation by other means
//! and is kept as an independent cross-check.
//!
//! Every `Refuted` verdict is re-checked with the Kripke evaluator before
//! it is returned, and every `Proved` verdict carries a proof that can be
//! replayed step by step.

mod clausal;
mod countermodel;
pub mod g4ip;
pub mod rules;

use std::rc::Rc;

use thiserror::Error;

use crate::formula::{substitute, Formula, Substitution};
use crate::kripke::{force, KripkeModel, Point};

pub use clausal::{ClausalProof, LearnedClause};
pub use g4ip::{Derivation, DerivationStep};
pub use rules::{apply, Rule, Sequent};

pub const DEFAULT_PROVER_BUDGET: u64 = 1_000_000;

#[derive(Clone, Debug)]
pub enum Proof {
    Clausal(ClausalProof),
    Sequent(Derivation),
}

impl Proof {
    /// Number of recorded steps.
    pub fn len(&self) -> usize {
        match self {
            Proof::Clausal(p) => p.len(),
            Proof::Sequent(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn replay(&self, hypotheses: &[Formula], goal: &Formula) -> Result<(), ReplayError> {
        match self {
            Proof::Clausal(p) => p.replay(hypotheses, goal),
            Proof::Sequent(d) => d.replay(&Sequent::new(hypotheses.to_vec(), vec![goal.clone()])),
        }
    }
}

#[derive(Clone, Debug)]
pub enum ProverVerdict {
    Proved(Proof),
    Refuted { model: KripkeModel, witness: Point },
    Unknown { spent: u64 },
}

impl ProverVerdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, ProverVerdict::Proved(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, ProverVerdict::Refuted { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, ProverVerdict::Unknown { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            ProverVerdict::Proved(_) => "proved",
            ProverVerdict::Refuted { .. } => "refuted",
            ProverVerdict::Unknown { .. } => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("derivation is empty")]
    Empty,
    #[error("root sequent is `{0}`, expected the goal sequent")]
    WrongRoot(String),
    #[error("step {step}: rule {rule} does not apply to its sequent")]
    NotApplicable { step: usize, rule: Rule },
    #[error("step {step}: premises do not match the rule's output")]
    PremiseMismatch { step: usize },
    #[error("step {step}: premise {premise} is not an earlier step")]
    Forward { step: usize, premise: usize },
    #[error("step {step}: learned clause does not fit the clausal form")]
    BadStep { step: usize },
    #[error("step {step}: learned clause is not entailed")]
    NotEntailed { step: usize },
    #[error("goal does not follow from the learned clauses")]
    GoalNotEntailed,
}

/// Int-derivability of `goal`.
pub fn prove(goal: &Formula, budget: u64) -> ProverVerdict {
    prove_sequent(&[], goal, budget)
}

/// Int-derivability of `hypotheses ⇒ goal`.
pub fn prove_sequent(hypotheses: &[Formula], goal: &Formula, budget: u64) -> ProverVerdict {
    let formula = Formula::implies(&Formula::and_all(hypotheses), goal);
    on_big_stack(|| match clausal::search(hypotheses, goal, budget) {
        clausal::Outcome::Proved(p) => ProverVerdict::Proved(Proof::Clausal(p)),
        clausal::Outcome::Refuted(node) => refuted(&node, &formula),
        clausal::Outcome::Budget(spent) => ProverVerdict::Unknown { spent },
    })
}

/// Verdict for `a ↔ b`.
pub fn prove_equiv(a: &Formula, b: &Formula, budget: u64) -> ProverVerdict {
    prove(&Formula::iff(a, b), budget)
}

/// Checks `Int ⊢ (⋀ σᵢ axiom) → goal`. A `Proved` verdict witnesses
/// `Int + axiom ⊢ goal`: each `σᵢ axiom` is derivable there by
/// substitution, and modus ponens closes the gap.
pub fn check_certificate(
    axiom: &Formula,
    instances: &[Substitution],
    goal: &Formula,
    budget: u64,
) -> ProverVerdict {
    let hyps: Vec<Formula> = instances.iter().map(|s| substitute(axiom, s)).collect();
    prove(&Formula::implies(&Formula::and_all(&hyps), goal), budget)
}

/// A countermodel under construction: a root carrying `atoms` above which
/// the `children` models sit.
#[derive(Debug)]
pub(crate) struct CmNode {
    atoms: Vec<String>,
    children: Vec<Rc<CmNode>>,
}

fn refuted(node: &Rc<CmNode>, formula: &Formula) -> ProverVerdict {
    let (model, witness) = countermodel::flatten(node);
    assert!(
        !force(&model, witness, formula),
        "extracted countermodel does not refute the goal"
    );
    let (model, witness) = countermodel::minimize(model, witness, formula);
    ProverVerdict::Refuted { model, witness }
}

/// Deeply nested inputs recurse deeply; searches get their own stack.
fn on_big_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(1 << 30)
            .spawn_scoped(s, f)
            .expect("spawn prover thread")
            .join()
            .expect("prover thread panicked")
    })
}

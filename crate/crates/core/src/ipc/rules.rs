//! Sequents and the rules of the contraction-free calculus.
//!
//! Sequents are `Γ ⇒ Δ` with both sides kept as sets sorted by node id.
//! The succedent is read disjunctively. Left implications are split by the
//! shape of their antecedent, so no rule ever copies its principal formula
//! into a premise; every premise is strictly smaller in the usual
//! G4ip weight ordering and search terminates without loop checks.

use std::fmt;

use crate::formula::{Formula, Kind};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sequent {
    antecedent: Vec<Formula>,
    succedent: Vec<Formula>,
}

fn sorted_set(mut v: Vec<Formula>) -> Vec<Formula> {
    v.sort();
    v.dedup();
    v
}

fn with(set: &[Formula], extra: &[&Formula]) -> Vec<Formula> {
    let mut v = set.to_vec();
    v.extend(extra.iter().map(|f| (*f).clone()));
    sorted_set(v)
}

fn without(set: &[Formula], f: &Formula) -> Vec<Formula> {
    set.iter().filter(|g| *g != f).cloned().collect()
}

impl Sequent {
    pub fn new(antecedent: Vec<Formula>, succedent: Vec<Formula>) -> Self {
        Sequent {
            antecedent: sorted_set(antecedent),
            succedent: sorted_set(succedent),
        }
    }

    /// `⇒ goal`
    pub fn goal(goal: &Formula) -> Self {
        Sequent::new(Vec::new(), vec![goal.clone()])
    }

    pub fn antecedent(&self) -> &[Formula] {
        &self.antecedent
    }

    pub fn succedent(&self) -> &[Formula] {
        &self.succedent
    }

    pub(crate) fn key(&self) -> (Box<[u32]>, Box<[u32]>) {
        (
            self.antecedent.iter().map(Formula::id).collect(),
            self.succedent.iter().map(Formula::id).collect(),
        )
    }

    fn in_antecedent(&self, f: &Formula) -> bool {
        self.antecedent.binary_search(f).is_ok()
    }

    fn in_succedent(&self, f: &Formula) -> bool {
        self.succedent.binary_search(f).is_ok()
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Formula]| {
            v.iter()
                .map(|g| g.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(f, "{} => {}", join(&self.antecedent), join(&self.succedent))
    }
}

/// Rule names. Left rules act on an antecedent formula, right rules on a
/// succedent formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    /// The principal formula occurs on both sides.
    Init,
    /// `⊥` in the antecedent.
    BottomL,
    AndL,
    OrL,
    AndR,
    OrR,
    /// Drop `⊥` from the succedent.
    BottomR,
    /// `Γ ⇒ A → B, Δ` from `Γ, A ⇒ B`.
    ImpR,
    /// `Γ ⇒ A → B, Δ` from `Γ ⇒ B, Δ` when `A ∈ Γ`.
    ImpRKnown,
    /// `Γ, A → B` becomes `Γ, B` when `A ∈ Γ`.
    ImpLKnown,
    /// `⊥ → B` is dropped.
    ImpLBottom,
    /// `(C ∧ D) → B` becomes `C → (D → B)`.
    ImpLAnd,
    /// `(C ∨ D) → B` becomes `C → B, D → B`.
    ImpLOr,
    /// `(C → D) → B`: premises `Γ, D → B, C ⇒ D` and `Γ, B ⇒ Δ`.
    ImpLImp,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Init => "init",
            Rule::BottomL => "botL",
            Rule::AndL => "andL",
            Rule::OrL => "orL",
            Rule::AndR => "andR",
            Rule::OrR => "orR",
            Rule::BottomR => "botR",
            Rule::ImpR => "impR",
            Rule::ImpRKnown => "impR-known",
            Rule::ImpLKnown => "impL-known",
            Rule::ImpLBottom => "impL-bot",
            Rule::ImpLAnd => "impL-and",
            Rule::ImpLOr => "impL-or",
            Rule::ImpLImp => "impL-imp",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Premises of `rule` applied to `principal` in `seq`, or `None` when the
/// rule does not apply. Axioms return an empty premise list.
pub fn apply(rule: Rule, principal: &Formula, seq: &Sequent) -> Option<Vec<Sequent>> {
    let gamma = &seq.antecedent;
    let delta = &seq.succedent;
    let left = || seq.in_antecedent(principal);
    let right = || seq.in_succedent(principal);
    let single = |a: Vec<Formula>, d: Vec<Formula>| Some(vec![Sequent::new(a, d)]);
    match (rule, principal.kind()) {
        (Rule::Init, _) if left() && right() => Some(Vec::new()),
        (Rule::BottomL, Kind::Bottom) if left() => Some(Vec::new()),
        (Rule::AndL, Kind::And(a, b)) if left() => {
            single(with(&without(gamma, principal), &[a, b]), delta.clone())
        }
        (Rule::OrL, Kind::Or(a, b)) if left() => {
            let rest = without(gamma, principal);
            Some(vec![
                Sequent::new(with(&rest, &[a]), delta.clone()),
                Sequent::new(with(&rest, &[b]), delta.clone()),
            ])
        }
        (Rule::AndR, Kind::And(a, b)) if right() => {
            let rest = without(delta, principal);
            Some(vec![
                Sequent::new(gamma.clone(), with(&rest, &[a])),
                Sequent::new(gamma.clone(), with(&rest, &[b])),
            ])
        }
        (Rule::OrR, Kind::Or(a, b)) if right() => {
            single(gamma.clone(), with(&without(delta, principal), &[a, b]))
        }
        (Rule::BottomR, Kind::Bottom) if right() => {
            single(gamma.clone(), without(delta, principal))
        }
        (Rule::ImpR, Kind::Implies(a, b)) if right() => single(with(gamma, &[a]), vec![b.clone()]),
        (Rule::ImpRKnown, Kind::Implies(a, b)) if right() && seq.in_antecedent(a) => {
            single(gamma.clone(), with(&without(delta, principal), &[b]))
        }
        (Rule::ImpLKnown, Kind::Implies(a, b)) if left() && seq.in_antecedent(a) => {
            single(with(&without(gamma, principal), &[b]), delta.clone())
        }
        (Rule::ImpLBottom, Kind::Implies(a, _)) if left() && a.is_bottom() => {
            single(without(gamma, principal), delta.clone())
        }
        (Rule::ImpLAnd, Kind::Implies(ante, b)) if left() => {
            let Kind::And(c, d) = ante.kind() else {
                return None;
            };
            let curried = Formula::implies(c, &Formula::implies(d, b));
            single(with(&without(gamma, principal), &[&curried]), delta.clone())
        }
        (Rule::ImpLOr, Kind::Implies(ante, b)) if left() => {
            let Kind::Or(c, d) = ante.kind() else {
                return None;
            };
            let cb = Formula::implies(c, b);
            let db = Formula::implies(d, b);
            single(with(&without(gamma, principal), &[&cb, &db]), delta.clone())
        }
        (Rule::ImpLImp, Kind::Implies(ante, b)) if left() => {
            let Kind::Implies(c, d) = ante.kind() else {
                return None;
            };
            let rest = without(gamma, principal);
            let db = Formula::implies(d, b);
            Some(vec![
                Sequent::new(with(&rest, &[&db, c]), vec![d.clone()]),
                Sequent::new(with(&rest, &[b]), delta.clone()),
            ])
        }
        _ => None,
    }
}

/// The first invertible rule applicable to `seq`, in a fixed order:
/// axioms, then non-branching rules, then branching ones; within a rule,
/// formulas by node id.
pub(crate) fn next_invertible(seq: &Sequent) -> Option<(Rule, Formula)> {
    let gamma = &seq.antecedent;
    let delta = &seq.succedent;
    if let Some(b) = gamma.iter().find(|f| f.is_bottom()) {
        return Some((Rule::BottomL, b.clone()));
    }
    if let Some(shared) = gamma.iter().find(|f| seq.in_succedent(f)) {
        return Some((Rule::Init, shared.clone()));
    }
    for f in gamma {
        let rule = match f.kind() {
            Kind::And(..) => Rule::AndL,
            Kind::Implies(a, _) if seq.in_antecedent(a) => Rule::ImpLKnown,
            Kind::Implies(a, _) => match a.kind() {
                Kind::Bottom => Rule::ImpLBottom,
                Kind::And(..) => Rule::ImpLAnd,
                Kind::Or(..) => Rule::ImpLOr,
                _ => continue,
            },
            _ => continue,
        };
        return Some((rule, f.clone()));
    }
    for f in delta {
        let rule = match f.kind() {
            Kind::Or(..) => Rule::OrR,
            Kind::Bottom => Rule::BottomR,
            Kind::Implies(a, _) if seq.in_antecedent(a) => Rule::ImpRKnown,
            Kind::Implies(..) if delta.len() == 1 => Rule::ImpR,
            _ => continue,
        };
        return Some((rule, f.clone()));
    }
    if let Some(f) = gamma.iter().find(|f| matches!(f.kind(), Kind::Or(..))) {
        return Some((Rule::OrL, f.clone()));
    }
    if let Some(f) = delta.iter().find(|f| matches!(f.kind(), Kind::And(..))) {
        return Some((Rule::AndR, f.clone()));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn rules_check_applicability() {
        let seq = Sequent::new(vec![f("p & q")], vec![f("q")]);
        assert!(apply(Rule::AndL, &f("p & q"), &seq).is_some());
        assert!(apply(Rule::OrL, &f("p & q"), &seq).is_none());
        assert!(apply(Rule::Init, &f("q"), &seq).is_none());
        assert!(apply(Rule::AndL, &f("r & q"), &seq).is_none());
    }

    #[test]
    fn implication_left_premises() {
        let seq = Sequent::new(vec![f("(p -> q) -> r")], vec![f("s")]);
        let prem = apply(Rule::ImpLImp, &f("(p -> q) -> r"), &seq).unwrap();
        assert_eq!(
            prem[0],
            Sequent::new(vec![f("q -> r"), f("p")], vec![f("q")])
        );
        assert_eq!(prem[1], Sequent::new(vec![f("r")], vec![f("s")]));
    }

    #[test]
    fn invertible_order_prefers_axioms() {
        let seq = Sequent::new(vec![f("p & q"), f("r")], vec![f("r")]);
        assert_eq!(next_invertible(&seq), Some((Rule::Init, f("r"))));
        let seq = Sequent::new(vec![f("p")], vec![f("q -> r"), f("s")]);
        assert_eq!(next_invertible(&seq), None);
    }
}

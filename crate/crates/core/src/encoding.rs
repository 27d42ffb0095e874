//! Formula families encoding configurations and instructions of a Minsky
//! machine in the three variables `p`, `q`, `r`.
//!
//! Every family is built bottom-up over its index, so shared subformulas
//! are shared nodes and the DAG stays linear in the index even though the
//! tree expansion is exponential. Chains of `∧`/`∨` nest to the right.

use thiserror::Error;

use crate::formula::{substitute, Formula, Substitution};
use crate::minsky::{Instruction, MinskyMachine, State};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error("{family}: index {index} is below the minimum {min}")]
    IndexTooSmall {
        family: &'static str,
        index: i64,
        min: i64,
    },
    #[error("chain tag {0} is not one of 0, 1, 2")]
    BadChain(u8),
    #[error("key-formula tag {0} is not 1 or 2")]
    BadKeyTag(u8),
}

fn at_least(family: &'static str, index: i64, min: i64) -> Result<(), EncodingError> {
    if index < min {
        Err(EncodingError::IndexTooSmall { family, index, min })
    } else {
        Ok(())
    }
}

fn imp(a: &Formula, b: &Formula) -> Formula {
    Formula::implies(a, b)
}

fn and(a: &Formula, b: &Formula) -> Formula {
    Formula::and(a, b)
}

fn or3(a: &Formula, b: &Formula, c: &Formula) -> Formula {
    Formula::or_all([a, b, c])
}

pub fn p() -> Formula {
    Formula::var("p")
}

pub fn q() -> Formula {
    Formula::var("q")
}

pub fn r() -> Formula {
    Formula::var("r")
}

/// `(S_i[x], T_i[x])` for `i = -2 ..= upto`, stored at position `i + 2`.
fn st_chain(x: &Formula, upto: i64) -> Vec<(Formula, Formula)> {
    let s2 = Formula::not(x);
    let t2 = Formula::not(&s2);
    let mut out = vec![(s2, t2)];
    if upto >= -1 {
        let (s2, t2) = out[0].clone();
        let s1 = imp(&t2, x);
        let t1 = imp(&s1, &Formula::or(&s2, &t2));
        out.push((s1, t1));
    }
    for i in 0..=upto {
        let k = (i + 2) as usize;
        let (s_prev, t_prev) = out[k - 1].clone();
        let t_prev2 = out[k - 2].1.clone();
        let s = imp(&t_prev, &Formula::or(&s_prev, &t_prev2));
        let t = imp(&s, &Formula::or(&s_prev, &t_prev));
        out.push((s, t));
    }
    out
}

pub fn s_formula(i: i64, x: &Formula) -> Result<Formula, EncodingError> {
    at_least("S", i, -2)?;
    Ok(st_chain(x, i)[(i + 2) as usize].0.clone())
}

pub fn t_formula(i: i64, x: &Formula) -> Result<Formula, EncodingError> {
    at_least("T", i, -2)?;
    Ok(st_chain(x, i)[(i + 2) as usize].1.clone())
}

/// An index into the `A^j`/`B^j` chains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChainIndex {
    pub i: i64,
    pub j: u8,
}

impl ChainIndex {
    pub fn new(i: i64, j: u8) -> Result<Self, EncodingError> {
        at_least("A/B", i, -5)?;
        if j > 2 {
            return Err(EncodingError::BadChain(j));
        }
        Ok(ChainIndex { i, j })
    }
}

/// `(A_i^j, B_i^j)` for `i = -5 ..= upto`, stored at position `i + 5`.
pub fn chain(j: u8, upto: i64) -> Result<Vec<(Formula, Formula)>, EncodingError> {
    ChainIndex::new(upto.max(-5), j)?;
    let upto = upto.max(-5);
    match j {
        0 => Ok(st_chain(&r(), upto + 3)),
        _ => Ok(side_chain(j, upto)),
    }
}

fn side_chain(j: u8, upto: i64) -> Vec<(Formula, Formula)> {
    let x = if j == 1 { p() } else { q() };
    let (c_own, c_other) = if j == 1 { (c1(), c2()) } else { (c2(), c1()) };
    let mut out = st_chain(&x, upto.min(-3) + 3);
    let at = |out: &Vec<(Formula, Formula)>, i: i64| out[(i + 5) as usize].clone();
    if upto >= -2 {
        let (a3, b3) = at(&out, -3);
        let (_, b4) = at(&out, -4);
        out.push((
            imp(&b3, &Formula::or(&a3, &b4)),
            imp(&a3, &Formula::or(&c_own, &b3)),
        ));
    }
    if upto >= -1 {
        let (a2, b2) = at(&out, -2);
        let (a3, b3) = at(&out, -3);
        out.push((
            imp(&b2, &Formula::or(&a2, &b3)),
            imp(&a2, &Formula::or(&a3, &b2)),
        ));
    }
    // i ≥ 0: the guard is the other chain's constant, the escape this one's.
    for i in 0..=upto {
        let (a1, b1) = at(&out, i - 1);
        let (a2, b2) = at(&out, i - 2);
        let a = imp(&and(&c_other, &b1), &or3(&c_own, &a1, &b2));
        let b = imp(&and(&c_other, &a1), &or3(&c_own, &a2, &b1));
        out.push((a, b));
    }
    out
}

pub fn a_formula(i: i64, j: u8) -> Result<Formula, EncodingError> {
    ChainIndex::new(i, j)?;
    Ok(chain(j, i)?[(i + 5) as usize].0.clone())
}

pub fn b_formula(i: i64, j: u8) -> Result<Formula, EncodingError> {
    ChainIndex::new(i, j)?;
    Ok(chain(j, i)?[(i + 5) as usize].1.clone())
}

pub fn c1() -> Formula {
    st_chain(&r(), 3)[5].0.clone()
}

pub fn c2() -> Formula {
    st_chain(&r(), 3)[5].1.clone()
}

fn pair(chain: &[(Formula, Formula)], i: i64) -> (Formula, Formula) {
    chain[(i + 5) as usize].clone()
}

/// The code `E_{s,m,n}` of a configuration.
pub fn e_code(s: u32, m: u32, n: u32) -> Formula {
    let (s, m, n) = (s as i64, m as i64, n as i64);
    let c0 = chain(0, 3 * s + 2).expect("valid chain");
    let c1 = chain(1, m + 1).expect("valid chain");
    let c2 = chain(2, n + 1).expect("valid chain");
    let (a0h, b0h) = pair(&c0, 3 * s + 2);
    let (a0l, b0l) = pair(&c0, 3 * s + 1);
    let (a1h, b1h) = pair(&c1, m + 1);
    let (a1l, b1l) = pair(&c1, m);
    let (a2h, b2h) = pair(&c2, n + 1);
    let (a2l, b2l) = pair(&c2, n);
    imp(
        &Formula::and_all([&a0h, &b0h, &a1h, &b1h, &a2h, &b2h]),
        &Formula::or_all([&a0l, &b0l, &a1l, &b1l, &a2l, &b2l]),
    )
}

/// `(F_k, G_k)` for `k = 0 ..= upto` over the given `x`, `y`.
fn fg_chain(upto: u32, x: &Formula, y: &Formula) -> Vec<(Formula, Formula)> {
    let (p, q) = (p(), q());
    let mut out = vec![(p.clone(), q.clone())];
    if upto >= 1 {
        out.push((
            imp(&and(y, &q), &Formula::or(x, &p)),
            imp(&and(y, &p), &Formula::or(x, &q)),
        ));
    }
    for k in 2..=upto as usize {
        let (f1, g1) = out[k - 1].clone();
        let (f2, g2) = out[k - 2].clone();
        let f = imp(&and(y, &g1), &or3(x, &f1, &g2));
        let g = imp(&and(y, &f1), &or3(x, &g1, &f2));
        out.push((f, g));
    }
    out
}

pub fn f_formula(k: u32) -> Formula {
    fg_chain(k, &Formula::var("x"), &Formula::var("y"))[k as usize]
        .0
        .clone()
}

pub fn g_formula(k: u32) -> Formula {
    fg_chain(k, &Formula::var("x"), &Formula::var("y"))[k as usize]
        .1
        .clone()
}

fn key_constants(m: u8) -> Result<(Formula, Formula), EncodingError> {
    match m {
        1 => Ok((c1(), c2())),
        2 => Ok((c2(), c1())),
        _ => Err(EncodingError::BadKeyTag(m)),
    }
}

/// `F_k^m`: `F_k` with `x, y` replaced by `C_1, C_2` (m = 1) or
/// `C_2, C_1` (m = 2).
pub fn f_m(k: u32, m: u8) -> Result<Formula, EncodingError> {
    let (x, y) = key_constants(m)?;
    Ok(fg_chain(k, &x, &y)[k as usize].0.clone())
}

pub fn g_m(k: u32, m: u8) -> Result<Formula, EncodingError> {
    let (x, y) = key_constants(m)?;
    Ok(fg_chain(k, &x, &y)[k as usize].1.clone())
}

/// `P_{i,j}`. The second conjunct is indexed by `j`.
pub fn p_formula(i: i64, j: i64) -> Result<Formula, EncodingError> {
    at_least("P", i, -1)?;
    at_least("P", j, -1)?;
    let ch1 = chain(1, i)?;
    let ch2 = chain(2, j)?;
    let left = imp(&c2(), &or3(&c1(), &pair(&ch1, i).0, &pair(&ch1, i - 1).1));
    let right = imp(&c1(), &or3(&c2(), &pair(&ch2, j).0, &pair(&ch2, j - 1).1));
    Ok(and(&left, &right))
}

/// `Q_{i,j}`. The second conjunct is indexed by `j`.
pub fn q_formula(i: i64, j: i64) -> Result<Formula, EncodingError> {
    at_least("Q", i, -1)?;
    at_least("Q", j, -1)?;
    let ch1 = chain(1, i)?;
    let ch2 = chain(2, j)?;
    let left = imp(&c2(), &or3(&c1(), &pair(&ch1, i - 1).0, &pair(&ch1, i).1));
    let right = imp(&c1(), &or3(&c2(), &pair(&ch2, j - 1).0, &pair(&ch2, j).1));
    Ok(and(&left, &right))
}

/// `{p ↦ P_{i,j}, q ↦ Q_{i,j}}`.
pub fn pq_substitution(i: i64, j: i64) -> Result<Substitution, EncodingError> {
    Ok(Substitution::new()
        .with("p", p_formula(i, j)?)
        .with("q", q_formula(i, j)?))
}

fn state_pairs(s: u32) -> ((Formula, Formula), (Formula, Formula)) {
    let s = s as i64;
    let c0 = chain(0, 3 * s + 2).expect("valid chain");
    (pair(&c0, 3 * s + 2), pair(&c0, 3 * s + 1))
}

/// `Ê_{s,i,j}` for `i, j ≥ 1`.
pub fn e_hat(s: u32, i: u32, j: u32) -> Result<Formula, EncodingError> {
    at_least("Ehat", i as i64, 1)?;
    at_least("Ehat", j as i64, 1)?;
    let ((ah, bh), (al, bl)) = state_pairs(s);
    let k1 = fg_chain(i + 1, &c1(), &c2());
    let k2 = fg_chain(j + 1, &c2(), &c1());
    let (f1h, g1h) = k1[i as usize + 1].clone();
    let (f1l, g1l) = k1[i as usize].clone();
    let (f2h, g2h) = k2[j as usize + 1].clone();
    let (f2l, g2l) = k2[j as usize].clone();
    Ok(imp(
        &Formula::and_all([&ah, &bh, &f1h, &g1h, &f2h, &g2h]),
        &Formula::or_all([&al, &bl, &f1l, &g1l, &f2l, &g2l]),
    ))
}

/// `Ê_{s,0,*}`.
pub fn e_hat_0star(s: u32) -> Formula {
    let ((ah, bh), (al, bl)) = state_pairs(s);
    let ch = chain(1, 1).expect("valid chain");
    let (a1, b1) = pair(&ch, 1);
    let (a0, b0) = pair(&ch, 0);
    imp(
        &Formula::and_all([&ah, &bh, &a1, &b1]),
        &Formula::or_all([&al, &bl, &a0, &b0, &q()]),
    )
}

/// `Ê_{s,*,0}`.
pub fn e_hat_star0(s: u32) -> Formula {
    let ((ah, bh), (al, bl)) = state_pairs(s);
    let ch = chain(2, 1).expect("valid chain");
    let (a1, b1) = pair(&ch, 1);
    let (a0, b0) = pair(&ch, 0);
    imp(
        &Formula::and_all([&ah, &bh, &a1, &b1]),
        &Formula::or_all([&al, &bl, &p(), &a0, &b0]),
    )
}

/// `Ê_{s,0,0}`, which is `E_{s,0,0}`.
pub fn e_hat_00(s: u32) -> Formula {
    e_code(s, 0, 0)
}

/// An index of `Ê` that may be the placeholder `*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexOrStar {
    Index(u32),
    Star,
}

/// The lower bound on a counter that `Ê` at index `x` forces.
pub fn phi(x: IndexOrStar) -> u32 {
    match x {
        IndexOrStar::Index(x) => x.saturating_sub(1),
        IndexOrStar::Star => 0,
    }
}

/// The general `Ê_{s,x,y}`, dispatching to the four displays. Mixed
/// `0`/`*` combinations other than those four are rejected.
pub fn e_hat_general(s: u32, x: IndexOrStar, y: IndexOrStar) -> Result<Formula, EncodingError> {
    use IndexOrStar::*;
    match (x, y) {
        (Index(0), Index(0)) => Ok(e_hat_00(s)),
        (Index(0), Star) => Ok(e_hat_0star(s)),
        (Star, Index(0)) => Ok(e_hat_star0(s)),
        (Index(i), Index(j)) => e_hat(s, i, j),
        _ => Err(EncodingError::IndexTooSmall {
            family: "Ehat",
            index: 0,
            min: 1,
        }),
    }
}

pub fn ax_instruction(s: State, ins: Instruction) -> Formula {
    let eh = |s: u32, i: u32, j: u32| e_hat(s, i, j).expect("indices are positive");
    match ins {
        Instruction::Inc1(t) => imp(&eh(t, 2, 1), &eh(s, 1, 1)),
        Instruction::Inc2(t) => imp(&eh(t, 1, 2), &eh(s, 1, 1)),
        Instruction::Dec1(t, u) => and(
            &imp(&eh(t, 1, 1), &eh(s, 2, 1)),
            &imp(&e_hat_0star(u), &e_hat_0star(s)),
        ),
        Instruction::Dec2(t, u) => and(
            &imp(&eh(t, 1, 1), &eh(s, 1, 2)),
            &imp(&e_hat_star0(u), &e_hat_star0(s)),
        ),
    }
}

/// Conjunction of the instruction axioms by ascending source state; `⊤`
/// for the empty machine.
pub fn ax_machine(machine: &MinskyMachine) -> Formula {
    let parts: Vec<Formula> = machine
        .instructions()
        .map(|(s, ins)| ax_instruction(s, ins))
        .collect();
    Formula::and_all(&parts)
}

/// The right-hand side of the equivalence for `E_{s,m,n}` in the case
/// `1 ≤ i ≤ m+1`, `1 ≤ j ≤ n+1`: `Ê_{s,i,j}[P_{m-i,n-j}, Q_{m-i,n-j}]`.
pub fn e_hat_instance(s: u32, m: u32, n: u32, i: u32, j: u32) -> Result<Formula, EncodingError> {
    let sigma = pq_substitution(m as i64 - i as i64, n as i64 - j as i64)?;
    Ok(substitute(&e_hat(s, i, j)?, &sigma))
}

/// `A_{n+1}^2 ∧ B_{n+1}^2 → Ê_{s,0,*}[p, A_n^2 ∨ B_n^2]`.
pub fn e_hat_0star_instance(s: u32, n: u32) -> Formula {
    let ch = chain(2, n as i64 + 1).expect("valid chain");
    let (ah, bh) = pair(&ch, n as i64 + 1);
    let (al, bl) = pair(&ch, n as i64);
    let sigma = Substitution::new().with("q", Formula::or(&al, &bl));
    imp(&and(&ah, &bh), &substitute(&e_hat_0star(s), &sigma))
}

/// `A_{m+1}^1 ∧ B_{m+1}^1 → Ê_{s,*,0}[A_m^1 ∨ B_m^1, q]`.
pub fn e_hat_star0_instance(s: u32, m: u32) -> Formula {
    let ch = chain(1, m as i64 + 1).expect("valid chain");
    let (ah, bh) = pair(&ch, m as i64 + 1);
    let (al, bl) = pair(&ch, m as i64);
    let sigma = Substitution::new().with("p", Formula::or(&al, &bl));
    imp(&and(&ah, &bh), &substitute(&e_hat_star0(s), &sigma))
}

//! Finite truncations of the Kripke model that refutes every code of a
//! configuration reachable from the initial one.
//!
//! Points are `a_i^j`, `b_i^j` for `-5 ≤ i ≤ imax`, `j ∈ {0,1,2}`, and one
//! `e_α` per explored class. Base pairs `(x, y)` read `x ≤ y`; they always
//! lead to smaller chain indices, so dropping the points with `i > imax`
//! leaves an upward closed part of the infinite model and forcing at the
//! retained points is unchanged. Indices within `margin` of `imax` are
//! still refused by the refutation queries.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::encoding::{a_formula, b_formula, c1, c2, e_code};
use crate::formula::Formula;
use crate::kripke::{refuters, KripkeFrame, KripkeModel, Point, Valuation};
use crate::minsky::{
    classes, reach_graph, ClassQuotient, ConfigGraph, Configuration, MinskyMachine,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointId {
    A(i64, u8),
    B(i64, u8),
    /// The point of the class whose representative this is.
    E(Configuration),
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointId::A(i, j) => write!(f, "a({i},{j})"),
            PointId::B(i, j) => write!(f, "b({i},{j})"),
            PointId::E(c) => write!(f, "e({},{},{})", c.s, c.m, c.n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad point id `{0}`; expected a(i,j), b(i,j) or e(s,m,n)")]
pub struct PointIdError(pub String);

impl FromStr for PointId {
    type Err = PointIdError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || PointIdError(text.to_owned());
        let t = text.trim();
        let (head, rest) = t.split_at(t.find('(').ok_or_else(bad)?);
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        match (head, parts.as_slice()) {
            ("a" | "b", [i, j]) => {
                let i: i64 = i.parse().map_err(|_| bad())?;
                let j: u8 = j.parse().map_err(|_| bad())?;
                if i < -5 || j > 2 {
                    return Err(bad());
                }
                Ok(if head == "a" {
                    PointId::A(i, j)
                } else {
                    PointId::B(i, j)
                })
            }
            ("e", [s, m, n]) => {
                let num = |x: &str| x.parse::<u32>().map_err(|_| bad());
                Ok(PointId::E(Configuration::new(num(s)?, num(m)?, num(n)?)))
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruncationParams {
    pub imax: i64,
    pub step_bound: usize,
    pub counter_bound: u32,
    pub margin: i64,
}

impl Default for TruncationParams {
    fn default() -> Self {
        TruncationParams {
            imax: 20,
            step_bound: 6,
            counter_bound: 8,
            margin: 2,
        }
    }
}

impl TruncationParams {
    /// Largest index whose refutation instances are checked.
    pub fn zone(&self) -> i64 {
        self.imax - self.margin
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PaperModelError {
    #[error("margin {0} is below 2")]
    MarginTooSmall(i64),
    #[error("imax {imax} is too small: configuration {config} needs at least {needed}")]
    ImaxTooSmall {
        imax: i64,
        needed: i64,
        config: Configuration,
    },
    #[error("unknown point {0}")]
    UnknownPoint(PointId),
    #[error("index {index} lies in the truncation margin (zone ends at {zone})")]
    InMargin { index: i64, zone: i64 },
    #[error("configuration {0} is not in the explored graph")]
    NotExplored(Configuration),
    #[error("refuters of {member} are not the downset of {point}")]
    Mismatch { member: Member, point: PointId },
    #[error("chain tag {0} is not one of 0, 1, 2")]
    BadChain(u8),
}

/// A formula of the encoding whose refuting point is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Member {
    A(i64, u8),
    B(i64, u8),
    C1,
    C2,
    E(Configuration),
}

impl fmt::Display for Member {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Member::A(i, j) => write!(f, "A({i},{j})"),
            Member::B(i, j) => write!(f, "B({i},{j})"),
            Member::C1 => write!(f, "C1"),
            Member::C2 => write!(f, "C2"),
            Member::E(c) => write!(f, "E{c}"),
        }
    }
}

impl Member {
    pub fn formula(&self) -> Result<Formula, PaperModelError> {
        let chain_err = |j| PaperModelError::BadChain(j);
        Ok(match *self {
            Member::A(i, j) => a_formula(i, j).map_err(|_| chain_err(j))?,
            Member::B(i, j) => b_formula(i, j).map_err(|_| chain_err(j))?,
            Member::C1 => c1(),
            Member::C2 => c2(),
            Member::E(c) => e_code(c.s, c.m, c.n),
        })
    }
}

/// A built truncation together with the exploration it came from.
#[derive(Clone, Debug)]
pub struct PaperModel {
    pub model: KripkeModel,
    pub params: TruncationParams,
    pub init: Configuration,
    pub graph: ConfigGraph,
    pub quotient: ClassQuotient,
    points: Vec<PointId>,
    index: HashMap<PointId, Point>,
}

fn chain_points(imax: i64) -> Vec<PointId> {
    let mut out = Vec::new();
    for j in 0..3u8 {
        for i in -5..=imax {
            out.push(PointId::A(i, j));
            out.push(PointId::B(i, j));
        }
    }
    out
}

/// The base pairs among chain points, as `(lower, upper)`.
fn chain_pairs(imax: i64) -> Vec<(PointId, PointId)> {
    use PointId::{A, B};
    let mut pairs = Vec::new();
    for j in 0..3u8 {
        pairs.extend([
            (A(-4, j), A(-5, j)),
            (B(-4, j), A(-5, j)),
            (B(-4, j), B(-5, j)),
            (A(-3, j), A(-4, j)),
            (A(-3, j), B(-5, j)),
            (B(-3, j), A(-4, j)),
            (B(-3, j), B(-4, j)),
        ]);
        for i in -2..=imax {
            if j == 0 {
                pairs.extend([
                    (A(i, 0), A(i - 1, 0)),
                    (A(i, 0), B(i - 2, 0)),
                    (B(i, 0), A(i - 1, 0)),
                    (B(i, 0), B(i - 1, 0)),
                ]);
            } else if i == -2 {
                let c = if j == 1 { A(0, 0) } else { B(0, 0) };
                pairs.extend([
                    (A(-2, j), A(-3, j)),
                    (A(-2, j), B(-4, j)),
                    (B(-2, j), c),
                    (B(-2, j), B(-3, j)),
                ]);
            } else {
                pairs.extend([
                    (A(i, j), A(i - 1, j)),
                    (A(i, j), B(i - 2, j)),
                    (B(i, j), A(i - 2, j)),
                    (B(i, j), B(i - 1, j)),
                ]);
            }
        }
    }
    pairs
}

pub fn build(
    machine: &MinskyMachine,
    init: Configuration,
    params: TruncationParams,
) -> Result<PaperModel, PaperModelError> {
    if params.margin < 2 {
        return Err(PaperModelError::MarginTooSmall(params.margin));
    }
    let graph = reach_graph(machine, init, params.step_bound, params.counter_bound);
    for &c in &graph.vertices {
        let needed = (3 * c.s as i64 + 2).max(c.m as i64 + 1).max(c.n as i64 + 1) + params.margin;
        if params.imax < needed {
            return Err(PaperModelError::ImaxTooSmall {
                imax: params.imax,
                needed,
                config: c,
            });
        }
    }
    let quotient = classes(&graph);
    build_from(graph, quotient, init, params, chain_pairs(params.imax))
}

fn build_from(
    graph: ConfigGraph,
    quotient: ClassQuotient,
    init: Configuration,
    params: TruncationParams,
    mut pairs: Vec<(PointId, PointId)>,
) -> Result<PaperModel, PaperModelError> {
    use PointId::{A, B, E};
    let mut points = chain_points(params.imax);
    for k in 0..quotient.len() {
        points.push(E(quotient.representative(k)));
    }
    let e_of =
        |c: Configuration| E(quotient.representative(quotient.class_of(c).expect("explored")));
    for &c in &graph.vertices {
        let (s, m, n) = (c.s as i64, c.m as i64, c.n as i64);
        let e = e_of(c);
        pairs.extend([
            (e, A(3 * s + 1, 0)),
            (e, B(3 * s + 1, 0)),
            (e, A(m, 1)),
            (e, B(m, 1)),
            (e, A(n, 2)),
            (e, B(n, 2)),
        ]);
    }
    for a in 0..quotient.len() {
        for b in quotient.reach[a].ones() {
            if a != b {
                pairs.push((E(quotient.representative(a)), E(quotient.representative(b))));
            }
        }
    }
    let index: HashMap<PointId, Point> = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let base: Vec<(Point, Point)> = pairs
        .iter()
        .filter_map(|(x, y)| Some((*index.get(x)?, *index.get(y)?)))
        .collect();
    let labels = points.iter().map(|p| p.to_string()).collect();
    let frame =
        KripkeFrame::closure(labels, &base).expect("class order is acyclic after the quotient");

    let mut val = Valuation::new();
    for (j, var) in [(0u8, "r"), (1, "p"), (2, "q")] {
        let mut falsified = frame.downset(index[&A(-4, j)]).clone();
        falsified.union_with(frame.downset(index[&B(-5, j)]));
        let mut holds = frame.all_points();
        holds.difference_with(&falsified);
        val.set(var, holds);
    }
    let model = KripkeModel::new(frame, val).expect("complement of a downset is an upset");
    Ok(PaperModel {
        model,
        params,
        init,
        graph,
        quotient,
        points,
        index,
    })
}

impl PaperModel {
    pub fn point(&self, id: PointId) -> Result<Point, PaperModelError> {
        self.index
            .get(&id)
            .copied()
            .ok_or(PaperModelError::UnknownPoint(id))
    }

    pub fn id(&self, w: Point) -> PointId {
        self.points[w]
    }

    pub fn ids(&self) -> &[PointId] {
        &self.points
    }

    /// The point of the class of `c`, if `c` was explored.
    pub fn e_point(&self, c: Configuration) -> Option<PointId> {
        let k = self.quotient.class_of(c)?;
        Some(PointId::E(self.quotient.representative(k)))
    }

    pub fn downset(&self, id: PointId) -> Result<&FixedBitSet, PaperModelError> {
        Ok(self.model.frame().downset(self.point(id)?))
    }

    /// `w ≤ v`.
    pub fn is_below(&self, w: PointId, v: PointId) -> Result<bool, PaperModelError> {
        Ok(self.model.frame().le(self.point(w)?, self.point(v)?))
    }

    /// Where the construction places the unique maximal refuting point of
    /// `member`, without checking it.
    pub fn expected_point(&self, member: Member) -> Result<PointId, PaperModelError> {
        let zone = self.params.zone();
        let check = |index: i64| {
            if index > zone {
                Err(PaperModelError::InMargin { index, zone })
            } else {
                Ok(())
            }
        };
        match member {
            Member::A(_, j) | Member::B(_, j) if j > 2 => Err(PaperModelError::BadChain(j)),
            Member::A(i, j) => check(i).map(|_| PointId::A(i, j)),
            Member::B(i, j) => check(i).map(|_| PointId::B(i, j)),
            Member::C1 => check(0).map(|_| PointId::A(0, 0)),
            Member::C2 => check(0).map(|_| PointId::B(0, 0)),
            Member::E(c) => {
                check(3 * c.s as i64 + 2)?;
                check(c.m as i64 + 1)?;
                check(c.n as i64 + 1)?;
                self.e_point(c).ok_or(PaperModelError::NotExplored(c))
            }
        }
    }

    /// The unique maximal point refuting `member`, after checking that the
    /// refuters are exactly its downset.
    pub fn refutation_point(&self, member: Member) -> Result<PointId, PaperModelError> {
        let point = self.expected_point(member)?;
        let refuting = refuters(&self.model, &member.formula()?);
        if &refuting != self.downset(point)? {
            return Err(PaperModelError::Mismatch { member, point });
        }
        Ok(point)
    }

    /// The same construction with one extra base pair; used to check that
    /// the verifiers notice a corrupted frame.
    pub fn with_extra_pair(
        &self,
        lower: PointId,
        upper: PointId,
    ) -> Result<PaperModel, PaperModelError> {
        let mut pairs = chain_pairs(self.params.imax);
        pairs.push((lower, upper));
        self.point(lower)?;
        self.point(upper)?;
        build_from(
            self.graph.clone(),
            self.quotient.clone(),
            self.init,
            self.params,
            pairs,
        )
    }
}

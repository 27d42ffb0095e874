//! Verification campaigns: each property of the construction becomes a grid
//! of independent instances with a recorded verdict.
//!
//! Instances run in parallel; reports keep the order in which the
//! instances were generated.

use std::fmt::{self, Write as _};
use std::time::Instant;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::encoding::{
    a_formula, ax_instruction, b_formula, e_code, e_hat_00, e_hat_0star_instance, e_hat_general,
    e_hat_instance, e_hat_star0_instance, f_m, g_m, pq_substitution, IndexOrStar,
};
use crate::formula::{substitute, Formula, Substitution};
use crate::ipc::{self, ProverVerdict, DEFAULT_PROVER_BUDGET};
use crate::kripke::{
    countervaluation, force, refuters, CounterValuation, Evaluator, DEFAULT_SEARCH_BUDGET,
};
use crate::minsky::{parse_machine, reach_graph, Configuration, Instruction, MinskyMachine, State};
use crate::paper_model::{build, Member, PaperModel, PointId, TruncationParams};

/// Overrides every default budget when set.
pub const BUDGET_ENV: &str = "SUPINT_BUDGET";

fn env_budget() -> Option<u64> {
    std::env::var(BUDGET_ENV).ok()?.trim().parse().ok()
}

pub fn prover_budget() -> u64 {
    env_budget().unwrap_or(DEFAULT_PROVER_BUDGET)
}

pub fn search_budget() -> u64 {
    env_budget().unwrap_or(DEFAULT_SEARCH_BUDGET)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    Unknown,
    /// Not decidable from the explored part of the machine.
    Inconclusive,
    /// The instance lies outside the checked zone.
    Refused,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Unknown => "unknown",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Refused => "refused",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Entry {
    pub instance: String,
    pub verdict: Verdict,
    pub detail: String,
    pub millis: u64,
    /// Set for failures.
    pub reproducer: Option<String>,
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub tag: String,
    /// The instance grid, e.g. the machine and index ranges.
    pub grid: String,
    pub entries: Vec<Entry>,
}

impl VerificationReport {
    pub fn count(&self, verdict: Verdict) -> usize {
        self.entries.iter().filter(|e| e.verdict == verdict).count()
    }

    pub fn all_pass(&self) -> bool {
        self.entries
            .iter()
            .all(|e| matches!(e.verdict, Verdict::Pass | Verdict::Refused))
    }

    pub fn get(&self, instance: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.instance == instance)
    }

    /// 0 when everything passed, 1 on any failure, 3 when something is
    /// unknown or inconclusive but nothing failed.
    pub fn exit_code(&self) -> i32 {
        if self.count(Verdict::Fail) > 0 {
            1
        } else if self.count(Verdict::Unknown) + self.count(Verdict::Inconclusive) > 0 {
            3
        } else {
            0
        }
    }

    /// One tab-separated line per instance: tag, instance, verdict,
    /// millis, detail, reproducer.
    pub fn lines(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                self.tag,
                e.instance,
                e.verdict,
                e.millis,
                e.detail,
                e.reproducer.as_deref().unwrap_or("")
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let total: u64 = self.entries.iter().map(|e| e.millis).sum();
        format!(
            "{} [{}]: {} instances, {} pass, {} fail, {} unknown, {} inconclusive, {} refused, {} ms",
            self.tag,
            self.grid,
            self.entries.len(),
            self.count(Verdict::Pass),
            self.count(Verdict::Fail),
            self.count(Verdict::Unknown),
            self.count(Verdict::Inconclusive),
            self.count(Verdict::Refused),
            total
        )
    }
}

/// A machine under verification and the CLI arguments that select it.
#[derive(Clone, Debug)]
pub struct Subject {
    pub machine: MinskyMachine,
    pub init: Configuration,
    pub args: String,
}

pub const FIXTURES: &[(&str, &str, Configuration)] = &[
    (
        "cycle",
        "0 INC1 1\n1 DEC1 0 0\n",
        Configuration { s: 0, m: 0, n: 0 },
    ),
    (
        "transfer",
        "0 DEC1 1 2\n1 INC2 0\n",
        Configuration { s: 0, m: 2, n: 0 },
    ),
    (
        "chain",
        "0 INC1 1\n1 INC2 2\n2 DEC1 3 3\n",
        Configuration { s: 0, m: 0, n: 0 },
    ),
];

impl Subject {
    pub fn fixture(name: &str) -> Option<Subject> {
        let (_, text, init) = FIXTURES.iter().find(|(n, _, _)| *n == name)?;
        Some(Subject {
            machine: parse_machine(text).expect("fixture parses"),
            init: *init,
            args: format!("--fixture {name}"),
        })
    }

    pub fn fixtures() -> Vec<Subject> {
        FIXTURES
            .iter()
            .map(|(n, _, _)| Subject::fixture(n).expect("listed"))
            .collect()
    }
}

fn params_args(p: &TruncationParams) -> String {
    format!(
        "--imax {} --steps {} --counters {} --margin {}",
        p.imax, p.step_bound, p.counter_bound, p.margin
    )
}

fn config_arg(c: Configuration) -> String {
    format!("{},{},{}", c.s, c.m, c.n)
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

impl Outcome {
    fn new(verdict: Verdict, detail: impl Into<String>) -> Self {
        Outcome {
            verdict,
            detail: detail.into(),
        }
    }
}

type Task<'a> = (String, Box<dyn Fn() -> Outcome + Send + Sync + 'a>);

/// Settings shared by all verifiers.
#[derive(Clone, Debug, Default)]
pub struct Campaign {
    /// Overrides the prover or search budget.
    pub budget: Option<u64>,
    /// Runs only the instance with this key.
    pub only: Option<String>,
}

impl Campaign {
    fn prover_budget(&self) -> u64 {
        self.budget.unwrap_or_else(prover_budget)
    }

    fn search_budget(&self) -> u64 {
        self.budget.unwrap_or_else(search_budget)
    }

    fn run(
        &self,
        tag: &str,
        grid: String,
        command: String,
        tasks: Vec<Task<'_>>,
    ) -> VerificationReport {
        let tasks: Vec<Task<'_>> = tasks
            .into_iter()
            .filter(|(key, _)| self.only.as_ref().is_none_or(|o| o == key))
            .collect();
        let budget = self
            .budget
            .map(|b| format!(" --budget {b}"))
            .unwrap_or_default();
        let entries = tasks
            .par_iter()
            .map(|(key, task)| {
                let start = Instant::now();
                let out = task();
                let millis = start.elapsed().as_millis() as u64;
                let reproducer = (out.verdict == Verdict::Fail)
                    .then(|| format!("supint verify {command}{budget} --only '{key}'"));
                Entry {
                    instance: key.clone(),
                    verdict: out.verdict,
                    detail: out.detail,
                    millis,
                    reproducer,
                }
            })
            .collect();
        VerificationReport {
            tag: tag.to_owned(),
            grid,
            entries,
        }
    }

    /// Refuters of every `A_i^j`, `B_i^j` and of the code of every
    /// explored configuration against the predicted downsets.
    pub fn semantic(&self, subject: &Subject, params: TruncationParams) -> VerificationReport {
        match build(&subject.machine, subject.init, params) {
            Ok(pm) => self.semantic_on(&pm, subject),
            Err(e) => self.build_failure("semantic", subject, &params, e),
        }
    }

    /// [`Campaign::semantic`] on an already built model.
    pub fn semantic_on(&self, pm: &PaperModel, subject: &Subject) -> VerificationReport {
        let params = pm.params;
        let mut members = Vec::new();
        for j in 0..3u8 {
            for i in -4..=params.imax {
                members.push(Member::A(i, j));
                members.push(Member::B(i, j));
            }
        }
        members.extend(pm.graph.vertices.iter().map(|&c| Member::E(c)));
        let tasks = members
            .into_iter()
            .map(|member| -> Task<'_> {
                (
                    member.to_string(),
                    Box::new(move || check_member(pm, member)),
                )
            })
            .collect();
        let grid = format!(
            "{} init {} i in -4..={}",
            subject.args, pm.init, params.imax
        );
        let command = format!("semantic {} {}", subject.args, params_args(&params));
        self.run("semantic", grid, command, tasks)
    }

    fn build_failure(
        &self,
        tag: &str,
        subject: &Subject,
        params: &TruncationParams,
        e: crate::paper_model::PaperModelError,
    ) -> VerificationReport {
        let command = format!("{tag} {} {}", subject.args, params_args(params));
        self.run(
            tag,
            subject.args.clone(),
            command,
            vec![(
                "build".to_owned(),
                Box::new(move || Outcome::new(Verdict::Fail, e.to_string())),
            )],
        )
    }

    /// `F_k^m[P_{i,j}, Q_{i,j}] ↔ A_{n+k}^m` and the `G`/`B` analogue,
    /// where `n` is `i` for `m = 1` and `j` for `m = 2`.
    pub fn keyformulas(&self, k_max: u32, range: (i64, i64)) -> VerificationReport {
        self.keyformulas_with(k_max, range, false)
    }

    fn keyformulas_with(&self, k_max: u32, range: (i64, i64), swapped: bool) -> VerificationReport {
        let budget = self.prover_budget();
        let mut ks: Vec<u32> = (1..=k_max.max(2)).collect();
        ks.dedup();
        let mut tasks: Vec<Task<'_>> = Vec::new();
        for m in [1u8, 2] {
            for &k in &ks {
                for i in range.0..=range.1 {
                    for j in range.0..=range.1 {
                        for fam in ['F', 'G'] {
                            let key = format!("{fam}(k={k},m={m},i={i},j={j})");
                            tasks.push((
                                key,
                                Box::new(move || {
                                    let sigma = match pq_substitution(i, j) {
                                        Ok(s) => s,
                                        Err(e) => {
                                            return Outcome::new(Verdict::Refused, e.to_string())
                                        }
                                    };
                                    let n = if m == 1 { i } else { j };
                                    let use_f = (fam == 'F') != swapped;
                                    let lhs = if use_f { f_m(k, m) } else { g_m(k, m) }
                                        .expect("m is 1 or 2");
                                    let rhs = if fam == 'F' {
                                        a_formula(n + k as i64, m)
                                    } else {
                                        b_formula(n + k as i64, m)
                                    };
                                    let rhs = match rhs {
                                        Ok(f) => f,
                                        Err(e) => {
                                            return Outcome::new(Verdict::Refused, e.to_string())
                                        }
                                    };
                                    prover_outcome(
                                        &[],
                                        &Formula::iff(&substitute(&lhs, &sigma), &rhs),
                                        budget,
                                    )
                                }),
                            ));
                        }
                    }
                }
            }
        }
        let grid = format!(
            "k in 1..={}, i,j in {}..={}",
            k_max.max(2),
            range.0,
            range.1
        );
        let command = format!(
            "keyformulas --k-max {k_max} --lo {} --hi {}",
            range.0, range.1
        );
        self.run("keyformulas", grid, command, tasks)
    }

    /// The four cases of the equivalence between `E_{s,m,n}` and the
    /// instances of `Ê`.
    pub fn equivalence(&self, s_max: u32, m_max: u32, n_max: u32) -> VerificationReport {
        let budget = self.prover_budget();
        let mut tasks: Vec<Task<'_>> = Vec::new();
        for s in 0..=s_max {
            for m in 0..=m_max {
                for n in 0..=n_max {
                    let code = e_code(s, m, n);
                    let mut push = |key: String, rhs: Formula| {
                        let code = code.clone();
                        tasks.push((
                            key,
                            Box::new(move || {
                                prover_outcome(&[], &Formula::iff(&code, &rhs), budget)
                            }),
                        ));
                    };
                    for i in 1..=m + 1 {
                        for j in 1..=n + 1 {
                            let rhs = e_hat_instance(s, m, n, i, j).expect("admissible indices");
                            push(format!("case1 E({s},{m},{n}) i={i} j={j}"), rhs);
                        }
                    }
                    if m == 0 && n >= 1 {
                        push(format!("case2 E({s},0,{n})"), e_hat_0star_instance(s, n));
                    }
                    if m >= 1 && n == 0 {
                        push(format!("case3 E({s},{m},0)"), e_hat_star0_instance(s, m));
                    }
                    if m == 0 && n == 0 {
                        push(format!("case4 E({s},0,0)"), e_hat_00(s));
                    }
                }
            }
        }
        let grid = format!("s<={s_max}, m<={m_max}, n<={n_max}");
        let command = format!("equivalence --s-max {s_max} --m-max {m_max} --n-max {n_max}");
        self.run("equivalence", grid, command, tasks)
    }

    /// Model tier: every instruction axiom holds at every point of the
    /// model. Frame tier: no valuation on the frame refutes it.
    pub fn axiom(&self, subject: &Subject, params: TruncationParams) -> VerificationReport {
        self.axiom_with(subject, params, &ax_instruction)
    }

    /// [`Campaign::axiom`] with a substitute for the instruction axioms.
    pub fn axiom_with(
        &self,
        subject: &Subject,
        params: TruncationParams,
        axiom: &(dyn Fn(State, Instruction) -> Formula + Sync),
    ) -> VerificationReport {
        let pm = match build(&subject.machine, subject.init, params) {
            Ok(pm) => pm,
            Err(e) => return self.build_failure("axiom", subject, &params, e),
        };
        self.axiom_on(&pm, subject, axiom)
    }

    pub fn axiom_on(
        &self,
        pm: &PaperModel,
        subject: &Subject,
        axiom: &(dyn Fn(State, Instruction) -> Formula + Sync),
    ) -> VerificationReport {
        let budget = self.search_budget();
        let mut tasks: Vec<Task<'_>> = Vec::new();
        for (s, ins) in subject.machine.instructions() {
            let ax = axiom(s, ins);
            let model_ax = ax.clone();
            tasks.push((
                format!("model Ax({s})"),
                Box::new(move || {
                    let set = Evaluator::new(&pm.model).truth_set(&model_ax).clone();
                    match pm.model.frame().all_points().difference(&set).next() {
                        None => Outcome::new(Verdict::Pass, "valid in model"),
                        Some(w) => Outcome::new(Verdict::Fail, format!("refuted at {}", pm.id(w))),
                    }
                }),
            ));
            tasks.push((
                format!("frame Ax({s})"),
                Box::new(
                    move || match countervaluation(pm.model.frame(), &ax, budget) {
                        CounterValuation::Found { witness, .. } => Outcome::new(
                            Verdict::Fail,
                            format!("found: refuted at {}", pm.id(witness)),
                        ),
                        CounterValuation::Exhausted { nodes } => {
                            Outcome::new(Verdict::Pass, format!("none after {nodes} nodes"))
                        }
                        CounterValuation::Unknown { nodes } => Outcome::new(
                            Verdict::Unknown,
                            format!("budget hit after {nodes} nodes"),
                        ),
                    },
                ),
            ));
        }
        let grid = format!("{} imax {}", subject.args, pm.params.imax);
        let command = format!("axiom {} {}", subject.args, params_args(&pm.params));
        self.run("axiom", grid, command, tasks)
    }

    /// Forward: a certificate along the trace to `target`. Backward: a
    /// point of the model refuting `E_target → E_init`.
    pub fn reduction(
        &self,
        subject: &Subject,
        target: Configuration,
        params: TruncationParams,
    ) -> VerificationReport {
        let budget = self.prover_budget();
        let command = format!(
            "reduction {} --target {} {}",
            subject.args,
            config_arg(target),
            params_args(&params)
        );
        let grid = format!("{} init {} target {target}", subject.args, subject.init);
        let graph = reach_graph(
            &subject.machine,
            subject.init,
            params.step_bound,
            params.counter_bound,
        );
        let zone = params.zone();
        let needed = (3 * target.s as i64 + 2)
            .max(target.m as i64 + 1)
            .max(target.n as i64 + 1);
        if needed > zone {
            let detail = format!("target needs index {needed}, zone ends at {zone}");
            return self.run(
                "reduction",
                grid,
                command,
                vec![(
                    format!("target {target}"),
                    Box::new(move || Outcome::new(Verdict::Refused, detail.clone())),
                )],
            );
        }
        let mut tasks: Vec<Task<'_>> = Vec::new();
        if let Some(path) = trace(&subject.machine, subject.init, target, &graph) {
            let steps: Vec<(Configuration, Instruction, Configuration)> = path
                .windows(2)
                .map(|w| {
                    (
                        w[0],
                        subject.machine.instruction(w[0].s).expect("stepped"),
                        w[1],
                    )
                })
                .collect();
            let hyps: Vec<Formula> = steps
                .iter()
                .map(|&(c, ins, _)| {
                    substitute(&ax_instruction(c.s, ins), &step_substitution(ins, c))
                })
                .collect();
            for (k, (&(c, _, d), hyp)) in steps.iter().zip(&hyps).enumerate() {
                let hyp = hyp.clone();
                tasks.push((
                    format!("forward step {k} {c}->{d}"),
                    Box::new(move || {
                        let goal = Formula::implies(&code(d), &code(c));
                        prover_outcome(std::slice::from_ref(&hyp), &goal, budget)
                    }),
                ));
            }
            let init = subject.init;
            tasks.push((
                format!("forward {init}->{target}"),
                Box::new(move || {
                    let goal = Formula::implies(&code(target), &code(init));
                    let mut out = prover_outcome(&hyps, &goal, budget);
                    out.detail = format!("{} steps; {}", hyps.len(), out.detail);
                    out
                }),
            ));
        } else if graph.is_truncated() {
            tasks.push((
                format!("target {target}"),
                Box::new(|| {
                    Outcome::new(
                        Verdict::Inconclusive,
                        "not explored and exploration was truncated",
                    )
                }),
            ));
        } else {
            let init = subject.init;
            let machine = subject.machine.clone();
            tasks.push((
                format!("backward {init}->{target}"),
                Box::new(move || {
                    let pm = match build(&machine, init, params) {
                        Ok(pm) => pm,
                        Err(e) => return Outcome::new(Verdict::Fail, e.to_string()),
                    };
                    let e0 = pm.e_point(init).expect("root is explored");
                    let w = pm.point(e0).expect("e point exists");
                    let goal = Formula::implies(&code(target), &code(init));
                    if force(&pm.model, w, &goal) {
                        Outcome::new(Verdict::Fail, format!("{e0} forces E{target} -> E{init}"))
                    } else {
                        Outcome::new(Verdict::Pass, format!("refuted at {e0}"))
                    }
                }),
            ));
        }
        self.run("reduction", grid, command, tasks)
    }

    /// Every point refuting `Ê_{s,x,y}` lies below some `e_{[s,m,n]}` with
    /// `m ≥ φ(x)`, `n ≥ φ(y)`.
    pub fn semantic3(&self, subject: &Subject, params: TruncationParams) -> VerificationReport {
        let pm = match build(&subject.machine, subject.init, params) {
            Ok(pm) => pm,
            Err(e) => return self.build_failure("semantic3", subject, &params, e),
        };
        self.semantic3_on(&pm, subject)
    }

    pub fn semantic3_on(&self, pm: &PaperModel, subject: &Subject) -> VerificationReport {
        use IndexOrStar::{Index, Star};
        let s_max = pm.graph.vertices.iter().map(|c| c.s).max().unwrap_or(0) + 1;
        let mut shapes = vec![(Index(0), Index(0)), (Index(0), Star), (Star, Index(0))];
        for i in 1..=2 {
            for j in 1..=2 {
                shapes.push((Index(i), Index(j)));
            }
        }
        let mut tasks: Vec<Task<'_>> = Vec::new();
        for s in 0..=s_max {
            for &(x, y) in &shapes {
                let show = |v: IndexOrStar| match v {
                    Index(i) => i.to_string(),
                    Star => "*".to_owned(),
                };
                tasks.push((
                    format!("Ehat({s},{},{})", show(x), show(y)),
                    Box::new(move || {
                        let f = e_hat_general(s, x, y).expect("listed shapes are defined");
                        let refuting = refuters(&pm.model, &f);
                        let mut allowed = FixedBitSet::with_capacity(pm.model.len());
                        for &c in &pm.graph.vertices {
                            if c.s == s
                                && c.m >= crate::encoding::phi(x)
                                && c.n >= crate::encoding::phi(y)
                            {
                                allowed.union_with(
                                    pm.model.frame().downset(
                                        pm.point(PointId::E(pm.quotient.representative(
                                            pm.quotient.class_of(c).expect("explored"),
                                        )))
                                        .expect("e point"),
                                    ),
                                );
                            }
                        }
                        match refuting.difference(&allowed).next() {
                            None => Outcome::new(
                                Verdict::Pass,
                                format!("{} refuting points", refuting.count_ones(..)),
                            ),
                            Some(w) => Outcome::new(
                                Verdict::Fail,
                                format!("{} refutes but is below no admissible e point", pm.id(w)),
                            ),
                        }
                    }),
                ));
            }
        }
        let grid = format!("{} s<={s_max}", subject.args);
        let command = format!("semantic3 {} {}", subject.args, params_args(&pm.params));
        self.run("semantic3", grid, command, tasks)
    }

    /// Forcing at the points of the smaller truncation is unchanged when
    /// `imax` grows by two, for every zone formula.
    pub fn truncation(&self, subject: &Subject, params: TruncationParams) -> VerificationReport {
        let wider = TruncationParams {
            imax: params.imax + 2,
            ..params
        };
        let (small, large) = match (
            build(&subject.machine, subject.init, params),
            build(&subject.machine, subject.init, wider),
        ) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                return self.build_failure("truncation", subject, &params, e)
            }
        };
        let mut members = Vec::new();
        for j in 0..3u8 {
            for i in -5..=params.zone() {
                members.push(Member::A(i, j));
                members.push(Member::B(i, j));
            }
        }
        members.push(Member::C1);
        members.push(Member::C2);
        members.extend(small.graph.vertices.iter().map(|&c| Member::E(c)));
        let (small, large) = (&small, &large);
        let tasks = members
            .into_iter()
            .map(|member| -> Task<'_> {
                (
                    member.to_string(),
                    Box::new(move || {
                        let f = member.formula().expect("valid member");
                        let a = refuters(&small.model, &f);
                        let b = refuters(&large.model, &f);
                        for w in 0..small.model.len() {
                            let id = small.id(w);
                            let v = large.point(id).expect("retained points persist");
                            if a.contains(w) != b.contains(v) {
                                return Outcome::new(
                                    Verdict::Fail,
                                    format!("forcing changes at {id}"),
                                );
                            }
                        }
                        Outcome::new(Verdict::Pass, format!("{} points agree", small.model.len()))
                    }),
                )
            })
            .collect();
        let grid = format!("{} imax {} vs {}", subject.args, params.imax, wider.imax);
        let command = format!("truncation {} {}", subject.args, params_args(&params));
        self.run("truncation", grid, command, tasks)
    }
}

fn code(c: Configuration) -> Formula {
    e_code(c.s, c.m, c.n)
}

fn check_member(pm: &PaperModel, member: Member) -> Outcome {
    let point = match pm.expected_point(member) {
        Ok(p) => p,
        Err(e) => return Outcome::new(Verdict::Refused, e.to_string()),
    };
    let f = member.formula().expect("valid member");
    let refuting = refuters(&pm.model, &f);
    let below = pm.downset(point).expect("expected point exists");
    if let Some(w) = refuting.difference(below).next() {
        return Outcome::new(
            Verdict::Fail,
            format!("{} refutes but is not below {point}", pm.id(w)),
        );
    }
    if let Some(w) = below.difference(&refuting).next() {
        return Outcome::new(
            Verdict::Fail,
            format!("{} is below {point} but forces it", pm.id(w)),
        );
    }
    Outcome::new(Verdict::Pass, format!("downset of {point}"))
}

fn prover_outcome(hyps: &[Formula], goal: &Formula, budget: u64) -> Outcome {
    let formula = Formula::implies(&Formula::and_all(hyps), goal);
    match ipc::prove(&formula, budget) {
        ProverVerdict::Proved(proof) => match proof.replay(&[], &formula) {
            Ok(()) => Outcome::new(
                Verdict::Pass,
                format!("proved, {} steps replayed", proof.len()),
            ),
            Err(e) => Outcome::new(Verdict::Fail, format!("proof does not replay: {e}")),
        },
        ProverVerdict::Refuted { model, witness } => Outcome::new(
            Verdict::Fail,
            format!("refuted by a {}-point model at w{witness}", model.len()),
        ),
        ProverVerdict::Unknown { spent } => {
            Outcome::new(Verdict::Unknown, format!("budget exhausted after {spent}"))
        }
    }
}

/// The instance of the instruction axiom that links the codes of `c` and
/// its successor.
pub fn step_substitution(ins: Instruction, c: Configuration) -> Substitution {
    let (m, n) = (c.m as i64, c.n as i64);
    let pq = |i, j| pq_substitution(i, j).expect("indices are at least -1");
    match ins {
        Instruction::Inc1(_) | Instruction::Inc2(_) => pq(m - 1, n - 1),
        Instruction::Dec1(..) if c.m > 0 => pq(m - 2, n - 1),
        Instruction::Dec2(..) if c.n > 0 => pq(m - 1, n - 2),
        Instruction::Dec1(..) => Substitution::new().with(
            "q",
            Formula::or(
                &a_formula(n, 2).expect("n >= 0"),
                &b_formula(n, 2).expect("n >= 0"),
            ),
        ),
        Instruction::Dec2(..) => Substitution::new().with(
            "p",
            Formula::or(
                &a_formula(m, 1).expect("m >= 0"),
                &b_formula(m, 1).expect("m >= 0"),
            ),
        ),
    }
}

/// The run from `init` up to the first visit of `target`, if explored.
fn trace(
    machine: &MinskyMachine,
    init: Configuration,
    target: Configuration,
    graph: &crate::minsky::ConfigGraph,
) -> Option<Vec<Configuration>> {
    if !graph.contains(target) {
        return None;
    }
    let mut path = vec![init];
    while *path.last()? != target {
        let next = machine.step(*path.last()?)?;
        if path.contains(&next) {
            return None;
        }
        path.push(next);
    }
    Some(path)
}

pub fn verify_semantic(
    machine: &MinskyMachine,
    init: Configuration,
    params: TruncationParams,
) -> VerificationReport {
    Campaign::default().semantic(&custom(machine, init), params)
}

pub fn verify_keyformulas(k_max: u32, range: (i64, i64), budget: u64) -> VerificationReport {
    with_budget(budget).keyformulas(k_max, range)
}

pub fn verify_equivalence(s_max: u32, m_max: u32, n_max: u32, budget: u64) -> VerificationReport {
    with_budget(budget).equivalence(s_max, m_max, n_max)
}

pub fn verify_axiom(
    machine: &MinskyMachine,
    init: Configuration,
    params: TruncationParams,
    budget: u64,
) -> VerificationReport {
    with_budget(budget).axiom(&custom(machine, init), params)
}

pub fn verify_reduction(
    machine: &MinskyMachine,
    init: Configuration,
    target: Configuration,
    params: TruncationParams,
    budget: u64,
) -> VerificationReport {
    with_budget(budget).reduction(&custom(machine, init), target, params)
}

pub fn verify_semantic3(
    machine: &MinskyMachine,
    init: Configuration,
    params: TruncationParams,
) -> VerificationReport {
    Campaign::default().semantic3(&custom(machine, init), params)
}

fn with_budget(budget: u64) -> Campaign {
    Campaign {
        budget: Some(budget),
        only: None,
    }
}

fn custom(machine: &MinskyMachine, init: Configuration) -> Subject {
    Subject {
        machine: machine.clone(),
        init,
        args: format!("--machine <file> --init {}", config_arg(init)),
    }
}

/// Corrupted inputs on which each verifier must report a failure.
pub mod faults {
    use super::*;

    /// The semantic check on a model with an extra edge from `b(1,1)` up
    /// to `a(0,1)`.
    pub fn semantic_extra_edge(subject: &Subject, params: TruncationParams) -> VerificationReport {
        let pm = build(&subject.machine, subject.init, params).expect("fixture builds");
        let bad = pm
            .with_extra_pair(PointId::B(1, 1), PointId::A(0, 1))
            .expect("points exist");
        Campaign::default().semantic_on(&bad, subject)
    }

    /// Key formulas with `F` and `G` swapped.
    pub fn keyformulas_swapped(k_max: u32, range: (i64, i64), budget: u64) -> VerificationReport {
        with_budget(budget).keyformulas_with(k_max, range, true)
    }

    /// Instruction axioms weakened by an extra `r` in the antecedent
    /// position, so they are no longer valid.
    pub fn axiom_weakened(
        subject: &Subject,
        params: TruncationParams,
        budget: u64,
    ) -> VerificationReport {
        let broken = |s: State, ins: Instruction| {
            Formula::implies(&ax_instruction(s, ins), &crate::encoding::r())
        };
        with_budget(budget).axiom_with(subject, params, &broken)
    }

    /// The axiom check on the frame of `other` for the instructions of
    /// `subject`.
    pub fn axiom_foreign_frame(
        subject: &Subject,
        other: &Subject,
        params: TruncationParams,
        budget: u64,
    ) -> VerificationReport {
        let pm = build(&other.machine, other.init, params).expect("fixture builds");
        with_budget(budget).axiom_on(&pm, subject, &ax_instruction)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_format_and_exit_codes() {
        let report = VerificationReport {
            tag: "t".into(),
            grid: "g".into(),
            entries: vec![Entry {
                instance: "x".into(),
                verdict: Verdict::Pass,
                detail: String::new(),
                millis: 3,
                reproducer: None,
            }],
        };
        assert_eq!(report.lines(), "t\tx\tpass\t3\t\t\n");
        assert_eq!(report.exit_code(), 0);
        let mut unknown = report.clone();
        unknown.entries[0].verdict = Verdict::Unknown;
        assert_eq!(unknown.exit_code(), 3);
        let mut failed = unknown.clone();
        failed.entries.push(Entry {
            verdict: Verdict::Fail,
            ..report.entries[0].clone()
        });
        assert_eq!(failed.exit_code(), 1);
    }

    #[test]
    fn fixtures_parse() {
        assert_eq!(Subject::fixtures().len(), 3);
        assert!(Subject::fixture("nope").is_none());
    }

    #[test]
    fn failures_carry_reproducers() {
        let r = faults::keyformulas_swapped(1, (0, 0), 10_000);
        let fail = r
            .entries
            .iter()
            .find(|e| e.verdict == Verdict::Fail)
            .unwrap();
        let rep = fail.reproducer.as_deref().unwrap();
        assert!(rep.starts_with("supint verify keyformulas"), "{rep}");
        assert!(rep.contains(&fail.instance));
    }

    #[test]
    fn only_selects_one_instance() {
        let c = Campaign {
            budget: None,
            only: Some("F(k=1,m=1,i=0,j=0)".into()),
        };
        let r = c.keyformulas(1, (0, 0));
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].verdict, Verdict::Pass);
    }

    #[test]
    fn step_substitutions_follow_the_instruction() {
        let c = Configuration::new(0, 2, 1);
        let s = step_substitution(Instruction::Dec1(1, 2), c);
        assert_eq!(s, pq_substitution(0, 0).unwrap());
        let s = step_substitution(Instruction::Dec1(1, 2), Configuration::new(0, 0, 3));
        assert_eq!(s.domain().collect::<Vec<_>>(), vec!["q"]);
    }
}

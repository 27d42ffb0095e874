//! One PASS/FAIL line per acceptance criterion. Exits non-zero when any
//! criterion fails.

mod support;

use std::time::{Duration, Instant};

use proptest::test_runner::{Config, TestCaseError, TestRunner};
use supint::encoding::{a_formula, b_formula};
use supint::formula::{parse, print, substitute, Formula, Substitution};
use supint::harness::{Campaign, Subject, Verdict, VerificationReport};
use supint::ipc::{self, ProverVerdict, DEFAULT_PROVER_BUDGET};
use supint::kripke::{check_poset, refuters, Evaluator, KripkeFrame};
use supint::minsky::{reach_graph, Configuration};
use supint::paper_model::{build, TruncationParams};

use support::{acyclic_base, formula, is_downset, is_upset, model, warshall, Naive, VARS};

const SEMANTIC_LIMIT: Duration = Duration::from_secs(60);
const CODE_LIMIT: Duration = Duration::from_secs(60);
const KEY_LIMIT: Duration = Duration::from_secs(600);
const PROPERTY_CASES: u32 = 1000;
const FRAME_IMAX: i64 = 10;
const FORWARD_STEPS: usize = 4;
const PEIRCE_POINTS: usize = 3;

type Criterion = (&'static str, fn() -> Check);

struct Check {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Check {
    Check {
        ok,
        detail: detail.into(),
    }
}

fn failures(reports: &[&VerificationReport], pick: impl Fn(&str) -> bool) -> Vec<String> {
    reports
        .iter()
        .flat_map(|r| r.entries.iter().map(move |e| (r, e)))
        .filter(|(_, e)| pick(&e.instance) && e.verdict != Verdict::Pass)
        .map(|(r, e)| format!("{} {} {}: {}", r.grid, e.instance, e.verdict, e.detail))
        .collect()
}

fn brief(list: &[String]) -> String {
    let mut s = list.iter().take(3).cloned().collect::<Vec<_>>().join("; ");
    if list.len() > 3 {
        s.push_str(&format!("; and {} more", list.len() - 3));
    }
    s
}

fn semantic_refutation() -> Check {
    let start = Instant::now();
    let subject = Subject::fixture("cycle").unwrap();
    let params = TruncationParams::default();
    let report = Campaign::default().semantic(&subject, params);
    let in_range = |key: &str| {
        (key.starts_with("A(") || key.starts_with("B(")) && {
            let i: i64 = key[2..].split(',').next().unwrap().parse().unwrap();
            (-4..=18).contains(&i)
        }
    };
    let bad = failures(&[&report], in_range);
    // cross-check against the textbook evaluator
    let pm = build(&subject.machine, subject.init, params).unwrap();
    let mut naive = Naive::new(&pm.model);
    let mut oracle_bad = Vec::new();
    for j in 0..3u8 {
        for i in -4..=18 {
            for (f, id) in [
                (
                    a_formula(i, j).unwrap(),
                    supint::paper_model::PointId::A(i, j),
                ),
                (
                    b_formula(i, j).unwrap(),
                    supint::paper_model::PointId::B(i, j),
                ),
            ] {
                if &naive.refuters(&f) != pm.downset(id).unwrap() {
                    oracle_bad.push(id.to_string());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let checked = report
        .entries
        .iter()
        .filter(|e| in_range(&e.instance))
        .count();
    check(
        bad.is_empty() && oracle_bad.is_empty() && checked == 138 && elapsed < SEMANTIC_LIMIT,
        format!(
            "{checked} instances, {} failing [{}], oracle refuters differ from the downset at {:?}, {:.1?}",
            bad.len(),
            brief(&bad),
            oracle_bad,
            elapsed
        ),
    )
}

fn code_refutation() -> Check {
    let start = Instant::now();
    let reports: Vec<_> = Subject::fixtures()
        .iter()
        .map(|s| Campaign::default().semantic(s, TruncationParams::default()))
        .collect();
    let refs: Vec<&VerificationReport> = reports.iter().collect();
    let is_code = |k: &str| k.starts_with('E');
    let total = reports
        .iter()
        .flat_map(|r| &r.entries)
        .filter(|e| is_code(&e.instance))
        .count();
    let bad = failures(&refs, is_code);
    let elapsed = start.elapsed();
    check(
        bad.is_empty() && total > 0 && elapsed < CODE_LIMIT,
        format!(
            "{total} explored configurations, {} failing [{}], {:.1?}",
            bad.len(),
            brief(&bad),
            elapsed
        ),
    )
}

fn key_formulas() -> Check {
    let start = Instant::now();
    let report = Campaign::default().keyformulas(3, (-1, 2));
    let elapsed = start.elapsed();
    let unknown = report.count(Verdict::Unknown);
    let bad = failures(&[&report], |_| true);
    check(
        bad.is_empty() && report.entries.len() == 192 && elapsed < KEY_LIMIT,
        format!(
            "{} instances, {} not proved ({unknown} unknown) [{}], {:.1?}",
            report.entries.len(),
            bad.len(),
            brief(&bad),
            elapsed
        ),
    )
}

fn equivalence() -> Check {
    let report = Campaign::default().equivalence(1, 2, 2);
    let bad = failures(&[&report], |_| true);
    let cases = |c: &str| {
        report
            .entries
            .iter()
            .filter(|e| e.instance.starts_with(c))
            .count()
    };
    check(
        bad.is_empty() && (1..=4).all(|c| cases(&format!("case{c}")) > 0),
        format!(
            "{} instances (cases 1-4: {}/{}/{}/{}), {} not proved [{}]",
            report.entries.len(),
            cases("case1"),
            cases("case2"),
            cases("case3"),
            cases("case4"),
            bad.len(),
            brief(&bad)
        ),
    )
}

fn axiom_validity() -> Check {
    let mut model_bad = Vec::new();
    let mut frame_bad = Vec::new();
    let mut found = 0;
    let mut notes = Vec::new();
    for subject in Subject::fixtures() {
        let model_tier = Campaign::default().axiom(&subject, TruncationParams::default());
        model_bad.extend(failures(&[&model_tier], |k| k.starts_with("model")));
        found += model_tier
            .entries
            .iter()
            .filter(|e| e.detail.starts_with("found"))
            .count();
        // the smallest admissible truncation not below FRAME_IMAX
        let imax = (FRAME_IMAX..).find(|&i| {
            build(
                &subject.machine,
                subject.init,
                TruncationParams {
                    imax: i,
                    ..Default::default()
                },
            )
            .is_ok()
        });
        let params = TruncationParams {
            imax: imax.unwrap(),
            ..Default::default()
        };
        if params.imax != FRAME_IMAX {
            notes.push(format!(
                "{} frame tier at imax {}",
                subject.args, params.imax
            ));
        }
        let frame_tier = Campaign::default().axiom(&subject, params);
        found += frame_tier
            .entries
            .iter()
            .filter(|e| e.detail.starts_with("found"))
            .count();
        for (s, ins) in subject.machine.instructions() {
            let key = format!("frame Ax({s})");
            let e = frame_tier.get(&key).unwrap();
            let inc = matches!(
                ins,
                supint::minsky::Instruction::Inc1(_) | supint::minsky::Instruction::Inc2(_)
            );
            if e.verdict == Verdict::Fail || (inc && e.verdict != Verdict::Pass) {
                frame_bad.push(format!(
                    "{} {key}: {} {}",
                    subject.args, e.verdict, e.detail
                ));
            }
        }
    }
    check(
        model_bad.is_empty() && frame_bad.is_empty() && found == 0,
        format!(
            "model tier failures [{}], frame tier failures [{}], found verdicts {found}; {}",
            brief(&model_bad),
            brief(&frame_bad),
            notes.join(", ")
        ),
    )
}

fn reduction() -> Check {
    let params = TruncationParams::default();
    let mut forward_bad = Vec::new();
    let mut forward = 0;
    let mut backward_witnesses = Vec::new();
    let mut backward_bad = Vec::new();
    let mut overlap = Vec::new();
    for subject in Subject::fixtures() {
        let near = reach_graph(
            &subject.machine,
            subject.init,
            FORWARD_STEPS,
            params.counter_bound,
        );
        for &c in &near.vertices {
            let r = Campaign::default().reduction(&subject, c, params);
            forward += 1;
            if r.entries.iter().any(|e| e.instance.starts_with("backward")) {
                overlap.push(format!("{} {c}", subject.args));
            }
            forward_bad.extend(failures(&[&r], |_| true));
        }
        let full = reach_graph(
            &subject.machine,
            subject.init,
            params.step_bound,
            params.counter_bound,
        );
        let targets = (0..=3u32)
            .flat_map(|s| {
                (0..=2u32).flat_map(move |m| (0..=2u32).map(move |n| Configuration::new(s, m, n)))
            })
            .filter(|c| !full.contains(*c));
        for t in targets {
            let r = Campaign::default().reduction(&subject, t, params);
            if r.entries.iter().any(|e| e.instance.starts_with("forward")) {
                overlap.push(format!("{} {t}", subject.args));
            }
            for e in &r.entries {
                if e.instance.starts_with("backward") {
                    if e.verdict == Verdict::Pass {
                        backward_witnesses.push(format!("{} {t}: {}", subject.args, e.detail));
                    } else {
                        backward_bad.push(format!("{} {t}: {}", subject.args, e.detail));
                    }
                }
            }
        }
    }
    check(
        forward_bad.is_empty() && !backward_witnesses.is_empty() && overlap.is_empty(),
        format!(
            "{forward} forward targets, {} not proved [{}]; {} backward witnesses [{}]; {} backward targets without witness [{}]; overlaps {:?}",
            forward_bad.len(),
            brief(&forward_bad),
            backward_witnesses.len(),
            brief(&backward_witnesses),
            backward_bad.len(),
            brief(&backward_bad),
            overlap
        ),
    )
}

const HILBERT_AXIOMS: [&str; 10] = [
    "p -> (q -> p)",
    "(p -> (q -> r)) -> ((p -> q) -> (p -> r))",
    "p & q -> p",
    "p & q -> q",
    "p -> (q -> p & q)",
    "p -> p | q",
    "q -> p | q",
    "(p -> r) -> ((q -> r) -> (p | q -> r))",
    "(p -> q) -> ((p -> ~q) -> ~p)",
    "p -> (~p -> q)",
];

fn prover_sanity() -> Check {
    let budget = DEFAULT_PROVER_BUDGET;
    let proved = |s: &str| {
        let f = parse(s).unwrap();
        matches!(ipc::prove(&f, budget), ProverVerdict::Proved(p) if p.replay(&[], &f).is_ok())
    };
    let axioms_bad: Vec<&str> = HILBERT_AXIOMS
        .iter()
        .copied()
        .filter(|s| !proved(s))
        .collect();
    let peirce = parse("((p -> q) -> p) -> p").unwrap();
    let peirce_ok = match ipc::prove(&peirce, budget) {
        ProverVerdict::Refuted { model, witness } => {
            model.len() <= PEIRCE_POINTS && !Naive::new(&model).force(witness, &peirce)
        }
        _ => false,
    };
    let gladstone = proved("(p -> q) -> ((q -> r) -> (p -> r))");
    let printed = parse("(p -> (q -> r)) -> ((p -> q) -> (q -> r))").unwrap();
    let printed_ok = match ipc::prove(&printed, budget) {
        ProverVerdict::Refuted { model, witness } => !Naive::new(&model).force(witness, &printed),
        _ => false,
    };
    check(
        axioms_bad.is_empty() && peirce_ok && gladstone && printed_ok,
        format!(
            "axioms not proved {axioms_bad:?}, Peirce refuted in <= {PEIRCE_POINTS} points: {peirce_ok}, Gladstone proved: {gladstone}, printed variant refuted: {printed_ok}"
        ),
    )
}

fn run_property<S: proptest::strategy::Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<u32, String> {
    let config = Config {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        ..Config::default()
    };
    let ran = std::cell::Cell::new(0u32);
    TestRunner::new(config)
        .run(&strategy, |v| {
            ran.set(ran.get() + 1);
            test(v)
        })
        .map_err(|e| format!("{name}: {e}"))?;
    Ok(ran.get())
}

fn property_suites() -> Check {
    let results = [
        run_property("persistence", (model(6), formula(4, &VARS)), |(m, f)| {
            let set = Evaluator::new(&m).truth_set(&f).clone();
            proptest::prop_assert!(is_upset(&m, &set));
            proptest::prop_assert_eq!(refuters(&m, &f), Naive::new(&m).refuters(&f));
            Ok(())
        }),
        run_property(
            "downward closure",
            (model(6), formula(4, &VARS)),
            |(m, f)| {
                proptest::prop_assert!(is_downset(&m, &refuters(&m, &f)));
                Ok(())
            },
        ),
        run_property("round trip", formula(5, &VARS), |f| {
            proptest::prop_assert_eq!(parse(&print(&f)).unwrap().id(), f.id());
            Ok(())
        }),
        run_property(
            "substitution",
            (formula(4, &VARS), formula(2, &VARS), formula(2, &VARS)),
            |(f, a, b)| {
                let sigma = Substitution::new()
                    .with("p", a.clone())
                    .with("q", b.clone());
                let fresh = Substitution::new()
                    .with("p", Formula::var("z0"))
                    .with("q", Formula::var("z1"));
                let back = Substitution::new().with("z0", a).with("z1", b);
                proptest::prop_assert_eq!(
                    substitute(&substitute(&f, &fresh), &back).id(),
                    substitute(&f, &sigma).id()
                );
                Ok(())
            },
        ),
        run_property("poset laws", acyclic_base(8), |(n, base)| {
            let frame = KripkeFrame::closure_unlabelled(n, &base).unwrap();
            proptest::prop_assert!(check_poset(frame.order()).is_ok());
            let oracle = warshall(n, &base);
            for (i, row) in oracle.iter().enumerate() {
                for (j, &le) in row.iter().enumerate() {
                    proptest::prop_assert_eq!(frame.le(i, j), le);
                }
            }
            Ok(())
        }),
        run_property(
            "prover soundness",
            (formula(4, &VARS), model(5)),
            |(f, m)| {
                match ipc::prove(&f, 100_000) {
                    ProverVerdict::Proved(_) => {
                        proptest::prop_assert!(Naive::new(&m).refuters(&f).is_clear())
                    }
                    ProverVerdict::Refuted { model, witness } => {
                        proptest::prop_assert!(!Naive::new(&model).force(witness, &f))
                    }
                    ProverVerdict::Unknown { .. } => {}
                }
                Ok(())
            },
        ),
    ];
    let counts: Vec<u32> = results
        .iter()
        .filter_map(|r| r.as_ref().ok().copied())
        .collect();
    let bad: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    check(
        bad.is_empty() && counts.iter().all(|&c| c >= PROPERTY_CASES),
        format!("cases run per suite {counts:?}, failures {bad:?}"),
    )
}

fn truncation_stability() -> Check {
    let reports: Vec<_> = Subject::fixtures()
        .iter()
        .map(|s| Campaign::default().truncation(s, TruncationParams::default()))
        .collect();
    let refs: Vec<&VerificationReport> = reports.iter().collect();
    let bad = failures(&refs, |_| true);
    let total: usize = reports.iter().map(|r| r.entries.len()).sum();
    check(
        bad.is_empty(),
        format!(
            "{total} formulas compared, {} changed [{}]",
            bad.len(),
            brief(&bad)
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("semantic refutation", semantic_refutation),
        ("code refutation", code_refutation),
        ("key formulas", key_formulas),
        ("hat-code equivalence", equivalence),
        ("axiom validity", axiom_validity),
        ("reduction", reduction),
        ("prover sanity", prover_sanity),
        ("property suites", property_suites),
        ("truncation stability", truncation_stability),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let c = run();
        let status = if c.ok { "PASS" } else { "FAIL" };
        if !c.ok {
            failed += 1;
        }
        println!(
            "{status} {}. {name}: {} ({:.1?})",
            n + 1,
            c.detail,
            start.elapsed()
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

mod support;

use supint::encoding::{a_formula, b_formula, e_code};
use supint::harness::{faults, Campaign, Subject, Verdict};
use supint::ipc::prove;
use supint::kripke::refuters;
use supint::minsky::Configuration;
use supint::paper_model::{build, PointId, TruncationParams};

use support::Naive;

fn small() -> TruncationParams {
    TruncationParams {
        imax: 8,
        ..TruncationParams::default()
    }
}

fn cycle() -> Subject {
    Subject::fixture("cycle").unwrap()
}

#[test]
fn a_members_are_refuted_exactly_below_their_point() {
    let subject = cycle();
    let pm = build(&subject.machine, subject.init, small()).unwrap();
    let mut naive = Naive::new(&pm.model);
    for j in 0..3u8 {
        for i in -4..=pm.params.zone() {
            let f = a_formula(i, j).unwrap();
            let expected = pm.downset(PointId::A(i, j)).unwrap();
            assert_eq!(&naive.refuters(&f), expected, "A({i},{j})");
        }
    }
}

#[test]
fn library_refuters_match_the_textbook_evaluator() {
    for subject in Subject::fixtures() {
        let params = TruncationParams {
            imax: 13,
            ..TruncationParams::default()
        };
        let pm = build(&subject.machine, subject.init, params).unwrap();
        let mut naive = Naive::new(&pm.model);
        for j in 0..3u8 {
            for i in -4..=pm.params.zone() {
                for f in [a_formula(i, j).unwrap(), b_formula(i, j).unwrap()] {
                    assert_eq!(refuters(&pm.model, &f), naive.refuters(&f));
                }
            }
        }
    }
}

#[test]
fn codes_are_forced_everywhere() {
    let subject = cycle();
    let pm = build(&subject.machine, subject.init, small()).unwrap();
    let mut naive = Naive::new(&pm.model);
    for c in &pm.graph.vertices {
        let f = e_code(c.s, c.m, c.n);
        assert!(naive.refuters(&f).is_clear(), "{c}");
        assert!(prove(&f, 1_000_000).is_proved(), "{c}");
    }
}

#[test]
fn extra_edge_is_caught() {
    let clean = Campaign::default().semantic(&cycle(), small());
    let report = faults::semantic_extra_edge(&cycle(), small());
    let newly_failing: Vec<_> = report
        .entries
        .iter()
        .filter(|e| e.verdict == Verdict::Fail)
        .filter(|e| clean.get(&e.instance).unwrap().verdict == Verdict::Pass)
        .collect();
    assert!(!newly_failing.is_empty(), "{}", report.lines());
    assert!(newly_failing.iter().all(|e| e.reproducer.is_some()));
}

#[test]
fn swapped_key_formulas_are_caught() {
    let report = faults::keyformulas_swapped(1, (0, 0), 1_000_000);
    assert!(report.count(Verdict::Fail) > 0);
    assert_eq!(report.exit_code(), 1);
}

#[test]
fn weakened_axioms_are_found() {
    let report = faults::axiom_weakened(&cycle(), small(), 1_000_000);
    let found: Vec<_> = report
        .entries
        .iter()
        .filter(|e| e.verdict == Verdict::Fail && e.detail.starts_with("found"))
        .collect();
    assert!(!found.is_empty(), "{}", report.lines());
}

#[test]
fn genuine_axioms_hold_on_their_frame() {
    let report = Campaign::default().axiom(&cycle(), small());
    assert!(report.all_pass(), "{}", report.lines());
}

#[test]
fn forward_reduction_on_the_cycle() {
    let report = Campaign::default().reduction(&cycle(), Configuration::new(0, 0, 0), small());
    assert!(report.all_pass(), "{}", report.lines());
    let report = Campaign::default().reduction(&cycle(), Configuration::new(1, 1, 0), small());
    assert_eq!(
        report
            .get("forward step 0 (0,0,0)->(1,1,0)")
            .unwrap()
            .verdict,
        Verdict::Pass
    );
    assert_eq!(
        report.get("forward (0,0,0)->(1,1,0)").unwrap().verdict,
        Verdict::Pass
    );
}

#[test]
fn unreachable_target_goes_backward() {
    let report = Campaign::default().reduction(&cycle(), Configuration::new(0, 2, 0), small());
    let entry = report.get("backward (0,0,0)->(0,2,0)").unwrap();
    assert_ne!(entry.verdict, Verdict::Pass, "{}", entry.detail);
}

#[test]
fn targets_outside_the_zone_are_refused() {
    let report = Campaign::default().reduction(&cycle(), Configuration::new(5, 0, 0), small());
    assert!(report.entries.iter().all(|e| e.verdict == Verdict::Refused));
}

#[test]
fn truncation_is_stable_on_every_fixture() {
    for subject in Subject::fixtures() {
        let params = TruncationParams {
            imax: 13,
            ..TruncationParams::default()
        };
        let report = Campaign::default().truncation(&subject, params);
        assert!(report.all_pass(), "{}", report.lines());
    }
}

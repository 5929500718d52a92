mod common;

use splay_core::arrangement::{from_int_rows, Arrangement};
use splay_core::blowup::{
    crepancy_check, resolve, BlowupError, BlowupState, ClassVector, Provenance, Status,
};
use splay_core::classify::classify_arrangement;

/// Replays a phase-1 run step by step and checks the per-step invariants.
fn check_phase1(arr: &Arrangement) -> BlowupState {
    let mut state = BlowupState::from_arrangement(arr);
    while let Some(center) = state.select_center() {
        let before = state.non_splayed_count();
        let (next, info) = state.blowup_step(center.id).unwrap();
        assert!(next.non_splayed_count() < before);
        crepancy_check(&state, &next).unwrap();
        for c in next.components() {
            match &c.provenance {
                Provenance::StrictTransform(parent) => {
                    let p = state.component(*parent).unwrap();
                    assert_eq!(p.dim, c.dim);
                    assert_eq!(p.status, c.status);
                    assert_eq!(p.containing, c.containing);
                }
                Provenance::ExceptionalTrace { .. } => {
                    assert!(c.containing.contains(&info.exceptional));
                    match &c.status {
                        Status::Splayed(w) => assert_eq!(w.part2, vec![info.exceptional]),
                        Status::NonSplayed => panic!("exceptional trace not splayed"),
                    }
                }
                Provenance::Initial(_) => panic!("initial component after a blowup"),
            }
        }
        state = next;
    }
    state
}

#[test]
fn example_phase1_invariants() {
    let arr = common::example();
    let state = check_phase1(&arr);
    assert_eq!(state.step_count(), 3);
    assert!(state.is_normal_crossings());
    assert_eq!(state.canonical(), &ClassVector(vec![-7, 1, 1, 1]));
}

#[test]
fn codim6_component_survives_first_blowup() {
    let arr = common::example();
    let state = BlowupState::from_arrangement(&arr);
    let names = |s: &BlowupState, c: &[usize]| -> Vec<String> {
        c.iter().map(|&d| s.divisors()[d].name.clone()).collect()
    };
    let center = state
        .components()
        .iter()
        .find(|c| names(&state, &c.containing) == ["x1", "x2", "x1+x2"])
        .unwrap();
    let target: Vec<&str> = vec!["x3", "x4", "x5", "x6", "x3+x4", "x5+x6"];
    let before = state
        .components()
        .iter()
        .find(|c| names(&state, &c.containing) == target)
        .unwrap()
        .clone();
    assert_eq!(before.dim, 2);
    let (next, _) = state.blowup_step(center.id).unwrap();
    let after = next
        .components()
        .iter()
        .find(|c| names(&next, &c.containing) == target)
        .unwrap();
    assert_eq!(after.dim, before.dim);
    assert_eq!(after.status, before.status);
    // the codim-6 point itself lies in the center and is gone
    assert!(!next.components().iter().any(|c| c.containing.len() == 9 && c.dim == 0));
}

#[test]
fn resolve_fixtures_monotone() {
    for name in ["example1_10.json", "boolean_p2.json", "boolean_p3.json", "boolean_p4.json", "pencil3_p2.json"] {
        let arr = common::fixture(name);
        let trace = resolve(&arr).unwrap();
        let mut ns = trace.initial_non_splayed;
        let mut bp = trace.phase2_branch_pairs;
        for s in &trace.steps {
            if s.phase == 1 {
                assert!(s.non_splayed_after < ns, "{name}");
                ns = s.non_splayed_after;
            } else {
                assert_eq!(s.branch_pairs_after + 1, bp, "{name}");
                bp = s.branch_pairs_after;
            }
            assert_eq!(s.ledger.lhs, s.ledger.rhs);
        }
        assert_eq!(bp, 0);
        assert!(trace.final_state.branch_pairwise_disjoint());
    }
}

#[test]
fn boolean_needs_only_phase_two() {
    // codim-2 strata of n coordinate hyperplanes: C(n, 2)
    for (name, pairs) in [("boolean_p2.json", 1), ("boolean_p3.json", 3), ("boolean_p4.json", 6)] {
        let trace = resolve(&common::fixture(name)).unwrap();
        assert_eq!(trace.phase_len(1), 0);
        assert_eq!(trace.phase_len(2), pairs, "{name}");
        assert!(trace.steps.iter().all(|s| !s.e_in_branch));
    }
}

#[test]
fn branch_subset_changes_parity() {
    // {x1, x2, x1+x2} with only x1, x2 in the branch: the point has 2
    // branch lines in codim 2, so E stays out of the branch
    let mut arr = common::fixture("pencil3_p2.json");
    arr = Arrangement::new(arr.dim(), arr.hyperplanes().to_vec(), Some(vec![0, 1])).unwrap();
    let trace = resolve(&arr).unwrap();
    assert_eq!(trace.phase_len(1), 1);
    assert!(!trace.steps[0].e_in_branch);
    assert_eq!(trace.phase_len(2), 0);
}

#[test]
fn random_resolvable_arrangements() {
    let mut resolved = 0;
    for seed in 0..200u64 {
        let arr = common::random_arrangement(seed);
        if !classify_arrangement(&arr).ours {
            continue;
        }
        let trace = resolve(&arr).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        resolved += 1;
        assert!(trace.final_state.branch_pairwise_disjoint());
        check_phase1(&arr);
    }
    assert!(resolved > 50, "only {resolved} resolved");
}

#[test]
fn trace_json_shape() {
    let trace = resolve(&common::fixture("pencil3_p2.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&trace.to_json()).unwrap();
    let first = &v[0];
    for key in ["step", "phase", "center", "parity", "E_in_branch", "canonical", "branch_classes", "certificate"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    assert_eq!(first["parity"], "odd");
    assert_eq!(first["center"]["containing"], serde_json::json!(["x1", "x2", "x1+x2"]));
}

#[test]
fn non_admissible_is_hypothesis_violation() {
    let arr = from_int_rows(
        2,
        &[vec![0, 1, 0], vec![0, 0, 1], vec![0, 1, 1], vec![0, 1, 2], vec![1, 0, 0]],
    )
    .unwrap();
    assert!(matches!(resolve(&arr), Err(BlowupError::HypothesisViolation { .. })));
}

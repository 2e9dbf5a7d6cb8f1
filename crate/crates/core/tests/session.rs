mod common;

use common::*;
use csmbench::dsl::load_text;
use csmbench::explorer::random_walks;
use csmbench::kernel::load_system;
use csmbench::models::{open_shipped, shipped_scenarios};
use csmbench::session::*;
use csmbench::view::*;
use proptest::prelude::*;

fn ping_pong_session() -> Session {
    Session::new(load_system(&open_shipped("ping_pong", None).unwrap()).unwrap())
}

#[test]
fn step_advances_and_records() {
    let mut s = ping_pong_session();
    let listed = s.enabled();
    assert_eq!(listed.version, 0);
    assert_eq!(listed.steps.len(), 1);
    let first = &listed.steps[0].step;
    assert_eq!(first.rule.as_deref(), Some("serve"));
    assert_eq!(first.source.as_deref(), Some("serve: IDLE -> WAIT { / P2.ping }"));
    s.step(0, listed.version).unwrap();
    assert_eq!(s.trace().len(), 1);
    let v = s.state_view();
    assert_eq!(v.instances[0].state, "WAIT");
    assert_eq!(v.instances[1].pool[0].text, "ping");
}

#[test]
fn stale_version_is_refused() {
    let mut s = ping_pong_session();
    let old = s.enabled().version;
    s.step(0, old).unwrap();
    assert_eq!(s.step(0, old), Err(SessionError::Stale { given: old, current: old + 1 }));
    assert_eq!(s.trace().len(), 1);
    let count = s.enabled().steps.len();
    assert_eq!(s.step(9, s.version()), Err(SessionError::NoSuchStep { index: 9, count }));
}

#[test]
fn undo_at_start_fails() {
    let mut s = ping_pong_session();
    assert_eq!(s.undo(), Err(SessionError::NothingToUndo));
    assert_eq!(s.version(), 0);
}

#[test]
fn blocked_steps_are_listed_but_refused() {
    let sys = load_text(
        "class A { signals m; states initial S; transitions t: S -> S { m } }
         class B { states initial S; transitions go: S -> S { / X.m } }
         system Sys { X: A capacity 1; Y: B; }",
        None,
    )
    .unwrap();
    let mut s = Session::new(sys);
    s.step(0, 0).unwrap();
    let listed = s.enabled();
    let go = listed.steps.iter().find(|e| e.step.rule.as_deref() == Some("go")).unwrap();
    assert!(go.blocked.is_some());
    assert!(matches!(s.step(go.index, listed.version), Err(SessionError::Blocked(_))));
}

#[test]
fn seeded_auto_is_repeatable() {
    let sys = load_system(&open_shipped("handover", Some("Full.baseline")).unwrap()).unwrap();
    let mut a = Session::new(sys.clone());
    let mut b = Session::new(sys);
    assert_eq!(a.auto(5, 7), 5);
    assert_eq!(b.auto(5, 7), 5);
    assert_eq!(a.trace(), b.trace());
    assert_eq!(a.version(), 5);
}

#[test]
fn baseline_has_eight_instances() {
    let sys = load_system(&open_shipped("handover", Some("Full.baseline")).unwrap()).unwrap();
    let v = Session::new(sys).state_view();
    assert_eq!(v.system, "Full");
    assert_eq!(v.instances.len(), 8);
}

#[test]
fn shipped_models_open() {
    assert!(open_shipped("nope", None).is_err());
    assert!(open_shipped("ping_pong", Some("baseline")).is_err());
    for sc in shipped_scenarios() {
        load_system(&open_shipped("handover", Some(&sc.to_string())).unwrap()).unwrap();
    }
}

#[test]
fn canonical_json_sorts_keys() {
    let s = ping_pong_session();
    let j = canonical_json(&s.state_view());
    assert!(j.starts_with(r#"{"instances":[{"capacity":"#), "{j}");
    assert!(j.ends_with(r#""system":"PingPong"}"#), "{j}");
}

#[test]
fn rule_source_shows_guards_and_actions() {
    let sys = load_text(
        "class A { signals m(v); vars n := 0; states initial S, T;
           transitions
             t1: S -> T { m(v) [v > n] / n := v + 1; A.m(n) }
             t2: T -> S { } }
         system Sys { A: A; }",
        None,
    )
    .unwrap();
    let m = sys.machine_of(0);
    assert_eq!(rule_source(&m.rules[0].def), "t1: S -> T { m(v) [v > n] / n := v + 1; A.m(n) }");
    assert_eq!(rule_source(&m.rules[1].def), "t2: T -> S { }");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn undo_restores_prior_state(seed in 0u64..300, moves in proptest::collection::vec(0usize..8, 0..40)) {
        let sys = load_system(&random_toy(seed)).unwrap();
        let mut s = Session::new(sys);
        let mut stack = vec![s.current().clone()];
        for m in moves {
            if m == 0 {
                let undone = s.undo().is_ok();
                prop_assert_eq!(undone, stack.len() > 1);
                if undone {
                    stack.pop();
                }
            } else {
                let listed = s.enabled();
                let Some(e) = listed.steps.iter().filter(|e| e.blocked.is_none()).nth(m % 3) else { continue };
                s.step(e.index, listed.version).unwrap();
                stack.push(s.current().clone());
            }
            prop_assert_eq!(s.current(), stack.last().unwrap());
            prop_assert_eq!(s.trace().states.len(), stack.len());
        }
    }

    #[test]
    fn trace_views_replay(seed in 0u64..300, walk in any::<u64>()) {
        let sys = load_system(&random_toy(seed)).unwrap();
        for t in random_walks(&sys, 2, 30, walk) {
            let v = TraceView::new(&sys, &t);
            prop_assert_eq!(v.length, t.len());
            let json = serde_json::to_string(&v).unwrap();
            let back: TraceView = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(replay(&sys, &back.steps).unwrap(), t);
        }
    }
}

mod common;

use common::*;
use csmbench::dsl::load_text;
use csmbench::explorer::*;
use csmbench::kernel::{load_system, ValidatedSystem};
use csmbench::models::{build_scenario, Architecture, ScenarioParams};
use proptest::prelude::*;

fn sys(text: &str) -> ValidatedSystem {
    load_text(text, None).unwrap()
}

fn ping_pong_sys() -> ValidatedSystem {
    load_system(&ping_pong()).unwrap()
}

#[test]
fn ping_pong_space() {
    let sp = explore(&ping_pong_sys(), Limits::none());
    assert_eq!((sp.stats.states, sp.stats.transitions), (3, 3));
    assert!(sp.stats.exhausted);
    assert_eq!(sp.initial(), 0);
    assert!(sp.transitions.iter().all(|&(a, _, b)| (a as usize) < sp.len() && (b as usize) < sp.len()));
}

#[test]
fn machine_without_rules_has_one_state() {
    let sp = explore(&sys("class A { states initial S; } system One { a: A; }"), Limits::none());
    assert_eq!((sp.stats.states, sp.stats.transitions), (1, 0));
}

#[test]
fn deadlock_counterexample_is_shortest() {
    let def = csmbench::dsl::compile(SINK_TOY, None).unwrap();
    let s = load_system(&def).unwrap();
    let r = check_one(&s, &Monitor::Deadlock, Limits::none());
    let Verdict::Violated(t) = &r.verdict else { panic!("{:?}", r.verdict) };
    assert!(t.is_valid(&s));
    assert!(s.successors(t.last_state()).is_empty());
    assert_eq!(Some(t.len()), iddfs_min_depth(&def, &oracle_deadlocked, 30));
}

#[test]
fn deadlock_holds_on_ping_pong() {
    let r = check_one(&ping_pong_sys(), &Monitor::Deadlock, Limits::none());
    assert_eq!(r.verdict, Verdict::Holds);
    assert!(r.stats.exhausted);
}

#[test]
fn deadlock_minimality_matches_iterative_deepening_on_toys() {
    let mut checked = 0;
    for seed in 0..60 {
        let def = random_toy(seed);
        if oracle_enumerate(&def, 2000).is_none() {
            continue;
        }
        let s = load_system(&def).unwrap();
        let r = check_one(&s, &Monitor::Deadlock, Limits::none());
        let expected = iddfs_min_depth(&def, &oracle_deadlocked, 12);
        match &r.verdict {
            Verdict::Violated(t) => {
                assert!(t.is_valid(&s));
                if let Some(d) = expected {
                    assert_eq!(t.len(), d, "seed {seed}");
                    checked += 1;
                } else {
                    assert!(t.len() > 12, "seed {seed}");
                }
            }
            Verdict::Holds => assert_eq!(expected, None, "seed {seed}"),
            v => panic!("seed {seed}: {v:?}"),
        }
    }
    assert!(checked >= 10, "only {checked} toys had a deadlock");
}

#[test]
fn reach_witness_is_shortest() {
    let def = ping_pong();
    let s = load_system(&def).unwrap();
    let m = parse_monitor(&s, "reach(P1@IDLE) after(P1@WAIT)").unwrap();
    let r = check_one(&s, &m, Limits::none());
    let Verdict::Witness(t) = &r.verdict else { panic!("{:?}", r.verdict) };
    assert_eq!(t.len(), 3);
    assert!(t.is_valid(&s));
}

#[test]
fn unreachable_and_unknown_verdicts() {
    let s = ping_pong_sys();
    let never = parse_monitor(&s, "reach(P2@READY & P1@WAIT & P1@IDLE)").unwrap();
    assert_eq!(check_one(&s, &never, Limits::none()).verdict, Verdict::Unreachable);
    let sink = sys(SINK_TOY);
    let limited = Limits {
        max_depth: Some(2),
        ..Limits::none()
    };
    assert_eq!(check_one(&sink, &Monitor::Deadlock, limited).verdict, Verdict::Unknown);
}

#[test]
fn never_after_is_strict() {
    let s = ping_pong_sys();
    // P1 is IDLE initially; the monitor is armed only after a send to P2.
    let m = parse_monitor(&s, "never(P1@IDLE) after(send(P2.ping))").unwrap();
    let Verdict::Violated(t) = check_one(&s, &m, Limits::none()).verdict else { panic!() };
    assert_eq!(t.len(), 3);
}

const RELAY: &str = "
class Src { vars n := 0; states initial S, DONE;
  transitions
    emit: S -> S { [n < 2] / n := n + 1; R.m(n) }
    stop: S -> DONE { [n = 2] } }
class Relay { signals m(v); vars held := 0; states initial R;
  transitions
    pass: R -> R { m(v) [held = 0] / D.m(v) }
    hold: R -> R { m(v) [held = 0 and allow_hold = 1] / held := v }
    swap: R -> R { m(v) [held > 0] / D.m(v); D.m(held); held := 0 } }
class Dst { signals m(v); states initial S; transitions got: S -> S { m(v) } }
system Pipe { A: Src; R: Relay; D: Dst; }
const allow_hold = 1;
";

#[test]
fn order_monitor_finds_reordering() {
    let s = sys(RELAY);
    let m = parse_monitor(&s, "order(R.m($), D.m($))").unwrap();
    let Verdict::Violated(t) = check_one(&s, &m, Limits::none()).verdict else { panic!() };
    assert!(t.is_valid(&s));
    let delivered: Vec<i32> = t
        .steps
        .iter()
        .flat_map(|st| st.sends().iter().filter(|e| e.target == 2).map(|e| e.event.args[0]))
        .collect();
    assert_eq!(delivered, [2, 1]);
}

#[test]
fn order_monitor_holds_without_holding() {
    let mut def = csmbench::dsl::compile(RELAY, None).unwrap();
    def.set_constant("allow_hold", 0);
    let s = load_system(&def).unwrap();
    let m = parse_monitor(&s, "order(R.m($), D.m($))").unwrap();
    assert_eq!(check_one(&s, &m, Limits::none()).verdict, Verdict::Holds);
}

#[test]
fn bounded_delay_counts_clock_events() {
    let s = sys(RELAY);
    // Each Src emission counts as one clock tick.
    let tight = parse_monitor(&s, "delay(R.m($), D.m($), 0) clock(fire(A.emit))").unwrap();
    assert!(matches!(check_one(&s, &tight, Limits::none()).verdict, Verdict::Violated(_)));
    let loose = parse_monitor(&s, "delay(R.m($), D.m($), 1) clock(fire(A.emit))").unwrap();
    assert_eq!(check_one(&s, &loose, Limits::none()).verdict, Verdict::Holds);
}

#[test]
fn monitor_syntax_errors_carry_offsets() {
    let s = ping_pong_sys();
    let e = parse_monitor(&s, "reach(P1@NOWHERE)").unwrap_err();
    assert_eq!(e.offset, 9);
    let e = parse_monitor(&s, "reach(P1@IDLE").unwrap_err();
    assert_eq!(e.offset, 13);
    assert!(parse_monitor(&s, "delay(P2.ping, P1.pong, 3)").is_err(), "default clock needs a Timer");
}

#[test]
fn random_walks_are_reproducible() {
    let s = ping_pong_sys();
    assert_eq!(random_walks(&s, 3, 20, 0), random_walks(&s, 3, 20, 0));
    assert!(random_walks(&s, 3, 20, 0).iter().all(|t| t.len() == 20 && t.is_valid(&s)));
    let sink = sys(SINK_TOY);
    assert!(random_walks(&sink, 5, 50, 1).iter().any(|t| t.len() < 50));
}

#[test]
fn walks_on_the_full_scale_preset_stay_alive() {
    let s = load_system(&build_scenario(Architecture::Full, &ScenarioParams::full_scale()).unwrap()).unwrap();
    for t in random_walks(&s, 3, 400, 11) {
        assert_eq!(t.len(), 400);
    }
}

#[test]
fn exploration_is_deterministic() {
    let def = random_toy(20);
    let s = load_system(&def).unwrap();
    let a = explore(&s, Limits::none());
    let b = explore(&s, Limits::none());
    assert_eq!(a.transitions, b.transitions);
    assert!(a.states().eq(b.states()));
}

#[test]
fn path_to_reaches_target_by_shortest_path() {
    let s = sys(SINK_TOY);
    let sp = explore(&s, Limits::none());
    for id in 0..sp.len() as u32 {
        let t = sp.path_to(&s, id);
        assert!(t.is_valid(&s));
        assert_eq!(t.last_state(), &sp.state(id));
    }
}

#[test]
fn baseline_connection_is_reachable() {
    let s = load_system(&build_scenario(Architecture::Full, &ScenarioParams::desk()).unwrap()).unwrap();
    let m = parse_monitor(&s, "reach(I_CSL@COMMS & C_CSL@COMMS)").unwrap();
    let Verdict::Witness(t) = check_one(&s, &m, Limits::none()).verdict else { panic!() };
    assert!(t.is_valid(&s));
}

#[test]
fn baseline_state_count_is_frozen() {
    let s = load_system(&build_scenario(Architecture::Full, &ScenarioParams::desk()).unwrap()).unwrap();
    let sp = explore(&s, Limits::none());
    assert!(sp.stats.exhausted);
    assert!(sp.failures.is_empty());
    assert_eq!((sp.stats.states, sp.stats.transitions), (349_202, 1_349_917));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn raising_max_states_keeps_a_prefix(seed in 0u64..300, k in 1usize..40) {
        let s = load_system(&random_toy(seed)).unwrap();
        let full = explore(&s, Limits::none());
        let part = explore(&s, Limits { max_states: Some(k), ..Limits::none() });
        prop_assert!(part.len() <= k.max(1));
        prop_assert!(part.states().zip(full.states()).all(|(a, b)| a == b));
        prop_assert_eq!(part.stats.exhausted, part.len() == full.len() && part.transitions == full.transitions);
    }

    #[test]
    fn state_counts_match_oracle(seed in 0u64..300) {
        let def = random_toy(seed);
        if let Some(o) = oracle_enumerate(&def, 5000) {
            let sp = explore(&load_system(&def).unwrap(), Limits::none());
            prop_assert_eq!((sp.stats.states, sp.stats.transitions), (o.states.len(), o.edges.len()));
        }
    }
}

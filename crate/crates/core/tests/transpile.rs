mod common;

use common::*;
use csmbench::dsl::load_text;
use csmbench::kernel::{load_system, ValidatedSystem};
use csmbench::models::{build_scenario, Architecture, ScenarioParams};
use csmbench::transpile::*;

fn full() -> ValidatedSystem {
    load_system(&build_scenario(Architecture::Full, &ScenarioParams::desk()).unwrap()).unwrap()
}

/// Operation headers sit on their own line, indented by two spaces.
fn b_operations(text: &str) -> Vec<&str> {
    let ops = text.split("OPERATIONS\n").nth(1).unwrap_or("");
    ops.lines()
        .filter_map(|l| l.strip_prefix("  ")?.strip_suffix(" ="))
        .collect()
}

fn lnt_processes(text: &str) -> Vec<&str> {
    text.lines()
        .filter_map(|l| l.strip_prefix("process ")?.split([' ', '[']).next())
        .filter(|p| *p != "MAIN")
        .collect()
}

/// The text of one B operation, up to its END.
fn b_operation<'a>(text: &'a str, name: &str) -> &'a str {
    let start = text.find(&format!("\n  {name} =\n")).unwrap();
    let len = text[start..].find("    END").unwrap();
    &text[start..start + len]
}

#[test]
fn empty_machine() {
    let sys = load_text("class A { states initial S; } system One { a: A; }", None).unwrap();
    let cfg = EmitterConfig::default();
    let b = emit_b(&sys, &cfg).unwrap();
    assert!(b.starts_with("MACHINE One\n"));
    assert!(b.contains("a_STATES = {a_S}"));
    assert_eq!(b.matches("_statemachine_STATE : ").count(), 1);
    assert!(!b.contains("OPERATIONS"));
    let lnt = emit_lnt(&sys, &cfg).unwrap();
    assert_eq!(lnt_processes(&lnt), ["a"]);
    assert!(lnt.contains("process MAIN is\n   par\n      a\n   end par"));
}

#[test]
fn ping_pong_has_one_operation_per_rule() {
    // Every state either has an unconditional completion rule or handles
    // its only signal unconditionally, so nothing can be discarded.
    let sys = load_system(&ping_pong()).unwrap();
    let b = emit_b(&sys, &EmitterConfig::default()).unwrap();
    assert_eq!(b_operations(&b), ["P1_serve", "P1_back", "P2_reply"]);
    assert_eq!(expected_b_operations(&sys), 3);
}

#[test]
fn guarded_rules_get_discard_operations() {
    let sys = load_text(
        "class A { signals m(v); vars n := 0; states initial S, T;
           transitions
             t1: S -> T { m(v) [v > n] }
             t2: T -> S { [n = 0] } }
         class B { states initial S; transitions go: S -> S { / X.m(1) } }
         system Sys { X: A; Y: B; }",
        None,
    )
    .unwrap();
    let b = emit_b(&sys, &EmitterConfig::default()).unwrap();
    // S: m is guarded, so it may be dropped. T: the completion rule has a
    // guard, so m may be dropped there as well.
    assert_eq!(b_operations(&b), ["X_t1", "X_t2", "X_discard_S_m", "X_discard_T_m", "Y_go"]);
    let drop_s = b_operation(&b, "X_discard_S_m");
    assert!(drop_s.contains("not((p_v > X_n))"), "{drop_s}");
    let drop_t = b_operation(&b, "X_discard_T_m");
    assert!(drop_t.contains("not((X_n = 0))"), "{drop_t}");
}

#[test]
fn actions_are_folded_into_one_parallel_substitution() {
    let sys = load_text(
        "class A { signals go(k); vars x := 1, y := 0, f := false; states initial S;
           transitions
             r: S -> S { go(k) / x := x + k; y := max(x, -k) % 3; f := not f or x > 2; A.go(y - x) } }
         system Sys { A: A; }",
        None,
    )
    .unwrap();
    let b = emit_b(&sys, &EmitterConfig::default()).unwrap();
    let op = b_operation(&b, "A_r");
    assert!(op.contains("A_x := (A_x + p_k)"), "{op}");
    assert!(op.contains("A_y := EMOD(max({(A_x + p_k), (-p_k)}), 3)"), "{op}");
    assert!(op.contains("A_f := bool(not(A_f = TRUE) or ((A_x + p_k) > 2))"), "{op}");
    // Self-send: pop the head and append in one update.
    assert!(
        op.contains("A_buffer := tail(A_buffer) ^ [(A_sig_go |-> [(EMOD(max({(A_x + p_k), (-p_k)}), 3) - (A_x + p_k))])]"),
        "{op}"
    );
    let lnt = emit_lnt(&sys, &EmitterConfig::default()).unwrap();
    assert!(lnt.contains("x := (x + k);\n"));
    assert!(lnt.contains("y := EMOD (MAX (x, (-k)), 3);\n"));
    assert!(lnt.contains("f := (not f or (x > 2));\n"));
    assert!(lnt.contains("pool := ENQUEUE (pool, A_go ((y - x)));\n"));
}

#[test]
fn name_clashes_are_reported() {
    let sys = load_text(
        "class A { signals m; vars buffer := 0; states initial S; transitions t: S -> S { m } }
         class B { states initial S; transitions go: S -> S { / X.m } }
         system Sys { X: A; Y: B; }",
        None,
    )
    .unwrap();
    let e = emit_b(&sys, &EmitterConfig::default()).unwrap_err();
    assert!(matches!(&e, EmitError::NameClash { name, .. } if name == "X_buffer"), "{e}");
    let sys = load_text(
        "class A { signals m(pool); states initial S; transitions t: S -> S { m(pool) } }
         class B { states initial S; transitions go: S -> S { / X.m(1) } }
         system Sys { X: A; Y: B; }",
        None,
    )
    .unwrap();
    let e = emit_lnt(&sys, &EmitterConfig::default()).unwrap_err();
    assert!(matches!(&e, EmitError::NameClash { name, .. } if name == "pool"), "{e}");
}

#[test]
fn initiator_connect_rule_in_b() {
    let b = emit_b(&full(), &EmitterConfig::default()).unwrap();
    let op = b_operation(&b, "I_CSL_R4_ICSL_connected");
    for part in [
        "I_CSL_statemachine_STATE = I_CSL_WFRESP",
        "first(I_CSL_buffer) = (I_CSL_sig_ISAI_CONNECT_confirm |-> [])",
        "I_CSL_statemachine_STATE := I_CSL_COMMS",
        "I_CSL_connectTimer := 0",
        "I_CSL_buffer := tail(I_CSL_buffer)",
        "I_SAI_buffer := I_SAI_buffer ^ [(I_SAI_sig_ISAI_DATA_request |-> [0])]",
        "IRBC_buffer := IRBC_buffer ^ [(IRBC_sig_IRBC_CONNECT_indication |-> [])]",
    ] {
        assert!(op.contains(part), "missing `{part}` in\n{op}");
    }
}

#[test]
fn initiator_csl_process_accepts_and_steps() {
    let lnt = emit_lnt(&full(), &EmitterConfig::default()).unwrap();
    let start = lnt.find("process I_CSL [").unwrap();
    let body = &lnt[start..start + lnt[start..].find("end process").unwrap()];
    assert!(body.contains("      loop\n         select\n"));
    assert!(body.contains("IRBC_TO_I_CSL (?e); pool := ENQUEUE (pool, e)"));
    assert!(body.contains("I_SAI_TO_I_CSL (?e); pool := ENQUEUE (pool, e)"));
    assert!(body.contains("-- I_CSL.R4_ICSL_connected\n"));
    assert!(body.contains("I_CSL_TO_I_SAI (I_SAI_ISAI_DATA_request (0))"));
}

#[test]
fn full_structure() {
    let sys = full();
    let cfg = EmitterConfig::default();
    let b = emit_b(&sys, &cfg).unwrap();
    let rules: usize = (0..sys.instances.len()).map(|i| sys.machine_of(i).rules.len()).sum();
    let ops = b_operations(&b);
    assert_eq!(ops.len(), expected_b_operations(&sys));
    assert_eq!(ops.iter().filter(|o| !o.contains("_discard_")).count(), rules);
    let lnt = emit_lnt(&sys, &cfg).unwrap();
    let names: Vec<&str> = sys.instances.iter().map(|i| i.name.as_str()).collect();
    assert_eq!(lnt_processes(&lnt), names);
    assert_eq!(lnt.matches("\n   par\n").count(), 1);
}

#[test]
fn emitters_are_deterministic() {
    let sys = full();
    let cfg = EmitterConfig::default();
    assert_eq!(emit_b(&sys, &cfg), emit_b(&full(), &cfg));
    assert_eq!(emit_lnt(&sys, &cfg), emit_lnt(&full(), &cfg));
}

#[test]
fn separator_is_configurable() {
    let cfg = EmitterConfig {
        separator: "__".into(),
        ..EmitterConfig::default()
    };
    let b = emit_b(&load_system(&ping_pong()).unwrap(), &cfg).unwrap();
    assert!(b.contains("P1__statemachine_STATE := P1__WAIT"));
}

#[test]
fn report_on_toys() {
    let cfg = EmitterConfig::default();
    let r = emit_report(&load_system(&ping_pong()).unwrap(), &cfg);
    assert!(r.starts_with("PingPong cross-reference: 3 B operations, 2 LNT processes\n"));
    assert!(r
        .lines()
        .any(|l| l.split_whitespace().eq(["P2.reply", "P2_reply", "P2", "/", "P2.reply"])));
    let sink = load_text(SINK_TOY, None).unwrap();
    let r = emit_report(&sink, &cfg);
    assert_eq!(r.lines().count(), 3 + expected_b_operations(&sink));
}

#[test]
fn full_golden_files() {
    let sys = full();
    let cfg = EmitterConfig::default();
    golden("Full.mch", &emit_b(&sys, &cfg).unwrap());
    golden("Full.lnt", &emit_lnt(&sys, &cfg).unwrap());
    golden("Full.report.txt", &emit_report(&sys, &cfg));
}

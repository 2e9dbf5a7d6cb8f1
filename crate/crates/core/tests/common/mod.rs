//! Independent reference implementations used as test oracles. Nothing here
//! calls into the kernel or the explorer: states are kept by name and
//! expressions are interpreted directly from the system definition.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use csmbench::expr::{BinOp, Expr, UnOp};
use csmbench::kernel::{GlobalState, ValidatedSystem};
use csmbench::system::{
    Action, InstanceDef, MachineDef, SignalDecl, SystemDef, TransitionRule, Trigger, VarDecl,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One instance: control state name, variables by name, pool of named events.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OInst {
    pub state: String,
    pub vars: BTreeMap<String, i64>,
    pub pool: Vec<(String, Vec<i64>)>,
}

pub type OState = Vec<OInst>;

/// `instance/rule-label`, or `instance/discard`.
pub type OLabel = String;

fn eval(e: &Expr, def: &SystemDef, vars: &BTreeMap<String, i64>, params: &HashMap<String, i64>) -> Option<i64> {
    let v = match e {
        Expr::Int(v) => *v,
        Expr::Bool(b) => *b as i64,
        Expr::Var(n) => vars[n],
        Expr::Param(n) => params[n],
        Expr::Const(n) => def.constants.iter().find(|(c, _)| c == n)?.1,
        Expr::Unary(UnOp::Neg, a) => -eval(a, def, vars, params)?,
        Expr::Unary(UnOp::Not, a) => (eval(a, def, vars, params)? == 0) as i64,
        Expr::Binary(op, a, b) => {
            let x = eval(a, def, vars, params)?;
            let y = eval(b, def, vars, params)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Mod => {
                    if y <= 0 {
                        return None;
                    }
                    ((x % y) + y) % y
                }
                BinOp::Min => x.min(y),
                BinOp::Max => x.max(y),
                BinOp::Eq => (x == y) as i64,
                BinOp::Ne => (x != y) as i64,
                BinOp::Lt => (x < y) as i64,
                BinOp::Le => (x <= y) as i64,
                BinOp::Gt => (x > y) as i64,
                BinOp::Ge => (x >= y) as i64,
                BinOp::And => (x != 0 && y != 0) as i64,
                BinOp::Or => (x != 0 || y != 0) as i64,
            }
        }
    };
    (v.abs() <= i32::MAX as i64).then_some(v)
}

fn machine<'a>(def: &'a SystemDef, inst: &InstanceDef) -> &'a MachineDef {
    def.machines.iter().find(|m| m.name == inst.machine).unwrap()
}

pub fn oracle_initial(def: &SystemDef) -> OState {
    def.instances
        .iter()
        .map(|i| {
            let m = machine(def, i);
            let none = BTreeMap::new();
            OInst {
                state: m.initial[0].clone(),
                vars: m
                    .vars
                    .iter()
                    .map(|v| (v.name.clone(), eval(&v.init, def, &none, &HashMap::new()).unwrap()))
                    .collect(),
                pool: Vec::new(),
            }
        })
        .collect()
}

fn fire(def: &SystemDef, g: &OState, i: usize, r: &TransitionRule, params: HashMap<String, i64>, pop: bool) -> Option<OState> {
    let mut h = g.clone();
    if pop {
        h[i].pool.remove(0);
    }
    for a in &r.actions {
        match a {
            Action::Assign { var, value } => {
                let v = eval(value, def, &h[i].vars, &params)?;
                h[i].vars.insert(var.clone(), v);
            }
            Action::Send { target, signal, args } => {
                let j = def.instances.iter().position(|x| &x.name == target).unwrap();
                let vals = args
                    .iter()
                    .map(|a| eval(a, def, &h[i].vars, &params))
                    .collect::<Option<Vec<_>>>()?;
                if h[j].pool.len() >= def.instances[j].capacity {
                    return None;
                }
                h[j].pool.push((signal.clone(), vals));
            }
        }
    }
    h[i].state = r.target.clone();
    Some(h)
}

/// Enabled steps with their successors, in the kernel's documented order.
/// Steps whose effect fails (overflow, evaluation error) are reported with
/// `None`.
pub fn oracle_successors(def: &SystemDef, g: &OState) -> Vec<(OLabel, Option<OState>)> {
    let mut out = Vec::new();
    for (i, inst) in def.instances.iter().enumerate() {
        let m = machine(def, inst);
        let cur = &g[i];
        let no_params = HashMap::new();
        let completions: Vec<&TransitionRule> = m
            .rules
            .iter()
            .filter(|r| r.source == cur.state && r.trigger.is_none())
            .filter(|r| r.guard.as_ref().is_none_or(|e| eval(e, def, &cur.vars, &no_params) == Some(1)))
            .collect();
        if !completions.is_empty() {
            for r in completions {
                out.push((format!("{}/{}", inst.name, r.label), fire(def, g, i, r, HashMap::new(), false)));
            }
            continue;
        }
        let Some((sig, args)) = cur.pool.first() else { continue };
        let mut any = false;
        for r in &m.rules {
            let Some(t) = &r.trigger else { continue };
            if r.source != cur.state || &t.signal != sig {
                continue;
            }
            let params: HashMap<String, i64> = t.params.iter().cloned().zip(args.iter().copied()).collect();
            if r.guard.as_ref().is_none_or(|e| eval(e, def, &cur.vars, &params) == Some(1)) {
                any = true;
                out.push((format!("{}/{}", inst.name, r.label), fire(def, g, i, r, params, true)));
            }
        }
        if !any {
            let mut h = g.clone();
            h[i].pool.remove(0);
            out.push((format!("{}/discard", inst.name), Some(h)));
        }
    }
    out
}

pub struct OracleSpace {
    pub states: Vec<OState>,
    pub index: HashMap<OState, usize>,
    /// (from, label, to), successful steps only.
    pub edges: Vec<(usize, OLabel, usize)>,
    pub failures: usize,
}

/// Worklist enumeration of all reachable states. Gives up (returns `None`)
/// beyond `cap` states.
pub fn oracle_enumerate(def: &SystemDef, cap: usize) -> Option<OracleSpace> {
    let init = oracle_initial(def);
    let mut sp = OracleSpace {
        states: vec![init.clone()],
        index: HashMap::from([(init, 0)]),
        edges: Vec::new(),
        failures: 0,
    };
    let mut work = VecDeque::from([0usize]);
    while let Some(s) = work.pop_front() {
        for (label, succ) in oracle_successors(def, &sp.states[s].clone()) {
            let Some(h) = succ else {
                sp.failures += 1;
                continue;
            };
            let t = match sp.index.get(&h) {
                Some(&t) => t,
                None => {
                    if sp.states.len() >= cap {
                        return None;
                    }
                    sp.states.push(h.clone());
                    sp.index.insert(h, sp.states.len() - 1);
                    work.push_back(sp.states.len() - 1);
                    sp.states.len() - 1
                }
            };
            sp.edges.push((s, label, t));
        }
    }
    Some(sp)
}

/// Minimum number of steps to a state satisfying `goal`, by iterative
/// deepening depth-first search (no visited set across iterations).
pub fn iddfs_min_depth(def: &SystemDef, goal: &dyn Fn(&SystemDef, &OState) -> bool, max_depth: usize) -> Option<usize> {
    fn dfs(def: &SystemDef, g: &OState, left: usize, goal: &dyn Fn(&SystemDef, &OState) -> bool, path: &mut BTreeSet<OState>) -> bool {
        if goal(def, g) {
            return true;
        }
        if left == 0 {
            return false;
        }
        for (_, succ) in oracle_successors(def, g) {
            let Some(h) = succ else { continue };
            if path.contains(&h) {
                continue;
            }
            path.insert(h.clone());
            let hit = dfs(def, &h, left - 1, goal, path);
            path.remove(&h);
            if hit {
                return true;
            }
        }
        false
    }
    let init = oracle_initial(def);
    (0..=max_depth).find(|&d| dfs(def, &init, d, goal, &mut BTreeSet::from([init.clone()])))
}

pub fn oracle_deadlocked(def: &SystemDef, g: &OState) -> bool {
    oracle_successors(def, g).is_empty()
}

/// Translates a kernel configuration into the oracle's named form.
pub fn to_oracle(sys: &ValidatedSystem, g: &GlobalState) -> OState {
    sys.views(g)
        .iter()
        .map(|v| {
            let m = v.machine();
            OInst {
                state: v.state_name().to_string(),
                vars: m
                    .vars
                    .iter()
                    .zip(v.vars)
                    .map(|(d, &x)| (d.name.clone(), x as i64))
                    .collect(),
                pool: v
                    .pool()
                    .iter()
                    .map(|e| (m.signals[e.signal].name.clone(), e.args.iter().map(|&a| a as i64).collect()))
                    .collect(),
            }
        })
        .collect()
}

pub fn kernel_label(sys: &ValidatedSystem, s: &csmbench::kernel::StepRecord) -> OLabel {
    let name = sys.instance_name(s.instance);
    match s.id().rule {
        Some(r) => format!("{name}/{}", sys.rule_label(s.instance, r as usize)),
        None => format!("{name}/discard"),
    }
}

/// Two machines bouncing a token; three reachable states.
pub fn ping_pong() -> SystemDef {
    csmbench::dsl::compile(PING_PONG, None).unwrap()
}

pub const PING_PONG: &str = "\
class Pinger {
  signals pong;
  states initial IDLE, WAIT;
  transitions
    serve: IDLE -> WAIT { / P2.ping }
    back: WAIT -> IDLE { pong }
}
class Ponger {
  signals ping;
  states initial READY;
  transitions
    reply: READY -> READY { ping / P1.pong }
}
system PingPong {
  P1: Pinger;
  P2: Ponger;
}
";

/// Ping-pong whose second machine may also fall into a sink state.
pub const SINK_TOY: &str = "\
class Pinger {
  signals pong;
  states initial IDLE, WAIT;
  transitions
    serve: IDLE -> WAIT { / P2.ping }
    back: WAIT -> IDLE { pong }
}
class Ponger {
  signals ping;
  vars n := 0;
  states initial READY, DEAD;
  transitions
    reply: READY -> READY { ping [n < 2] / n := n + 1; P1.pong }
    die: READY -> DEAD { ping [n = 2] }
}
system Sink {
  P1: Pinger;
  P2: Ponger;
}
";

/// The sink toy with the second machine dying after `k` replies.
pub fn sink_toy(k: u32) -> String {
    SINK_TOY
        .replace("[n < 2]", &format!("[n < {k}]"))
        .replace("[n = 2]", &format!("[n = {k}]"))
}

fn random_actions(rng: &mut ChaCha8Rng, has_var: bool, insts: &[String], n_sig: usize) -> Vec<Action> {
    let mut actions = Vec::new();
    if has_var && rng.gen_bool(0.5) {
        actions.push(Action::Assign {
            var: "x".into(),
            value: Expr::binary(
                BinOp::Mod,
                Expr::binary(BinOp::Add, Expr::var("x"), Expr::Int(1)),
                Expr::Int(3),
            ),
        });
    }
    for _ in 0..[0, 1, 1, 2][rng.gen_range(0..4)] {
        let s = rng.gen_range(0..n_sig);
        let args = if s == 1 {
            vec![if has_var && rng.gen_bool(0.5) {
                Expr::binary(BinOp::Mod, Expr::var("x"), Expr::Int(2))
            } else {
                Expr::Int(rng.gen_range(0..2))
            }]
        } else {
            vec![]
        };
        actions.push(Action::Send {
            target: insts[rng.gen_range(0..insts.len())].clone(),
            signal: format!("g{s}"),
            args,
        });
    }
    actions
}

/// Random small closed system. Values stay small through `%`, and pools
/// are short, so most instances are finite and small.
pub fn random_toy(seed: u64) -> SystemDef {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_inst = rng.gen_range(1..=3);
    let n_sig = 2;
    let inst_names: Vec<String> = (0..n_inst).map(|i| format!("I{i}")).collect();
    let mut machines = Vec::new();
    let mut instances = Vec::new();
    for (k, name) in inst_names.iter().enumerate() {
        let n_states = rng.gen_range(1..=3);
        let states: Vec<String> = (0..n_states).map(|s| format!("S{s}")).collect();
        let signals: Vec<SignalDecl> = (0..n_sig)
            .map(|s| SignalDecl {
                name: format!("g{s}"),
                params: if s == 1 { vec!["p".into()] } else { vec![] },
            })
            .collect();
        let has_var = rng.gen_bool(0.6);
        let vars = if has_var {
            vec![VarDecl {
                name: "x".into(),
                init: Expr::Int(rng.gen_range(0..2)),
            }]
        } else {
            vec![]
        };
        let mut rules = Vec::new();
        // Most (state, signal) pairs get a reaction, some get two.
        for source in &states {
            for sig in 0..n_sig {
                let copies = [0, 1, 1, 1, 2][rng.gen_range(0..5)];
                for _ in 0..copies {
                    let target = states[rng.gen_range(0..n_states)].clone();
                    let params: Vec<String> = if sig == 1 { vec!["p".into()] } else { vec![] };
                    let guard = match rng.gen_range(0..4) {
                        0 if has_var => Some(Expr::binary(BinOp::Lt, Expr::var("x"), Expr::Int(2))),
                        1 if sig == 1 => Some(Expr::binary(BinOp::Eq, Expr::param("p"), Expr::Int(rng.gen_range(0..2)))),
                        _ => None,
                    };
                    let actions = random_actions(&mut rng, has_var, &inst_names, n_sig);
                    rules.push(TransitionRule {
                        label: format!("r{}", rules.len()),
                        source: source.clone(),
                        target,
                        trigger: Some(Trigger { signal: format!("g{sig}"), params }),
                        guard,
                        actions,
                    });
                }
            }
        }
        // An occasional completion rule that moves to another state.
        if n_states > 1 && rng.gen_bool(0.3) {
            rules.push(TransitionRule {
                label: format!("r{}", rules.len()),
                source: states[1].clone(),
                target: states[0].clone(),
                trigger: None,
                guard: None,
                actions: random_actions(&mut rng, has_var, &inst_names, n_sig),
            });
        }
        let mut m = MachineDef::new(&format!("M{k}"));
        m.signals = signals;
        m.vars = vars;
        m.initial = vec![states[0].clone()];
        m.states = states;
        m.rules = rules;
        machines.push(m);
        instances.push(InstanceDef {
            name: name.clone(),
            machine: format!("M{k}"),
            capacity: rng.gen_range(2..=3),
        });
    }
    // Start the system: the first instance fires one triggerless rule from
    // its initial state into a state of its own.
    let m0 = &mut machines[0];
    m0.states.push("START".into());
    m0.initial = vec!["START".into()];
    let target = m0.states[0].clone();
    m0.rules.push(TransitionRule {
        label: "kick".into(),
        source: "START".into(),
        target,
        trigger: None,
        guard: None,
        actions: vec![
            Action::Send {
                target: inst_names[n_inst - 1].clone(),
                signal: "g0".into(),
                args: vec![],
            },
            Action::Send {
                target: inst_names[0].clone(),
                signal: "g1".into(),
                args: vec![Expr::Int(rng.gen_range(0..2))],
            },
        ],
    });
    SystemDef {
        name: format!("Toy{seed}"),
        machines,
        instances,
        constants: vec![],
    }
}

// ---------------------------------------------------------------------------
// Labelled transition systems

use csmbench::lts::Lts;

/// Random LTS over labels a, b, c and the internal action.
pub fn random_lts(seed: u64, max_states: usize) -> Lts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = rng.gen_range(1..=max_states);
    let m = rng.gen_range(0..=3 * states);
    let transitions = (0..m)
        .map(|_| {
            let lab = ["a", "b", "c", "i"][rng.gen_range(0..4)];
            (rng.gen_range(0..states) as u32, lab.to_string(), rng.gen_range(0..states) as u32)
        })
        .collect();
    Lts {
        states,
        initial: rng.gen_range(0..states) as u32,
        transitions,
    }
}

/// Greatest strong bisimulation as a relation matrix, by deleting pairs
/// that fail the transfer condition until nothing changes.
pub fn naive_bisimulation(l: &Lts) -> Vec<Vec<bool>> {
    let n = l.states;
    let succ: Vec<Vec<(&str, usize)>> = (0..n)
        .map(|s| {
            l.transitions
                .iter()
                .filter(|(a, _, _)| *a as usize == s)
                .map(|(_, lab, b)| (lab.as_str(), *b as usize))
                .collect()
        })
        .collect();
    let mut r = vec![vec![true; n]; n];
    loop {
        let mut changed = false;
        for s in 0..n {
            for t in 0..n {
                if !r[s][t] {
                    continue;
                }
                let simulates = |x: usize, y: usize, r: &Vec<Vec<bool>>| {
                    succ[x]
                        .iter()
                        .all(|&(lab, x2)| succ[y].iter().any(|&(l2, y2)| l2 == lab && r[x2][y2]))
                };
                if !simulates(s, t, &r) || !simulates(t, s, &r) {
                    r[s][t] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return r;
        }
    }
}

/// Both LTSs side by side; the second one's states are shifted.
pub fn disjoint_union(a: &Lts, b: &Lts) -> Lts {
    let k = a.states as u32;
    let mut transitions = a.transitions.clone();
    transitions.extend(b.transitions.iter().map(|(x, l, y)| (x + k, l.clone(), y + k)));
    Lts {
        states: a.states + b.states,
        initial: a.initial,
        transitions,
    }
}

pub fn naive_bisimilar(a: &Lts, b: &Lts) -> bool {
    let u = disjoint_union(a, b);
    naive_bisimulation(&u)[a.initial as usize][a.states + b.initial as usize]
}

/// Reflexive-transitive tau reachability, by relaxation to a fixpoint.
pub fn naive_tau_star(l: &Lts) -> Vec<Vec<bool>> {
    let n = l.states;
    let mut r = vec![vec![false; n]; n];
    for (s, row) in r.iter_mut().enumerate() {
        row[s] = true;
    }
    loop {
        let mut changed = false;
        for (a, lab, b) in &l.transitions {
            if lab != "i" {
                continue;
            }
            for s in 0..n {
                if r[s][*a as usize] && !r[s][*b as usize] {
                    r[s][*b as usize] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return r;
        }
    }
}

/// States reachable from `from` by tau* label tau*.
pub fn naive_weak_after(l: &Lts, from: &BTreeSet<u32>, label: &str) -> BTreeSet<u32> {
    let star = naive_tau_star(l);
    let n = l.states;
    let pre: BTreeSet<usize> = (0..n).filter(|&t| from.iter().any(|&s| star[s as usize][t])).collect();
    let mid: BTreeSet<usize> = l
        .transitions
        .iter()
        .filter(|(a, lab, _)| lab == label && pre.contains(&(*a as usize)))
        .map(|(_, _, b)| *b as usize)
        .collect();
    (0..n).filter(|&t| mid.iter().any(|&s| star[s][t])).map(|t| t as u32).collect()
}

pub fn naive_tau_closure(l: &Lts, from: &BTreeSet<u32>) -> BTreeSet<u32> {
    let star = naive_tau_star(l);
    (0..l.states as u32).filter(|&t| from.iter().any(|&s| star[s as usize][t as usize])).collect()
}

/// Whether an infinite tau sequence starts at `s`: some tau-reachable state
/// returns to itself in one or more tau steps.
pub fn naive_divergent(l: &Lts, s: u32) -> bool {
    let star = naive_tau_star(l);
    let n = l.states;
    (0..n).filter(|&t| star[s as usize][t]).any(|t| {
        l.transitions
            .iter()
            .any(|(a, lab, b)| lab == "i" && *a as usize == t && star[*b as usize][t])
    })
}

/// Compares against `crates/core/tests/golden/<name>`; `UPDATE_GOLDEN=1`
/// rewrites it. Also used from the cli crate's tests.
pub fn golden(name: &str, actual: &str) {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{name} differs from the golden file");
}

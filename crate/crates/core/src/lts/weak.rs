use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{Lts, TAU};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct StateFlags {
    /// Some member can perform an infinite sequence of internal steps.
    pub divergent: bool,
    /// Some member has no outgoing transition at all.
    pub deadlock: bool,
}

/// Deterministic automaton over visible labels. State `k` of `lts` stands
/// for the tau-closed set `members[k]` of original states.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct WeakTraces {
    pub lts: Lts,
    pub flags: Vec<StateFlags>,
    pub members: Vec<Vec<u32>>,
}

impl WeakTraces {
    /// The `{state: {divergent, deadlock}}` table.
    pub fn flag_table(&self) -> BTreeMap<u32, StateFlags> {
        self.flags.iter().enumerate().map(|(i, f)| (i as u32, *f)).collect()
    }
}

/// States that lie on a tau cycle. Tau-closed sets containing a state that
/// can reach such a cycle also contain the cycle itself.
fn on_tau_cycle(l: &Lts) -> Vec<bool> {
    let mut g = DiGraph::<(), ()>::with_capacity(l.states, 0);
    let nodes: Vec<_> = (0..l.states).map(|_| g.add_node(())).collect();
    let mut out = vec![false; l.states];
    for (a, lab, b) in &l.transitions {
        if lab == TAU {
            g.add_edge(nodes[*a as usize], nodes[*b as usize], ());
            if a == b {
                out[*a as usize] = true;
            }
        }
    }
    for scc in tarjan_scc(&g) {
        if scc.len() > 1 {
            for n in scc {
                out[n.index()] = true;
            }
        }
    }
    out
}

pub fn weak_traces(l: &Lts) -> WeakTraces {
    let succ = l.successors();
    let cyclic = on_tau_cycle(l);
    let closure = |seed: BTreeSet<u32>| -> Vec<u32> {
        let mut seen = seed.clone();
        let mut stack: Vec<u32> = seed.into_iter().collect();
        while let Some(s) = stack.pop() {
            for &(lab, t) in &succ[s as usize] {
                if lab == TAU && seen.insert(t) {
                    stack.push(t);
                }
            }
        }
        seen.into_iter().collect()
    };

    let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut members: Vec<Vec<u32>> = Vec::new();
    let mut transitions = Vec::new();
    let mut queue = VecDeque::new();
    if l.states > 0 {
        let init = closure(BTreeSet::from([l.initial]));
        index.insert(init.clone(), 0);
        members.push(init);
        queue.push_back(0u32);
    }
    while let Some(m) = queue.pop_front() {
        let mut by_label: BTreeMap<&str, BTreeSet<u32>> = BTreeMap::new();
        for &s in &members[m as usize] {
            for &(lab, t) in &succ[s as usize] {
                if lab != TAU {
                    by_label.entry(lab).or_default().insert(t);
                }
            }
        }
        for (lab, targets) in by_label {
            let set = closure(targets);
            let id = match index.get(&set) {
                Some(&id) => id,
                None => {
                    let id = members.len() as u32;
                    index.insert(set.clone(), id);
                    members.push(set);
                    queue.push_back(id);
                    id
                }
            };
            transitions.push((m, lab.to_string(), id));
        }
    }

    let flags = members
        .iter()
        .map(|set| StateFlags {
            divergent: set.iter().any(|&s| cyclic[s as usize]),
            deadlock: set.iter().any(|&s| succ[s as usize].is_empty()),
        })
        .collect();
    WeakTraces {
        lts: Lts {
            states: members.len(),
            initial: 0,
            transitions,
        },
        flags,
        members,
    }
}

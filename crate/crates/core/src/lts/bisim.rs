use std::collections::{BTreeSet, HashMap};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::Lts;

/// Edges with interned labels; label ids follow lexical label order.
struct Graph {
    n: usize,
    labels: Vec<String>,
    edges: Vec<(u32, u32, u32)>,
}

impl Graph {
    fn new(parts: &[&Lts]) -> Graph {
        let names: BTreeSet<&str> = parts.iter().flat_map(|l| l.labels()).collect();
        let index: HashMap<&str, u32> = names.iter().enumerate().map(|(i, l)| (*l, i as u32)).collect();
        let mut edges = Vec::new();
        let mut offset = 0u32;
        for l in parts {
            edges.extend(
                l.transitions
                    .iter()
                    .map(|(a, lab, b)| (a + offset, index[lab.as_str()], b + offset)),
            );
            offset += l.states as u32;
        }
        Graph {
            n: offset as usize,
            labels: names.into_iter().map(str::to_string).collect(),
            edges,
        }
    }

    /// Sorted, deduplicated `(label, target)` per state.
    fn successors(&self) -> Vec<Vec<(u32, u32)>> {
        let mut out = vec![Vec::new(); self.n];
        for &(a, l, b) in &self.edges {
            out[a as usize].push((l, b));
        }
        for v in &mut out {
            v.sort_unstable();
            v.dedup();
        }
        out
    }
}

/// Coarsest stable partition. Blocks live as contiguous ranges of `elems`;
/// a split moves the marked states to the end of their range, so its cost
/// is proportional to the number of marked states.
fn coarsest_partition(g: &Graph) -> Vec<u32> {
    let n = g.n;
    if n == 0 {
        return Vec::new();
    }
    let mut preds: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
    for &(a, l, b) in &g.edges {
        preds[b as usize].push((l, a));
    }

    let mut elems: Vec<u32> = (0..n as u32).collect();
    let mut pos: Vec<u32> = (0..n as u32).collect();
    let mut block_of = vec![0u32; n];
    let mut start = vec![0u32];
    let mut end = vec![n as u32];
    let mut marked = vec![0u32];
    let mut queued = vec![true];
    let mut work = vec![0u32];
    let mut touched = Vec::new();
    let mut pairs = Vec::new();

    while let Some(b) = work.pop() {
        queued[b as usize] = false;
        pairs.clear();
        for i in start[b as usize]..end[b as usize] {
            pairs.extend_from_slice(&preds[elems[i as usize] as usize]);
        }
        pairs.sort_unstable();
        pairs.dedup();
        for group in pairs.chunk_by(|x, y| x.0 == y.0) {
            for &(_, p) in group {
                let bp = block_of[p as usize] as usize;
                if marked[bp] == 0 {
                    touched.push(bp);
                }
                // Swap p into the marked tail of its block.
                let dst = end[bp] - 1 - marked[bp];
                let src = pos[p as usize];
                let other = elems[dst as usize];
                elems.swap(src as usize, dst as usize);
                pos[other as usize] = src;
                pos[p as usize] = dst;
                marked[bp] += 1;
            }
            for bp in touched.drain(..) {
                let m = marked[bp];
                marked[bp] = 0;
                if m == end[bp] - start[bp] {
                    continue;
                }
                let nb = start.len() as u32;
                start.push(end[bp] - m);
                end.push(end[bp]);
                end[bp] -= m;
                marked.push(0);
                queued.push(true);
                for i in start[nb as usize]..end[nb as usize] {
                    block_of[elems[i as usize] as usize] = nb;
                }
                if !queued[bp] {
                    queued[bp] = true;
                    work.push(bp as u32);
                }
                work.push(nb);
            }
        }
    }
    block_of
}

/// Renumbers blocks by their minimal member.
fn canonical(block_of: &[u32]) -> (Vec<u32>, usize) {
    let mut rename: HashMap<u32, u32> = HashMap::new();
    let out = block_of
        .iter()
        .map(|b| {
            let next = rename.len() as u32;
            *rename.entry(*b).or_insert(next)
        })
        .collect();
    (out, rename.len())
}

/// Strong-bisimulation quotient and the block of every original state.
pub fn minimize_strong(l: &Lts) -> (Lts, Vec<u32>) {
    let g = Graph::new(&[l]);
    let (map, blocks) = canonical(&coarsest_partition(&g));
    let mut transitions: Vec<(u32, String, u32)> = l
        .transitions
        .iter()
        .map(|(a, lab, b)| (map[*a as usize], lab.clone(), map[*b as usize]))
        .collect();
    transitions.sort();
    transitions.dedup();
    let q = Lts {
        states: blocks,
        initial: map.get(l.initial as usize).copied().unwrap_or(0),
        transitions,
    };
    (q, map)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A distinguishing experiment: both systems perform `labels`, reaching
/// states where `failing` is enabled on `side` only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Witness {
    pub labels: Vec<String>,
    pub left_path: Vec<u32>,
    pub right_path: Vec<u32>,
    pub failing: String,
    pub side: Side,
    pub left_enabled: Vec<String>,
    pub right_enabled: Vec<String>,
}

impl Witness {
    /// Replays both paths and rechecks the enabled sets at their ends.
    pub fn is_valid(&self, left: &Lts, right: &Lts) -> bool {
        fn walk(l: &Lts, path: &[u32], labels: &[String], enabled: &[String]) -> bool {
            if path.len() != labels.len() + 1 || path[0] != l.initial {
                return false;
            }
            let steps_ok = path.windows(2).zip(labels).all(|(w, lab)| {
                l.transitions
                    .iter()
                    .any(|(a, x, b)| *a == w[0] && x == lab && *b == w[1])
            });
            let last = *path.last().unwrap();
            let actual: BTreeSet<&str> = l
                .transitions
                .iter()
                .filter(|(a, _, _)| *a == last)
                .map(|(_, x, _)| x.as_str())
                .collect();
            steps_ok && actual.into_iter().eq(enabled.iter().map(String::as_str))
        }
        let in_left = self.left_enabled.contains(&self.failing);
        let in_right = self.right_enabled.contains(&self.failing);
        let side_ok = match self.side {
            Side::Left => in_left && !in_right,
            Side::Right => in_right && !in_left,
        };
        side_ok
            && walk(left, &self.left_path, &self.labels, &self.left_enabled)
            && walk(right, &self.right_path, &self.labels, &self.right_enabled)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum Equivalence {
    Equivalent,
    Distinguished(Witness),
}

/// Decides strong bisimilarity of the initial states on the disjoint union.
pub fn equiv_strong(a: &Lts, b: &Lts) -> Equivalence {
    let g = Graph::new(&[a, b]);
    let ia = a.initial as usize;
    let ib = b.initial as usize + a.states;
    let blocks = coarsest_partition(&g);
    if blocks[ia] == blocks[ib] {
        return Equivalence::Equivalent;
    }
    Equivalence::Distinguished(witness(&g, ia, ib, a.states))
}

/// Signature refinement, keeping every level, until `ia` and `ib` separate.
/// Level k relates states that agree on all experiments of depth k.
fn levels(succ: &[Vec<(u32, u32)>], ia: usize, ib: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; succ.len()]];
    loop {
        let prev = out.last().unwrap();
        let mut ids: HashMap<(u32, Vec<(u32, u32)>), u32> = HashMap::new();
        let next: Vec<u32> = (0..succ.len())
            .map(|s| {
                let mut sig: Vec<(u32, u32)> = succ[s].iter().map(|&(l, t)| (l, prev[t as usize])).collect();
                sig.sort_unstable();
                sig.dedup();
                let fresh = ids.len() as u32;
                *ids.entry((prev[s], sig)).or_insert(fresh)
            })
            .collect();
        let separated = next[ia] != next[ib];
        let stable = ids.len() == prev.iter().collect::<BTreeSet<_>>().len();
        out.push(next);
        if separated || stable {
            return out;
        }
    }
}

fn witness(g: &Graph, ia: usize, ib: usize, offset: usize) -> Witness {
    let succ = g.successors();
    let lv = levels(&succ, ia, ib);
    let sep = |s: usize, t: usize| (1..lv.len()).find(|&k| lv[k][s] != lv[k][t]);
    let enabled = |s: usize| -> Vec<u32> {
        let mut v: Vec<u32> = succ[s].iter().map(|&(l, _)| l).collect();
        v.dedup();
        v
    };

    let (mut s, mut t) = (ia, ib);
    let mut k = sep(s, t).expect("initial states are not bisimilar");
    let mut labels = Vec::new();
    let mut left_path = vec![s as u32];
    let mut right_path = vec![(t - offset) as u32];
    while k > 1 {
        // Some successor on one side has no match at level k-1 on the other.
        let below = &lv[k - 1];
        let unmatched = |x: usize, y: usize| {
            succ[x].iter().find_map(|&(l, x2)| {
                let matches: Vec<u32> = succ[y].iter().filter(|&&(l2, _)| l2 == l).map(|&(_, y2)| y2).collect();
                (!matches.iter().any(|&y2| below[y2 as usize] == below[x2 as usize]))
                    .then(|| (l, x2, matches.into_iter().min().expect("enabled sets agree below level 1")))
            })
        };
        let (l, s2, t2) = match unmatched(s, t) {
            Some((l, s2, t2)) => (l, s2, t2),
            None => {
                let (l, t2, s2) = unmatched(t, s).expect("states separate at this level");
                (l, s2, t2)
            }
        };
        labels.push(g.labels[l as usize].clone());
        s = s2 as usize;
        t = t2 as usize;
        left_path.push(s as u32);
        right_path.push((t - offset) as u32);
        k = sep(s, t).expect("successors separate below the current level");
    }

    let (es, et) = (enabled(s), enabled(t));
    let (failing, side) = match es.iter().find(|l| !et.contains(l)) {
        Some(l) => (*l, Side::Left),
        None => (*et.iter().find(|l| !es.contains(l)).unwrap(), Side::Right),
    };
    let names = |v: Vec<u32>| v.into_iter().map(|l| g.labels[l as usize].clone()).collect();
    Witness {
        labels,
        left_path,
        right_path,
        failing: g.labels[failing as usize].clone(),
        side,
        left_enabled: names(es),
        right_enabled: names(et),
    }
}

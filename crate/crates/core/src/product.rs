//! Explicit reachable product graph shared by composition and model checking.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lts::{Label, LabelId, LabelKind, Network, ProductState, StateId, Transition};

/// A component transition taken as part of a product transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Move {
    pub process: usize,
    pub transition: Transition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub label: Label,
    pub target: usize,
    pub moves: Vec<Move>,
}

#[derive(Debug, Clone, Default)]
pub struct ExploreOptions {
    pub state_bound: usize,
    /// Per-process state ranks ordering successor exploration; identity when absent.
    pub ranks: Option<Vec<Vec<usize>>>,
}

/// States are numbered in breadth-first discovery order; `parent` is the BFS tree.
#[derive(Debug, Clone)]
pub struct ProductGraph {
    pub states: Vec<ProductState>,
    pub initial: Vec<usize>,
    pub edges: Vec<Vec<Edge>>,
    pub parent: Vec<Option<(usize, usize)>>,
}

impl ProductGraph {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// Component transitions of process `proc` used by some reachable product transition.
    pub fn used_transitions(&self, proc: usize) -> BTreeSet<Transition> {
        self.edges
            .iter()
            .flatten()
            .flat_map(|e| e.moves.iter())
            .filter(|m| m.process == proc)
            .map(|m| m.transition)
            .collect()
    }

    /// BFS-tree path from an initial state to `state`, as (source, edge index) pairs.
    pub fn path_to(&self, mut state: usize) -> Vec<(usize, usize)> {
        let mut path = Vec::new();
        while let Some((src, ei)) = self.parent[state] {
            path.push((src, ei));
            state = src;
        }
        path.reverse();
        path
    }
}

struct ProcInfo {
    adjacency: Vec<Vec<(LabelId, StateId)>>,
    listeners: Vec<Vec<(usize, LabelId)>>,
    monitor: bool,
}

pub fn explore(net: &Network, opts: &ExploreOptions) -> Result<ProductGraph> {
    let infos = prepare(net, opts.ranks.as_deref())?;
    let rank = |i: usize, s: StateId| match &opts.ranks {
        Some(r) => r[i][s],
        None => s,
    };

    let mut graph = ProductGraph {
        states: Vec::new(),
        initial: Vec::new(),
        edges: Vec::new(),
        parent: Vec::new(),
    };
    let mut index: HashMap<Vec<StateId>, usize> = HashMap::new();
    let mut queue = VecDeque::new();

    let init_sets: Vec<Vec<StateId>> = net
        .processes()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut v = p.lts.initial().to_vec();
            v.sort_by_key(|&s| rank(i, s));
            v
        })
        .collect();
    for locs in cartesian(&init_sets) {
        if index.contains_key(&locs) {
            continue;
        }
        let id = add_state(&mut graph, &mut index, locs, None, opts.state_bound)?;
        graph.initial.push(id);
        queue.push_back(id);
    }

    while let Some(src) = queue.pop_front() {
        let locs = graph.states[src].locations.clone();
        let succ = successors(net, &infos, &locs);
        let mut edges = Vec::with_capacity(succ.len());
        for (label, target, moves) in succ {
            let tid = match index.get(&target) {
                Some(&t) => t,
                None => {
                    let ei = edges.len();
                    let t = add_state(&mut graph, &mut index, target, Some((src, ei)), opts.state_bound)?;
                    queue.push_back(t);
                    t
                }
            };
            edges.push(Edge {
                label,
                target: tid,
                moves,
            });
        }
        graph.edges[src] = edges;
    }
    Ok(graph)
}

fn add_state(
    graph: &mut ProductGraph,
    index: &mut HashMap<Vec<StateId>, usize>,
    locs: Vec<StateId>,
    parent: Option<(usize, usize)>,
    bound: usize,
) -> Result<usize> {
    if graph.states.len() >= bound {
        return Err(Error::StateBound { bound });
    }
    let id = graph.states.len();
    index.insert(locs.clone(), id);
    graph.states.push(ProductState { locations: locs });
    graph.edges.push(Vec::new());
    graph.parent.push(parent);
    Ok(id)
}

fn prepare(net: &Network, ranks: Option<&[Vec<usize>]>) -> Result<Vec<ProcInfo>> {
    let mut owner: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, p) in net.processes().iter().enumerate() {
        for l in p.lts.labels() {
            if l.kind() == LabelKind::Output {
                if let Some(&j) = owner.get(l.base()) {
                    return Err(Error::AmbiguousOutput {
                        base: l.base().to_string(),
                        first: net.process(j).lts.name().to_string(),
                        second: p.lts.name().to_string(),
                    });
                }
                owner.insert(l.base(), i);
            }
        }
    }
    if let Some(r) = ranks {
        if r.len() != net.len()
            || r.iter()
                .zip(net.processes())
                .any(|(r, p)| r.len() != p.lts.num_states())
        {
            return Err(Error::InvalidNetwork("rank vector shape mismatch".into()));
        }
    }
    let mut infos = Vec::with_capacity(net.len());
    for (i, p) in net.processes().iter().enumerate() {
        let n = p.lts.num_states();
        let mut adjacency = vec![Vec::new(); n];
        for t in p.lts.transitions() {
            adjacency[t.src].push((t.label, t.dst));
        }
        for adj in &mut adjacency {
            adj.sort_by_key(|&(l, d)| (l, ranks.map_or(d, |r| r[i][d])));
        }
        let listeners = p
            .lts
            .labels()
            .iter()
            .map(|l| {
                if l.kind() != LabelKind::Output {
                    return Vec::new();
                }
                let wanted = Label::input(l.base());
                net.processes()
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .filter_map(|(j, q)| q.lts.label_id(&wanted).map(|lj| (j, lj)))
                    .collect()
            })
            .collect();
        infos.push(ProcInfo {
            adjacency,
            listeners,
            monitor: p.role.is_monitor(),
        });
    }
    Ok(infos)
}

fn successors(
    net: &Network,
    infos: &[ProcInfo],
    locs: &[StateId],
) -> Vec<(Label, Vec<StateId>, Vec<Move>)> {
    let mut out = Vec::new();
    for (i, info) in infos.iter().enumerate() {
        let lts = &net.process(i).lts;
        for &(label, dst) in &info.adjacency[locs[i]] {
            let l = lts.label(label);
            let own = Move {
                process: i,
                transition: Transition::new(locs[i], label, dst),
            };
            match l.kind() {
                LabelKind::Input => {}
                LabelKind::Internal => {
                    let mut target = locs.to_vec();
                    target[i] = dst;
                    out.push((l.clone(), target, vec![own]));
                }
                LabelKind::Output => {
                    // Per listener: the possible moves; `None` means a monitor staying put.
                    let mut choices: Vec<Vec<Option<Move>>> = Vec::new();
                    let mut blocked = false;
                    for &(j, lj) in &info.listeners[label] {
                        let opts: Vec<Option<Move>> = infos[j].adjacency[locs[j]]
                            .iter()
                            .filter(|&&(ll, _)| ll == lj)
                            .map(|&(_, d)| {
                                Some(Move {
                                    process: j,
                                    transition: Transition::new(locs[j], lj, d),
                                })
                            })
                            .collect();
                        if opts.is_empty() {
                            if infos[j].monitor {
                                choices.push(vec![None]);
                            } else {
                                blocked = true;
                                break;
                            }
                        } else {
                            choices.push(opts);
                        }
                    }
                    if blocked {
                        continue;
                    }
                    let out_label = Label::output(l.base());
                    for combo in cartesian(&choices) {
                        let mut target = locs.to_vec();
                        target[i] = dst;
                        let mut moves = vec![own];
                        for m in combo.into_iter().flatten() {
                            target[m.process] = m.transition.dst;
                            moves.push(m);
                        }
                        moves.sort();
                        out.push((out_label.clone(), target, moves));
                    }
                }
            }
        }
    }
    out
}

/// Cartesian product with the last component varying fastest.
pub(crate) fn cartesian<T: Clone>(sets: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut acc: Vec<Vec<T>> = vec![Vec::new()];
    for set in sets {
        let mut next = Vec::with_capacity(acc.len() * set.len());
        for prefix in &acc {
            for x in set {
                let mut v = prefix.clone();
                v.push(x.clone());
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

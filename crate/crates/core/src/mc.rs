//! Explicit-state checking of safety and Büchi liveness monitors.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lts::{Label, Network, ProductState, Role, StateId, Transition};
use crate::product::{explore, ExploreOptions, Move, ProductGraph};

pub const DEFAULT_STATE_BOUND: usize = 1_000_000;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Specification {
    /// (monitor process index, state) pairs that are safety errors.
    pub safety_error: BTreeSet<(usize, StateId)>,
    /// (monitor process index, state) pairs that are Büchi accepting.
    pub buchi_accepting: BTreeSet<(usize, StateId)>,
    /// Treat a reachable product state without successors as a violation.
    #[serde(default)]
    pub deadlock_is_violation: bool,
}

impl Specification {
    pub fn validate(&self, net: &Network) -> Result<()> {
        let check = |set: &BTreeSet<(usize, StateId)>, role: Role| {
            for &(i, s) in set {
                if i >= net.len() {
                    return Err(Error::InvalidSpec(format!("process index {i} out of range")));
                }
                let p = net.process(i);
                if p.role != role {
                    return Err(Error::InvalidSpec(format!(
                        "process `{}` is not a {role:?}",
                        p.lts.name()
                    )));
                }
                if s >= p.lts.num_states() {
                    return Err(Error::InvalidSpec(format!(
                        "state {s} out of range in `{}`",
                        p.lts.name()
                    )));
                }
            }
            Ok(())
        };
        check(&self.safety_error, Role::SafetyMonitor)?;
        check(&self.buchi_accepting, Role::LivenessMonitor)
    }

    fn hits(set: &BTreeSet<(usize, StateId)>, ps: &ProductState) -> bool {
        set.iter().any(|&(i, s)| ps.locations[i] == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub label: Label,
    pub moves: Vec<Move>,
    pub target: ProductState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub start: ProductState,
    pub steps: Vec<Step>,
}

impl Trace {
    pub fn end(&self) -> &ProductState {
        self.steps.last().map_or(&self.start, |s| &s.target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lasso {
    pub stem: Trace,
    pub cycle: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Evidence {
    Safety(Trace),
    Deadlock(Trace),
    Liveness(Lasso),
}

impl Evidence {
    /// All component moves along the counterexample.
    pub fn moves(&self) -> impl Iterator<Item = &Move> {
        let (trace, cycle): (&Trace, &[Step]) = match self {
            Evidence::Safety(t) | Evidence::Deadlock(t) => (t, &[]),
            Evidence::Liveness(l) => (&l.stem, &l.cycle),
        };
        trace.steps.iter().chain(cycle).flat_map(|s| s.moves.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Ok,
    Violation(Evidence),
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok)
    }

    pub fn evidence(&self) -> Option<&Evidence> {
        match self {
            Verdict::Ok => None,
            Verdict::Violation(e) => Some(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McOptions {
    pub state_bound: usize,
    pub ranks: Option<Vec<Vec<usize>>>,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            state_bound: DEFAULT_STATE_BOUND,
            ranks: None,
        }
    }
}

impl McOptions {
    pub fn with_bound(state_bound: usize) -> McOptions {
        McOptions {
            state_bound,
            ranks: None,
        }
    }

    pub(crate) fn explore_options(&self) -> ExploreOptions {
        ExploreOptions {
            state_bound: self.state_bound,
            ranks: self.ranks.clone(),
        }
    }
}

pub fn mc(net: &Network, spec: &Specification, opts: &McOptions) -> Result<Verdict> {
    check(net, spec, opts).map(|(v, _)| v)
}

/// Like [`mc`] but also returns the explored product.
pub fn check(net: &Network, spec: &Specification, opts: &McOptions) -> Result<(Verdict, ProductGraph)> {
    spec.validate(net)?;
    let graph = explore(net, &opts.explore_options())?;
    let verdict = decide(&graph, spec);
    Ok((verdict, graph))
}

fn decide(graph: &ProductGraph, spec: &Specification) -> Verdict {
    if let Some(s) = (0..graph.num_states()).find(|&s| Specification::hits(&spec.safety_error, &graph.states[s])) {
        return Verdict::Violation(Evidence::Safety(trace_to(graph, s)));
    }
    if spec.deadlock_is_violation {
        if let Some(s) = (0..graph.num_states()).find(|&s| graph.edges[s].is_empty()) {
            return Verdict::Violation(Evidence::Deadlock(trace_to(graph, s)));
        }
    }
    let accepting: Vec<bool> = graph
        .states
        .iter()
        .map(|ps| Specification::hits(&spec.buchi_accepting, ps))
        .collect();
    if !accepting.iter().any(|&a| a) {
        return Verdict::Ok;
    }
    match nested_dfs(graph, &accepting) {
        Some(seed) => Verdict::Violation(Evidence::Liveness(lasso_through(graph, seed))),
        None => Verdict::Ok,
    }
}

fn step(graph: &ProductGraph, src: usize, ei: usize) -> Step {
    let e = &graph.edges[src][ei];
    Step {
        label: e.label.clone(),
        moves: e.moves.clone(),
        target: graph.states[e.target].clone(),
    }
}

fn trace_to(graph: &ProductGraph, s: usize) -> Trace {
    let path = graph.path_to(s);
    let start = path.first().map_or(s, |&(src, _)| src);
    Trace {
        start: graph.states[start].clone(),
        steps: path.iter().map(|&(src, ei)| step(graph, src, ei)).collect(),
    }
}

/// Returns an accepting state lying on a reachable cycle, if any.
fn nested_dfs(graph: &ProductGraph, accepting: &[bool]) -> Option<usize> {
    let n = graph.num_states();
    let mut outer = vec![false; n];
    let mut inner = vec![false; n];
    for &init in &graph.initial {
        if outer[init] {
            continue;
        }
        outer[init] = true;
        let mut stack = vec![(init, 0usize)];
        while let Some(top) = stack.last_mut() {
            let (s, k) = *top;
            if k < graph.edges[s].len() {
                top.1 += 1;
                let t = graph.edges[s][k].target;
                if !outer[t] {
                    outer[t] = true;
                    stack.push((t, 0));
                }
            } else {
                stack.pop();
                if accepting[s] && inner_dfs(graph, s, &mut inner) {
                    return Some(s);
                }
            }
        }
    }
    None
}

fn inner_dfs(graph: &ProductGraph, seed: usize, visited: &mut [bool]) -> bool {
    let mut stack = vec![(seed, 0usize)];
    while let Some(top) = stack.last_mut() {
        let (s, k) = *top;
        if k < graph.edges[s].len() {
            top.1 += 1;
            let t = graph.edges[s][k].target;
            if t == seed {
                return true;
            }
            if !visited[t] {
                visited[t] = true;
                stack.push((t, 0));
            }
        } else {
            stack.pop();
        }
    }
    false
}

/// Shortest cycle through `seed`, entered at its cycle state closest to the initial states.
fn lasso_through(graph: &ProductGraph, seed: usize) -> Lasso {
    let n = graph.num_states();
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([seed]);
    seen[seed] = true;
    let mut closing = None;
    'bfs: while let Some(s) = queue.pop_front() {
        for (ei, e) in graph.edges[s].iter().enumerate() {
            if e.target == seed {
                closing = Some((s, ei));
                break 'bfs;
            }
            if !seen[e.target] {
                seen[e.target] = true;
                parent[e.target] = Some((s, ei));
                queue.push_back(e.target);
            }
        }
    }
    let (mut s, ei) = closing.expect("seed lies on a cycle");
    let mut cycle = vec![(s, ei)];
    while s != seed {
        let (p, pe) = parent[s].expect("bfs tree");
        cycle.push((p, pe));
        s = p;
    }
    cycle.reverse();
    let entry = (0..cycle.len())
        .min_by_key(|&i| cycle[i].0)
        .expect("nonempty cycle");
    cycle.rotate_left(entry);
    let entry_state = cycle[0].0;
    Lasso {
        stem: trace_to(graph, entry_state),
        cycle: cycle.iter().map(|&(src, ei)| step(graph, src, ei)).collect(),
    }
}

/// Transitions of process `proc` that take part in no reachable product transition.
pub fn dead_transitions(net: &Network, proc: usize, opts: &McOptions) -> Result<BTreeSet<Transition>> {
    let graph = explore(net, &opts.explore_options())?;
    Ok(dead_in(net, &graph, proc))
}

pub fn dead_in(net: &Network, graph: &ProductGraph, proc: usize) -> BTreeSet<Transition> {
    let used = graph.used_transitions(proc);
    net.process(proc)
        .lts
        .transitions()
        .difference(&used)
        .copied()
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::lts::{Lts, Process};

    /// Replays evidence against the network, independently of the product builder.
    pub(crate) fn replay(net: &Network, start: &ProductState, steps: &[Step]) -> ProductState {
        let mut cur = start.clone();
        for s in steps {
            let mut next = cur.clone();
            for m in &s.moves {
                let lts = &net.process(m.process).lts;
                assert!(lts.transitions().contains(&m.transition));
                assert_eq!(cur.locations[m.process], m.transition.src);
                next.locations[m.process] = m.transition.dst;
            }
            assert_eq!(next, s.target);
            cur = next;
        }
        cur
    }

    fn loop_net() -> (Network, Specification) {
        let p = Lts::from_names("P", &["x"], &["a!"], &["x"], &[("x", "a!", "x")]).unwrap();
        let m = Lts::from_names("M", &["m"], &["a?"], &["m"], &[("m", "a?", "m")]).unwrap();
        let net = Network::new(vec![
            Process::new(p, Role::Synthesizable),
            Process::new(m, Role::LivenessMonitor),
        ])
        .unwrap();
        let spec = Specification {
            buchi_accepting: BTreeSet::from([(1, 0)]),
            ..Default::default()
        };
        (net, spec)
    }

    #[test]
    fn empty_system_is_ok() {
        let p = Lts::from_names("P", &["x"], &["a!"], &["x"], &[]).unwrap();
        let net = Network::new(vec![Process::new(p, Role::Synthesizable)]).unwrap();
        assert!(mc(&net, &Specification::default(), &McOptions::default()).unwrap().is_ok());
    }

    #[test]
    fn minimal_lasso() {
        let (net, spec) = loop_net();
        let v = mc(&net, &spec, &McOptions::default()).unwrap();
        let Some(Evidence::Liveness(l)) = v.evidence() else {
            panic!("expected lasso, got {v:?}")
        };
        assert!(l.stem.steps.is_empty());
        assert_eq!(l.cycle.len(), 1);
        assert_eq!(l.cycle[0].moves.len(), 2);
        let end = replay(&net, &l.stem.start, &l.stem.steps);
        assert_eq!(replay(&net, &end, &l.cycle), end);
    }

    #[test]
    fn no_infinite_run_is_not_a_liveness_violation() {
        let p = Lts::from_names("P", &["x", "y"], &["a!"], &["x"], &[("x", "a!", "y")]).unwrap();
        let m = Lts::from_names("M", &["m"], &["a?"], &["m"], &[("m", "a?", "m")]).unwrap();
        let net = Network::new(vec![
            Process::new(p, Role::Synthesizable),
            Process::new(m, Role::LivenessMonitor),
        ])
        .unwrap();
        let spec = Specification {
            buchi_accepting: BTreeSet::from([(1, 0)]),
            ..Default::default()
        };
        assert!(mc(&net, &spec, &McOptions::default()).unwrap().is_ok());
        let spec = Specification {
            deadlock_is_violation: true,
            ..spec
        };
        let v = mc(&net, &spec, &McOptions::default()).unwrap();
        assert!(matches!(v.evidence(), Some(Evidence::Deadlock(t)) if t.steps.len() == 1));
    }

    #[test]
    fn safety_first_and_shortest() {
        let p = Lts::from_names(
            "P",
            &["x", "y", "z"],
            &["a!", "b!"],
            &["x"],
            &[("x", "a!", "y"), ("y", "a!", "z"), ("z", "a!", "x"), ("x", "b!", "x")],
        )
        .unwrap();
        let safety = Lts::from_names("S", &["ok", "err"], &["a?"], &["ok"], &[("ok", "a?", "ok")]).unwrap();
        let safety_bad = Lts::from_names(
            "S",
            &["ok", "one", "err"],
            &["a?", "b?"],
            &["ok"],
            &[("ok", "a?", "one"), ("one", "a?", "err"), ("ok", "b?", "ok")],
        )
        .unwrap();
        let live = Lts::from_names("L", &["l"], &["b?"], &["l"], &[("l", "b?", "l")]).unwrap();
        for (mon, expect_safety) in [(safety, false), (safety_bad, true)] {
            let net = Network::new(vec![
                Process::new(p.clone(), Role::Synthesizable),
                Process::new(mon, Role::SafetyMonitor),
                Process::new(live.clone(), Role::LivenessMonitor),
            ])
            .unwrap();
            let err = net.process(1).lts.state_id("err").unwrap();
            let spec = Specification {
                safety_error: BTreeSet::from([(1, err)]),
                buchi_accepting: BTreeSet::from([(2, 0)]),
                deadlock_is_violation: false,
            };
            let v = mc(&net, &spec, &McOptions::default()).unwrap();
            match v.evidence().unwrap() {
                Evidence::Safety(t) => {
                    assert!(expect_safety);
                    assert_eq!(t.steps.len(), 2);
                    assert_eq!(replay(&net, &t.start, &t.steps).locations[1], err);
                }
                Evidence::Liveness(_) => assert!(!expect_safety),
                Evidence::Deadlock(_) => unreachable!(),
            }
        }
    }

    #[test]
    fn dead_transition_examples() {
        let p = Lts::from_names(
            "P",
            &["x", "y", "u"],
            &["a!", "b?"],
            &["x"],
            &[("x", "a!", "y"), ("u", "a!", "x"), ("x", "b?", "x")],
        )
        .unwrap();
        let net = Network::new(vec![Process::new(p, Role::Synthesizable)]).unwrap();
        let dead = dead_transitions(&net, 0, &McOptions::default()).unwrap();
        assert_eq!(dead, BTreeSet::from([Transition::new(2, 0, 0), Transition::new(0, 1, 0)]));
    }

    #[test]
    fn spec_validation() {
        let (net, _) = loop_net();
        let spec = Specification {
            safety_error: BTreeSet::from([(0, 0)]),
            ..Default::default()
        };
        assert!(matches!(mc(&net, &spec, &McOptions::default()), Err(Error::InvalidSpec(_))));
    }
}

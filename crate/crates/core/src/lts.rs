//! Labeled transition systems, networks and their parallel composition.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::product::{explore, ExploreOptions};

pub type StateId = usize;
pub type LabelId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Input,
    Output,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    base: String,
    kind: LabelKind,
}

impl Label {
    pub fn new(base: impl Into<String>, kind: LabelKind) -> Result<Label> {
        let base = base.into();
        if base.is_empty() {
            return Err(Error::EmptyLabel(base));
        }
        Ok(Label { base, kind })
    }

    pub fn input(base: &str) -> Label {
        Label::new(base, LabelKind::Input).expect("nonempty base")
    }

    pub fn output(base: &str) -> Label {
        Label::new(base, LabelKind::Output).expect("nonempty base")
    }

    pub fn internal(base: &str) -> Label {
        Label::new(base, LabelKind::Internal).expect("nonempty base")
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn kind(&self) -> LabelKind {
        self.kind
    }

    pub fn is_input(&self) -> bool {
        self.kind == LabelKind::Input
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LabelKind::Input => write!(f, "{}?", self.base),
            LabelKind::Output => write!(f, "{}!", self.base),
            LabelKind::Internal => write!(f, "{}", self.base),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Label> {
        if let Some(base) = s.strip_suffix('?') {
            Label::new(base, LabelKind::Input)
        } else if let Some(base) = s.strip_suffix('!') {
            Label::new(base, LabelKind::Output)
        } else {
            Label::new(s, LabelKind::Internal)
        }
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Label, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub src: StateId,
    pub label: LabelId,
    pub dst: StateId,
}

impl Transition {
    pub fn new(src: StateId, label: LabelId, dst: StateId) -> Transition {
        Transition { src, label, dst }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lts {
    name: String,
    labels: Vec<Label>,
    states: Vec<String>,
    initial: Vec<StateId>,
    transitions: BTreeSet<Transition>,
}

impl Lts {
    pub fn new(
        name: impl Into<String>,
        states: Vec<String>,
        labels: Vec<Label>,
        initial: impl IntoIterator<Item = StateId>,
        transitions: impl IntoIterator<Item = Transition>,
    ) -> Result<Lts> {
        let name = name.into();
        let bad = |reason: String| Error::InvalidLts {
            lts: name.clone(),
            reason,
        };
        let mut seen = BTreeSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(bad(format!("duplicate state `{s}`")));
            }
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(bad(format!("duplicate label `{l}`")));
            }
        }
        let initial: BTreeSet<StateId> = initial.into_iter().collect();
        if let Some(&s) = initial.iter().find(|&&s| s >= states.len()) {
            return Err(bad(format!("initial state {s} out of range")));
        }
        let transitions: BTreeSet<Transition> = transitions.into_iter().collect();
        for t in &transitions {
            if t.src >= states.len() || t.dst >= states.len() || t.label >= labels.len() {
                return Err(bad(format!("transition {t:?} out of range")));
            }
        }
        Ok(Lts {
            name,
            labels,
            states,
            initial: initial.into_iter().collect(),
            transitions,
        })
    }

    /// Builds an LTS from textual triples such as `("s0", "send?", "s1")`.
    pub fn from_names(
        name: &str,
        states: &[&str],
        labels: &[&str],
        initial: &[&str],
        transitions: &[(&str, &str, &str)],
    ) -> Result<Lts> {
        let states: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        let labels: Vec<Label> = labels.iter().map(|l| l.parse()).collect::<Result<_>>()?;
        let sid = |s: &str| {
            states
                .iter()
                .position(|x| x == s)
                .ok_or_else(|| Error::UnknownState(s.to_string()))
        };
        let lid = |l: &str| -> Result<LabelId> {
            let l: Label = l.parse()?;
            labels.iter().position(|x| *x == l).ok_or_else(|| Error::InvalidLts {
                lts: name.to_string(),
                reason: format!("unknown label `{l}`"),
            })
        };
        let initial = initial.iter().map(|s| sid(s)).collect::<Result<Vec<_>>>()?;
        let transitions = transitions
            .iter()
            .map(|(p, a, q)| Ok(Transition::new(sid(p)?, lid(a)?, sid(q)?)))
            .collect::<Result<Vec<_>>>()?;
        Lts::new(name, states, labels, initial, transitions)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, id: LabelId) -> &Label {
        &self.labels[id]
    }

    pub fn label_id(&self, label: &Label) -> Option<LabelId> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.states[id]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn is_initial(&self, s: StateId) -> bool {
        self.initial.binary_search(&s).is_ok()
    }

    pub fn transitions(&self) -> &BTreeSet<Transition> {
        &self.transitions
    }

    pub fn outgoing(&self, s: StateId) -> impl Iterator<Item = &Transition> {
        self.transitions
            .range(Transition::new(s, 0, 0)..Transition::new(s + 1, 0, 0))
    }

    pub fn with_transitions(&self, transitions: BTreeSet<Transition>) -> Result<Lts> {
        Lts::new(
            self.name.clone(),
            self.states.clone(),
            self.labels.clone(),
            self.initial.iter().copied(),
            transitions,
        )
    }

    pub fn render(&self, t: &Transition) -> String {
        format!(
            "{} {} {}",
            self.states[t.src], self.labels[t.label], self.states[t.dst]
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Synthesizable,
    Environment,
    SafetyMonitor,
    LivenessMonitor,
}

impl Role {
    pub fn is_monitor(self) -> bool {
        matches!(self, Role::SafetyMonitor | Role::LivenessMonitor)
    }
}

/// A network member. `frozen` states and `closed_slots` receive no
/// transition variables; `permutable` overrides the default permutable set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Process {
    pub lts: Lts,
    pub role: Role,
    pub frozen: BTreeSet<StateId>,
    pub closed_slots: BTreeSet<(StateId, LabelId)>,
    pub permutable: Option<BTreeSet<StateId>>,
}

impl Process {
    pub fn new(lts: Lts, role: Role) -> Process {
        Process {
            lts,
            role,
            frozen: BTreeSet::new(),
            closed_slots: BTreeSet::new(),
            permutable: None,
        }
    }

    pub fn is_open_slot(&self, s: StateId, l: LabelId) -> bool {
        !self.frozen.contains(&s) && !self.closed_slots.contains(&(s, l))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    processes: Vec<Process>,
}

impl Network {
    pub fn new(processes: Vec<Process>) -> Result<Network> {
        if processes.is_empty() {
            return Err(Error::InvalidNetwork("no processes".into()));
        }
        for p in &processes {
            let n = p.lts.num_states();
            let bad = |what: &str| {
                Err(Error::InvalidNetwork(format!(
                    "process `{}`: {what} out of range",
                    p.lts.name()
                )))
            };
            if p.frozen.iter().any(|&s| s >= n) {
                return bad("frozen state");
            }
            if p
                .closed_slots
                .iter()
                .any(|&(s, l)| s >= n || l >= p.lts.labels().len())
            {
                return bad("closed slot");
            }
            if p.permutable.iter().flatten().any(|&s| s >= n) {
                return bad("permutable state");
            }
        }
        Ok(Network { processes })
    }

    pub fn processes(&self) -> &[Process] {
        &self.processes
    }

    pub fn process(&self, i: usize) -> &Process {
        &self.processes[i]
    }

    pub fn len(&self) -> usize {
        self.processes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.processes.is_empty()
    }

    pub fn process_index(&self, name: &str) -> Option<usize> {
        self.processes.iter().position(|p| p.lts.name() == name)
    }

    pub fn synthesizable(&self) -> impl Iterator<Item = usize> + '_ {
        self.processes
            .iter()
            .enumerate()
            .filter(|(_, p)| p.role == Role::Synthesizable)
            .map(|(i, _)| i)
    }

    /// Replaces the transition relation of process `i`.
    pub fn with_transitions(&self, i: usize, transitions: BTreeSet<Transition>) -> Result<Network> {
        let mut processes = self.processes.clone();
        processes[i].lts = processes[i].lts.with_transitions(transitions)?;
        Ok(Network { processes })
    }

    pub fn with_process(&self, i: usize, process: Process) -> Result<Network> {
        let mut processes = self.processes.clone();
        processes[i] = process;
        Network::new(processes)
    }
}

/// One location per network process.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProductState {
    pub locations: Vec<StateId>,
}

/// Reachable fragment of the synchronous product of all processes.
pub fn compose(net: &Network) -> Result<Lts> {
    compose_bounded(net, usize::MAX)
}

pub fn compose_bounded(net: &Network, state_bound: usize) -> Result<Lts> {
    let graph = explore(
        net,
        &ExploreOptions {
            state_bound,
            ranks: None,
        },
    )?;
    let names: Vec<String> = graph
        .states
        .iter()
        .map(|ps| {
            let locs: Vec<&str> = ps
                .locations
                .iter()
                .enumerate()
                .map(|(i, &s)| net.process(i).lts.state_name(s))
                .collect();
            format!("({})", locs.join(","))
        })
        .collect();
    let mut labels: Vec<Label> = Vec::new();
    let mut transitions = BTreeSet::new();
    for (src, edges) in graph.edges.iter().enumerate() {
        for e in edges {
            let label = match labels.iter().position(|l| *l == e.label) {
                Some(i) => i,
                None => {
                    labels.push(e.label.clone());
                    labels.len() - 1
                }
            };
            transitions.insert(Transition::new(src, label, e.target));
        }
    }
    Lts::new("product", names, labels, graph.initial.clone(), transitions)
}

pub fn reachable(lts: &Lts) -> BTreeSet<StateId> {
    let mut seen: BTreeSet<StateId> = lts.initial().iter().copied().collect();
    let mut queue: VecDeque<StateId> = lts.initial().iter().copied().collect();
    while let Some(s) = queue.pop_front() {
        for t in lts.outgoing(s) {
            if seen.insert(t.dst) {
                queue.push_back(t.dst);
            }
        }
    }
    seen
}

/// Renames states through `map` (a full-length state map).
pub fn apply_permutation(lts: &Lts, map: &[StateId]) -> Result<Lts> {
    check_bijection(map, lts.num_states())?;
    let transitions = lts
        .transitions()
        .iter()
        .map(|t| Transition::new(map[t.src], t.label, map[t.dst]));
    Lts::new(
        lts.name(),
        lts.states().to_vec(),
        lts.labels().to_vec(),
        lts.initial().iter().map(|&s| map[s]),
        transitions,
    )
}

pub(crate) fn check_bijection(map: &[StateId], n: usize) -> Result<()> {
    if map.len() != n {
        return Err(Error::NotBijection(format!(
            "map has {} entries for {n} states",
            map.len()
        )));
    }
    let mut hit = vec![false; n];
    for &s in map {
        if s >= n || std::mem::replace(&mut hit[s], true) {
            return Err(Error::NotBijection(format!("image {s} repeated or out of range")));
        }
    }
    Ok(())
}

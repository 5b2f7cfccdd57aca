//! Transition variables, the syntactic constraint formula and candidate decoding.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lts::{LabelKind, Network, StateId, Transition};
use crate::sat::{Assignment, Clause, ConstraintStore, Lit, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntacticProfile {
    pub determinism: bool,
    pub input_enabledness: bool,
    pub io_partition: bool,
    pub deadlock_freedom: bool,
}

impl SyntacticProfile {
    /// Only completion of Δ0 (always on).
    pub fn none() -> SyntacticProfile {
        SyntacticProfile {
            determinism: false,
            input_enabledness: false,
            io_partition: false,
            deadlock_freedom: false,
        }
    }

    pub fn all() -> SyntacticProfile {
        SyntacticProfile {
            determinism: true,
            input_enabledness: true,
            io_partition: true,
            deadlock_freedom: true,
        }
    }
}

impl Default for SyntacticProfile {
    fn default() -> Self {
        SyntacticProfile::all()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarInfo {
    pub process: usize,
    pub transition: Transition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Table {
    states: usize,
    labels: usize,
    slots: Vec<Option<Var>>,
}

impl Table {
    fn index(&self, t: Transition) -> Option<usize> {
        (t.src < self.states && t.label < self.labels && t.dst < self.states)
            .then(|| (t.src * self.labels + t.label) * self.states + t.dst)
    }
}

/// Bijection between transition variables and (process, transition) pairs.
/// Variables are allocated in (process, source, label, target) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableMap {
    infos: Vec<VarInfo>,
    tables: Vec<Option<Table>>,
}

impl VariableMap {
    pub fn allocate(net: &Network) -> VariableMap {
        let mut infos = Vec::new();
        let mut tables = Vec::with_capacity(net.len());
        for (i, p) in net.processes().iter().enumerate() {
            if p.role != crate::lts::Role::Synthesizable {
                tables.push(None);
                continue;
            }
            let n = p.lts.num_states();
            let l = p.lts.labels().len();
            let mut slots = vec![None; n * l * n];
            for src in 0..n {
                for label in 0..l {
                    if !p.is_open_slot(src, label) {
                        continue;
                    }
                    for dst in 0..n {
                        let v = Var(infos.len() as u32);
                        infos.push(VarInfo {
                            process: i,
                            transition: Transition::new(src, label, dst),
                        });
                        slots[(src * l + label) * n + dst] = Some(v);
                    }
                }
            }
            tables.push(Some(Table {
                states: n,
                labels: l,
                slots,
            }));
        }
        VariableMap { infos, tables }
    }

    pub fn len(&self) -> usize {
        self.infos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.infos.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (0..self.infos.len() as u32).map(Var)
    }

    pub fn info(&self, v: Var) -> VarInfo {
        self.infos[v.index()]
    }

    pub fn var(&self, process: usize, t: Transition) -> Option<Var> {
        let table = self.tables.get(process)?.as_ref()?;
        table.slots[table.index(t)?]
    }

    /// Variables e_{src,label,·} of a process.
    pub fn slot_vars(&self, process: usize, src: StateId, label: usize) -> Vec<Var> {
        match self.tables.get(process).and_then(|t| t.as_ref()) {
            Some(t) if src < t.states && label < t.labels => {
                let base = (src * t.labels + label) * t.states;
                t.slots[base..base + t.states].iter().flatten().copied().collect()
            }
            _ => Vec::new(),
        }
    }

    /// All variables whose transition leaves `src`.
    pub fn state_vars(&self, process: usize, src: StateId) -> Vec<Var> {
        match self.tables.get(process).and_then(|t| t.as_ref()) {
            Some(t) if src < t.states => {
                let base = src * t.labels * t.states;
                t.slots[base..base + t.labels * t.states].iter().flatten().copied().collect()
            }
            _ => Vec::new(),
        }
    }

    pub fn describe(&self, v: Var, net: &Network) -> String {
        let info = self.info(v);
        let lts = &net.process(info.process).lts;
        format!("{}: {}", lts.name(), lts.render(&info.transition))
    }
}

/// Either a variable or a Δ0 transition in a closed slot, which is always present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Item {
    Var(Var),
    Fixed,
}

fn clause(lits: Vec<Lit>) -> Option<Clause> {
    Clause::new(lits)
}

/// The clauses of Φ for `net` under `profile`.
pub fn phi_clauses(net: &Network, profile: &SyntacticProfile, vmap: &VariableMap) -> Vec<Clause> {
    let mut out = Vec::new();
    for i in net.synthesizable() {
        let p = net.process(i);
        let lts = &p.lts;
        for t in lts.transitions() {
            if let Some(v) = vmap.var(i, *t) {
                out.push(clause(vec![Lit::pos(v)]).expect("unit"));
            }
        }
        for s in 0..lts.num_states() {
            if vmap.state_vars(i, s).is_empty() {
                continue;
            }
            // Items per label at this state.
            let items: Vec<Vec<Item>> = (0..lts.labels().len())
                .map(|a| {
                    let mut v: Vec<Item> = vmap.slot_vars(i, s, a).into_iter().map(Item::Var).collect();
                    if !p.is_open_slot(s, a) && lts.outgoing(s).any(|t| t.label == a) {
                        v.push(Item::Fixed);
                    }
                    v
                })
                .collect();
            let is_input = |a: usize| lts.label(a).kind() == LabelKind::Input;

            if profile.determinism {
                for group in &items {
                    let vars: Vec<Var> = group
                        .iter()
                        .filter_map(|it| match it {
                            Item::Var(v) => Some(*v),
                            Item::Fixed => None,
                        })
                        .collect();
                    let fixed = group.contains(&Item::Fixed);
                    for (k, &x) in vars.iter().enumerate() {
                        if fixed {
                            out.push(clause(vec![Lit::neg(x)]).expect("unit"));
                        }
                        for &y in &vars[k + 1..] {
                            out.push(clause(vec![Lit::neg(x), Lit::neg(y)]).expect("distinct vars"));
                        }
                    }
                }
            }

            if profile.io_partition {
                for a in (0..items.len()).filter(|&a| !is_input(a)) {
                    for b in 0..items.len() {
                        if b == a || (!is_input(b) && b < a) {
                            continue;
                        }
                        for x in &items[a] {
                            for y in &items[b] {
                                push_exclusion(&mut out, *x, *y);
                            }
                        }
                    }
                }
            }

            if profile.input_enabledness {
                let inputs: Vec<usize> = (0..items.len()).filter(|&a| is_input(a)).collect();
                let premises: Vec<Item> = inputs.iter().flat_map(|&a| items[a].iter().copied()).collect();
                for &a in &inputs {
                    // Closed slots are constants and carry no obligation.
                    if !p.is_open_slot(s, a) {
                        continue;
                    }
                    let conclusion: Vec<Lit> = items[a]
                        .iter()
                        .map(|it| match it {
                            Item::Var(v) => Lit::pos(*v),
                            Item::Fixed => unreachable!(),
                        })
                        .collect();
                    for prem in &premises {
                        let mut lits = conclusion.clone();
                        if let Item::Var(y) = prem {
                            lits.push(Lit::neg(*y));
                        }
                        if let Some(c) = clause(lits) {
                            out.push(c);
                        }
                    }
                }
            }

            if profile.deadlock_freedom && !items.iter().flatten().any(|it| *it == Item::Fixed) {
                let lits = vmap.state_vars(i, s).into_iter().map(Lit::pos).collect();
                out.push(clause(lits).expect("positive"));
            }
        }
    }
    out
}

fn push_exclusion(out: &mut Vec<Clause>, x: Item, y: Item) {
    let lits = [x, y]
        .iter()
        .filter_map(|it| match it {
            Item::Var(v) => Some(Lit::neg(*v)),
            Item::Fixed => None,
        })
        .collect();
    if let Some(c) = clause(lits) {
        out.push(c);
    }
}

/// Allocates V and builds the store for Φ.
pub fn build_phi(
    net: &Network,
    profile: &SyntacticProfile,
    seed: u64,
) -> Result<(ConstraintStore, VariableMap)> {
    if net.synthesizable().next().is_none() {
        return Err(Error::NothingToSynthesize);
    }
    let vmap = VariableMap::allocate(net);
    let mut store = ConstraintStore::new(vmap.len(), seed);
    for c in phi_clauses(net, profile, &vmap) {
        store.add_clause(c);
    }
    Ok((store, vmap))
}

/// Replaces each synthesizable process's transitions by Δ_σ (plus closed-slot Δ0 transitions).
pub fn decode(sigma: &Assignment, vmap: &VariableMap, net: &Network) -> Result<Network> {
    let mut out = net.clone();
    for i in net.synthesizable() {
        let mut ts: BTreeSet<Transition> = net
            .process(i)
            .lts
            .transitions()
            .iter()
            .filter(|t| vmap.var(i, **t).is_none())
            .copied()
            .collect();
        ts.extend(
            sigma
                .true_vars()
                .map(|v| vmap.info(v))
                .filter(|info| info.process == i)
                .map(|info| info.transition),
        );
        out = out.with_transitions(i, ts)?;
    }
    Ok(out)
}

pub fn encode(net: &Network, vmap: &VariableMap) -> Assignment {
    Assignment::new(
        vmap.vars()
            .map(|v| {
                let info = vmap.info(v);
                net.process(info.process).lts.transitions().contains(&info.transition)
            })
            .collect(),
    )
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::lts::{Lts, Process, Role};

    /// Structural predicates, checked directly on the decoded LTS.
    pub(crate) fn profile_holds(lts: &Lts, profile: &SyntacticProfile) -> bool {
        for s in 0..lts.num_states() {
            let out: Vec<&Transition> = lts.outgoing(s).collect();
            let labels: BTreeSet<usize> = out.iter().map(|t| t.label).collect();
            if profile.determinism && labels.len() != out.len() {
                return false;
            }
            let non_inputs = labels.iter().filter(|&&a| !lts.label(a).is_input()).count();
            if profile.io_partition && non_inputs > 0 && labels.len() > 1 {
                return false;
            }
            let has_input = labels.iter().any(|&a| lts.label(a).is_input());
            if profile.input_enabledness
                && has_input
                && (0..lts.labels().len()).any(|a| lts.label(a).is_input() && !labels.contains(&a))
            {
                return false;
            }
            if profile.deadlock_freedom && out.is_empty() {
                return false;
            }
        }
        true
    }

    fn tiny(labels: &[&str], n: usize) -> Network {
        let names: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
        let names: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let lts = Lts::from_names("P", &names, labels, &["q0"], &[]).unwrap();
        Network::new(vec![Process::new(lts, Role::Synthesizable)]).unwrap()
    }

    fn models(net: &Network, profile: &SyntacticProfile) -> Vec<Assignment> {
        let (store, vmap) = build_phi(net, profile, 0).unwrap();
        (0..1u64 << vmap.len())
            .map(|i| Assignment::from_index(vmap.len(), i))
            .filter(|a| store.satisfies(a))
            .collect()
    }

    #[test]
    fn unconstrained_space_size() {
        let net = tiny(&["a!"], 3);
        assert_eq!(models(&net, &SyntacticProfile::none()).len(), 1 << 9);
        let net = tiny(&["a!", "b?"], 2);
        assert_eq!(models(&net, &SyntacticProfile::none()).len(), 1 << 8);
    }

    #[test]
    fn every_model_meets_the_profile() {
        for labels in [&["a!", "b?"][..], &["a?", "b?"], &["a!", "b!"], &["a!", "t"]] {
            let net = tiny(labels, 2);
            let vmap = VariableMap::allocate(&net);
            for bits in 0..16u8 {
                let profile = SyntacticProfile {
                    determinism: bits & 1 != 0,
                    input_enabledness: bits & 2 != 0,
                    io_partition: bits & 4 != 0,
                    deadlock_freedom: bits & 8 != 0,
                };
                let (store, _) = build_phi(&net, &profile, 0).unwrap();
                for i in 0..1u64 << vmap.len() {
                    let a = Assignment::from_index(vmap.len(), i);
                    let lts = decode(&a, &vmap, &net).unwrap().process(0).lts.clone();
                    assert_eq!(store.satisfies(&a), profile_holds(&lts, &profile), "{labels:?} {profile:?} {a}");
                }
            }
        }
    }

    #[test]
    fn determinism_clause_shape() {
        let net = tiny(&["a!"], 2);
        let profile = SyntacticProfile {
            determinism: true,
            ..SyntacticProfile::none()
        };
        let (store, vmap) = build_phi(&net, &profile, 0).unwrap();
        let q1 = vmap.var(0, Transition::new(0, 0, 0)).unwrap();
        let q2 = vmap.var(0, Transition::new(0, 0, 1)).unwrap();
        assert!(store.clauses().contains(&Clause::new(vec![Lit::neg(q1), Lit::neg(q2)]).unwrap()));
    }

    #[test]
    fn empty_delta0_has_no_units() {
        let net = tiny(&["a!"], 3);
        let (store, _) = build_phi(&net, &SyntacticProfile::none(), 0).unwrap();
        assert!(store.clauses().is_empty());
    }

    #[test]
    fn fig5_decode_and_round_trip() {
        let net = tiny(&["a!"], 4);
        let vmap = VariableMap::allocate(&net);
        let mut a = Assignment::all_false(vmap.len());
        for (p, q) in [(0, 1), (1, 2), (2, 3)] {
            a.set(vmap.var(0, Transition::new(p, 0, q)).unwrap(), true);
        }
        let m = decode(&a, &vmap, &net).unwrap();
        assert_eq!(
            m.process(0).lts.transitions(),
            &BTreeSet::from([Transition::new(0, 0, 1), Transition::new(1, 0, 2), Transition::new(2, 0, 3)])
        );
        assert_eq!(encode(&m, &vmap), a);
        let none = decode(&Assignment::all_false(vmap.len()), &vmap, &net).unwrap();
        assert!(none.process(0).lts.transitions().is_empty());
    }

    #[test]
    fn frozen_states_and_closed_slots_get_no_variables() {
        let lts = Lts::from_names(
            "P",
            &["x", "y"],
            &["a!", "b?"],
            &["x"],
            &[("x", "a!", "y"), ("y", "b?", "x")],
        )
        .unwrap();
        let mut p = Process::new(lts, Role::Synthesizable);
        p.frozen.insert(1);
        p.closed_slots.insert((0, 0));
        let net = Network::new(vec![p]).unwrap();
        let (store, vmap) = build_phi(&net, &SyntacticProfile::all(), 0).unwrap();
        assert_eq!(vmap.len(), 2);
        // The fixed output at x excludes any input there.
        for i in 0..4 {
            let a = Assignment::from_index(2, i);
            assert_eq!(store.satisfies(&a), i == 0);
        }
        let m = decode(&Assignment::all_false(2), &vmap, &net).unwrap();
        assert_eq!(m, net);
    }

    #[test]
    fn nothing_to_synthesize() {
        let lts = Lts::from_names("P", &["x"], &["a!"], &["x"], &[]).unwrap();
        let net = Network::new(vec![Process::new(lts, Role::Environment)]).unwrap();
        assert_eq!(
            build_phi(&net, &SyntacticProfile::all(), 0).unwrap_err(),
            Error::NothingToSynthesize
        );
    }
}

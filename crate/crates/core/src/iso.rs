//! Permutable states, permutations, isomorphism up to A, and formula renaming.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::encoding::VariableMap;
use crate::error::{Error, Result};
use crate::lts::{apply_permutation, Lts, Network, Role, StateId, Transition};
use crate::sat::{Assignment, Cube, Lit};

/// Per-process sets of permutable states (empty for non-synthesizable processes).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PermutableSet {
    sets: Vec<Vec<StateId>>,
    sizes: Vec<usize>,
}

impl PermutableSet {
    /// Validates that every permutation of `sets` maps M0 to itself and the
    /// variable space onto itself.
    pub fn new(net: &Network, sets: Vec<BTreeSet<StateId>>) -> Result<PermutableSet> {
        if sets.len() != net.len() {
            return Err(Error::InvalidPermutableSet("one set per process required".into()));
        }
        for (i, set) in sets.iter().enumerate() {
            if set.is_empty() {
                continue;
            }
            let p = net.process(i);
            let name = p.lts.name();
            if p.role != Role::Synthesizable {
                return Err(Error::InvalidPermutableSet(format!("`{name}` is not synthesizable")));
            }
            let mut pattern = None;
            for &s in set {
                if s >= p.lts.num_states() {
                    return Err(Error::InvalidPermutableSet(format!("state {s} out of range in `{name}`")));
                }
                let sname = p.lts.state_name(s);
                if p.lts.is_initial(s) {
                    return Err(Error::InvalidPermutableSet(format!("`{sname}` is initial")));
                }
                if p.lts.transitions().iter().any(|t| t.src == s || t.dst == s) {
                    return Err(Error::InvalidPermutableSet(format!("`{sname}` has Δ0 transitions")));
                }
                let closed: BTreeSet<usize> = p
                    .closed_slots
                    .iter()
                    .filter(|(q, _)| *q == s)
                    .map(|&(_, a)| a)
                    .collect();
                let here = (p.frozen.contains(&s), closed);
                match &pattern {
                    None => pattern = Some(here),
                    Some(prev) if *prev != here => {
                        return Err(Error::InvalidPermutableSet(format!(
                            "`{sname}` has a different variable pattern"
                        )))
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(PermutableSet {
            sets: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
            sizes: net.processes().iter().map(|p| p.lts.num_states()).collect(),
        })
    }

    pub fn empty(net: &Network) -> PermutableSet {
        PermutableSet::new(net, vec![BTreeSet::new(); net.len()]).expect("empty sets are valid")
    }

    pub fn get(&self, process: usize) -> &[StateId] {
        &self.sets[process]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_permutations(&self) -> usize {
        self.sets.iter().map(|s| (1..=s.len()).product::<usize>()).product()
    }

    pub fn is_trivial(&self) -> bool {
        self.sets.iter().all(|s| s.len() < 2)
    }

    pub fn names(&self, net: &Network) -> Vec<String> {
        self.sets
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&q| net.process(i).lts.state_name(q).to_string()))
            .collect()
    }
}

/// The override if present, else the non-initial states without Δ0
/// transitions that carry the full variable pattern.
pub fn permutable_states(net: &Network) -> Result<PermutableSet> {
    let sets = net
        .processes()
        .iter()
        .map(|p| {
            if p.role != Role::Synthesizable {
                return BTreeSet::new();
            }
            if let Some(o) = &p.permutable {
                return o.clone();
            }
            (0..p.lts.num_states())
                .filter(|&s| {
                    !p.lts.is_initial(s)
                        && !p.frozen.contains(&s)
                        && !p.closed_slots.iter().any(|(q, _)| *q == s)
                        && !p.lts.transitions().iter().any(|t| t.src == s || t.dst == s)
                })
                .collect()
        })
        .collect();
    PermutableSet::new(net, sets)
}

/// A state bijection per process; identity outside the permutable set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Permutation {
    maps: Vec<Vec<StateId>>,
}

impl Permutation {
    pub fn identity(sizes: &[usize]) -> Permutation {
        Permutation {
            maps: sizes.iter().map(|&n| (0..n).collect()).collect(),
        }
    }

    /// Builds f from explicit images `f(s) = t` for states of `a`.
    pub fn from_pairs(a: &PermutableSet, pairs: &[(usize, StateId, StateId)]) -> Result<Permutation> {
        let mut f = Permutation::identity(a.sizes());
        for &(i, s, t) in pairs {
            if !a.get(i).contains(&s) || !a.get(i).contains(&t) {
                return Err(Error::NotBijection(format!("{s}->{t} leaves the permutable set")));
            }
            f.maps[i][s] = t;
        }
        for (i, m) in f.maps.iter().enumerate() {
            crate::lts::check_bijection(m, a.sizes()[i])?;
        }
        Ok(f)
    }

    pub fn map(&self, process: usize, s: StateId) -> StateId {
        self.maps[process][s]
    }

    pub fn process_map(&self, process: usize) -> &[StateId] {
        &self.maps[process]
    }

    pub fn apply(&self, process: usize, t: Transition) -> Transition {
        let m = &self.maps[process];
        Transition::new(m[t.src], t.label, m[t.dst])
    }

    pub fn is_identity(&self) -> bool {
        self.maps.iter().all(|m| m.iter().enumerate().all(|(i, &s)| i == s))
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            maps: self
                .maps
                .iter()
                .map(|m| {
                    let mut inv = vec![0; m.len()];
                    for (s, &t) in m.iter().enumerate() {
                        inv[t] = s;
                    }
                    inv
                })
                .collect(),
        }
    }

    /// Exploration ranks under which the image f(M) is explored exactly like M.
    pub fn image_ranks(&self) -> Vec<Vec<usize>> {
        self.inverse().maps
    }
}

/// All ∏|A_i|! permutations in a stable order, identity first.
pub fn permutations(a: &PermutableSet) -> Permutations<'_> {
    Permutations {
        set: a,
        current: a.sets.clone(),
        done: false,
    }
}

pub struct Permutations<'a> {
    set: &'a PermutableSet,
    current: Vec<Vec<StateId>>,
    done: bool,
}

impl Iterator for Permutations<'_> {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        if self.done {
            return None;
        }
        let mut f = Permutation::identity(&self.set.sizes);
        for (i, arr) in self.current.iter().enumerate() {
            for (k, &s) in self.set.sets[i].iter().enumerate() {
                f.maps[i][s] = arr[k];
            }
        }
        // Advance the odometer, last process fastest.
        self.done = true;
        for i in (0..self.current.len()).rev() {
            if next_permutation(&mut self.current[i]) {
                self.done = false;
                break;
            }
            self.current[i].sort_unstable();
        }
        Some(f)
    }
}

fn next_permutation(v: &mut [StateId]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

type Signature = BTreeMap<(usize, bool), usize>;

fn signatures(m: &Lts) -> Vec<Signature> {
    let mut sig = vec![Signature::new(); m.num_states()];
    for t in m.transitions() {
        *sig[t.src].entry((t.label, true)).or_default() += 1;
        *sig[t.dst].entry((t.label, false)).or_default() += 1;
    }
    sig
}

/// A witness f over `a` with f(M1) = M2, if one exists.
pub fn is_isomorphic(m1: &Lts, m2: &Lts, a: &[StateId]) -> Option<Vec<StateId>> {
    if m1.states() != m2.states() || m1.labels() != m2.labels() || m1.initial() != m2.initial() {
        return None;
    }
    let s1 = signatures(m1);
    let s2 = signatures(m2);
    let mut map: Vec<StateId> = (0..m1.num_states()).collect();
    let mut used = vec![false; a.len()];
    search(m1, m2, a, &s1, &s2, 0, &mut map, &mut used)
}

#[allow(clippy::too_many_arguments)]
fn search(
    m1: &Lts,
    m2: &Lts,
    a: &[StateId],
    s1: &[Signature],
    s2: &[Signature],
    k: usize,
    map: &mut Vec<StateId>,
    used: &mut [bool],
) -> Option<Vec<StateId>> {
    if k == a.len() {
        let image = apply_permutation(m1, map).ok()?;
        return (image == *m2).then(|| map.clone());
    }
    for j in 0..a.len() {
        if used[j] || s1[a[k]] != s2[a[j]] {
            continue;
        }
        used[j] = true;
        map[a[k]] = a[j];
        if let Some(w) = search(m1, m2, a, s1, s2, k + 1, map, used) {
            return Some(w);
        }
        used[j] = false;
    }
    map[a[k]] = a[k];
    None
}

/// Joint witness for two networks differing only in synthesizable transitions.
pub fn is_isomorphic_network(n1: &Network, n2: &Network, a: &PermutableSet) -> Option<Permutation> {
    if n1.len() != n2.len() {
        return None;
    }
    let mut f = Permutation::identity(a.sizes());
    for i in 0..n1.len() {
        let (p1, p2) = (n1.process(i), n2.process(i));
        if p1.role != p2.role {
            return None;
        }
        if p1.role != Role::Synthesizable || a.get(i).is_empty() {
            if p1.lts != p2.lts {
                return None;
            }
            continue;
        }
        f.maps[i] = is_isomorphic(&p1.lts, &p2.lts, a.get(i))?;
    }
    Some(f)
}

pub fn permute_cube(f: &Permutation, cube: &Cube, vmap: &VariableMap) -> Result<Cube> {
    let lits = cube
        .lits()
        .iter()
        .map(|l| {
            if l.var.index() >= vmap.len() {
                return Err(Error::UnknownVariable(format!("x{}", l.var.0)));
            }
            let info = vmap.info(l.var);
            let t = f.apply(info.process, info.transition);
            let v = vmap
                .var(info.process, t)
                .ok_or_else(|| Error::UnknownVariable(format!("{t:?} of process {}", info.process)))?;
            Ok(Lit::new(v, l.positive))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Cube::new(lits).expect("renaming is injective"))
}

pub fn permute_formula(f: &Permutation, cubes: &[Cube], vmap: &VariableMap) -> Result<Vec<Cube>> {
    cubes.iter().map(|c| permute_cube(f, c, vmap)).collect()
}

/// f(σ), by renaming σ's positive cube.
pub fn permute_assignment(f: &Permutation, sigma: &Assignment, vmap: &VariableMap) -> Result<Assignment> {
    let image = permute_cube(f, &Cube::positive(sigma.true_vars()), vmap)?;
    let mut out = Assignment::all_false(sigma.len());
    for l in image.lits() {
        out.set(l.var, true);
    }
    Ok(out)
}

pub fn equivalence_class(sigma: &Assignment, vmap: &VariableMap, a: &PermutableSet) -> Result<BTreeSet<Assignment>> {
    permutations(a).map(|f| permute_assignment(&f, sigma, vmap)).collect()
}

/// The class member reported to users: the lexicographic minimum.
pub fn representative(sigma: &Assignment, vmap: &VariableMap, a: &PermutableSet) -> Result<Assignment> {
    Ok(equivalence_class(sigma, vmap, a)?
        .into_iter()
        .next()
        .expect("class contains σ"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{decode, VariableMap};
    use crate::lts::{Process, Role};
    use proptest::prelude::*;

    fn chain_net(n: usize, labels: &[&str]) -> Network {
        let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let names: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let lts = Lts::from_names("P", &names, labels, &["p0"], &[]).unwrap();
        Network::new(vec![Process::new(lts, Role::Synthesizable)]).unwrap()
    }

    fn fig5() -> (Network, VariableMap, PermutableSet) {
        let net = chain_net(4, &["a!"]);
        let vmap = VariableMap::allocate(&net);
        let a = permutable_states(&net).unwrap();
        (net, vmap, a)
    }

    fn cube_of(vmap: &VariableMap, pairs: &[(usize, usize)]) -> Cube {
        Cube::positive(pairs.iter().map(|&(p, q)| vmap.var(0, Transition::new(p, 0, q)).unwrap()))
    }

    #[test]
    fn default_sets() {
        let (_, _, a) = fig5();
        assert_eq!(a.get(0), &[1, 2, 3]);
        let lts = Lts::from_names("P", &["x", "y"], &["a!"], &["x"], &[("x", "a!", "y")]).unwrap();
        let net = Network::new(vec![Process::new(lts, Role::Synthesizable)]).unwrap();
        assert!(permutable_states(&net).unwrap().get(0).is_empty());
    }

    #[test]
    fn permutation_counts() {
        let (net, _, a) = fig5();
        assert_eq!(permutations(&a).count(), 6);
        assert!(permutations(&a).next().unwrap().is_identity());
        let e = PermutableSet::empty(&net);
        assert_eq!(permutations(&e).count(), 1);

        let big = chain_net(5, &["a!"]);
        let a = permutable_states(&big).unwrap();
        let all: BTreeSet<Permutation> = permutations(&a).collect();
        assert_eq!(all.len(), 24);

        let n2 = Network::new(vec![big.process(0).clone(), chain_net(4, &["b!"]).process(0).clone()]).unwrap();
        let sets = vec![BTreeSet::from([1, 2]), BTreeSet::from([1, 2, 3])];
        let a = PermutableSet::new(&n2, sets).unwrap();
        let all: BTreeSet<Permutation> = permutations(&a).collect();
        assert_eq!(all.len(), 12);
        assert_eq!(a.num_permutations(), 12);
    }

    #[test]
    fn rejects_invalid_overrides() {
        let lts = Lts::from_names("P", &["x", "y", "z"], &["a!"], &["x"], &[("x", "a!", "y")]).unwrap();
        let net = Network::new(vec![Process::new(lts, Role::Synthesizable)]).unwrap();
        assert!(PermutableSet::new(&net, vec![BTreeSet::from([0, 2])]).is_err());
        assert!(PermutableSet::new(&net, vec![BTreeSet::from([1, 2])]).is_err());
        assert!(PermutableSet::new(&net, vec![BTreeSet::from([2])]).is_ok());
    }

    #[test]
    fn worked_example_renaming() {
        let (_, vmap, a) = fig5();
        let f = Permutation::from_pairs(&a, &[(0, 1, 3), (0, 3, 2), (0, 2, 1)]).unwrap();
        let g1 = cube_of(&vmap, &[(0, 1), (1, 2), (2, 3)]);
        let g2 = cube_of(&vmap, &[(0, 3), (3, 1), (1, 2)]);
        assert_eq!(permute_cube(&f, &g1, &vmap).unwrap(), g2);
        let id = Permutation::identity(a.sizes());
        assert_eq!(permute_cube(&id, &g1, &vmap).unwrap(), g1);
    }

    #[test]
    fn fig5_class_has_six_members() {
        let (_, vmap, a) = fig5();
        let mut s = Assignment::all_false(vmap.len());
        for l in cube_of(&vmap, &[(0, 1), (1, 2), (2, 3)]).lits() {
            s.set(l.var, true);
        }
        assert_eq!(equivalence_class(&s, &vmap, &a).unwrap().len(), 6);
        let e = PermutableSet::empty(&chain_net(4, &["a!"]));
        assert_eq!(equivalence_class(&s, &vmap, &e).unwrap().len(), 1);
    }

    #[test]
    fn symmetric_assignment_halves_the_class() {
        let (_, vmap, a) = fig5();
        // p0 -> p1 and p0 -> p2: p1 and p2 are interchangeable.
        let mut s = Assignment::all_false(vmap.len());
        for l in cube_of(&vmap, &[(0, 1), (0, 2)]).lits() {
            s.set(l.var, true);
        }
        assert_eq!(equivalence_class(&s, &vmap, &a).unwrap().len(), 3);
    }

    #[test]
    fn asymmetric_class_of_size_24() {
        let net = chain_net(5, &["a!"]);
        let vmap = VariableMap::allocate(&net);
        let a = permutable_states(&net).unwrap();
        let mut s = Assignment::all_false(vmap.len());
        for (p, q) in [(0, 1), (1, 2), (2, 3), (3, 4)] {
            s.set(vmap.var(0, Transition::new(p, 0, q)).unwrap(), true);
        }
        assert_eq!(equivalence_class(&s, &vmap, &a).unwrap().len(), 24);
    }

    #[test]
    fn self_isomorphism_is_identity() {
        let (net, _, a) = fig5();
        let m = net.process(0).lts.with_transitions(BTreeSet::from([Transition::new(0, 0, 1)])).unwrap();
        assert_eq!(is_isomorphic(&m, &m, a.get(0)), Some(vec![0, 1, 2, 3]));
    }

    fn exhaustive_witness(m1: &Lts, m2: &Lts, a: &PermutableSet) -> bool {
        permutations(a).any(|f| apply_permutation(m1, f.process_map(0)).unwrap() == *m2)
    }

    proptest! {
        #[test]
        fn classes_partition(bits in any::<u16>(), other in any::<u16>()) {
            // 4 states, A = {p1,p2,p3}, 1 label; only the first 16 vars vary.
            let (_, vmap, a) = fig5();
            let mk = |x: u16| {
                let mut s = Assignment::all_false(vmap.len());
                for i in 0..16 { s.set(crate::sat::Var(i), x >> i & 1 == 1); }
                s
            };
            let (s, r) = (mk(bits), mk(other));
            let cs = equivalence_class(&s, &vmap, &a).unwrap();
            let cr = equivalence_class(&r, &vmap, &a).unwrap();
            prop_assert!(cs.contains(&s));
            prop_assert_eq!(cs.contains(&r), cr.contains(&s));
            prop_assert!(cs == cr || cs.is_disjoint(&cr));
            prop_assert!(cs.len() <= 6 && 6 % cs.len() == 0);
        }

        #[test]
        fn decode_permute_coherence(bits in any::<u16>(), k in 0usize..6) {
            let (net, vmap, a) = fig5();
            let mut s = Assignment::all_false(vmap.len());
            for i in 0..16 { s.set(crate::sat::Var(i), bits >> i & 1 == 1); }
            let f = permutations(&a).nth(k).unwrap();
            let lhs = decode(&permute_assignment(&f, &s, &vmap).unwrap(), &vmap, &net).unwrap();
            let rhs = apply_permutation(&decode(&s, &vmap, &net).unwrap().process(0).lts, f.process_map(0)).unwrap();
            prop_assert_eq!(&lhs.process(0).lts, &rhs);
            let m1 = decode(&s, &vmap, &net).unwrap().process(0).lts.clone();
            let w = is_isomorphic(&m1, &rhs, a.get(0));
            prop_assert!(w.is_some());
            prop_assert_eq!(apply_permutation(&m1, &w.unwrap()).unwrap(), rhs);
        }

        #[test]
        fn isomorphism_agrees_with_exhaustive_search(x in any::<u16>(), y in any::<u16>()) {
            let (net, vmap, a) = fig5();
            let mk = |x: u16| {
                let mut s = Assignment::all_false(vmap.len());
                for i in 0..16 { s.set(crate::sat::Var(i), x >> i & 1 == 1); }
                decode(&s, &vmap, &net).unwrap().process(0).lts.clone()
            };
            let (m1, m2) = (mk(x), mk(y));
            prop_assert_eq!(is_isomorphic(&m1, &m2, a.get(0)).is_some(), exhaustive_witness(&m1, &m2, &a));
        }

        #[test]
        fn formula_models_are_images(cube_bits in any::<u16>(), signs in any::<u16>(), k in 0usize..6) {
            // 3 states, 1 label: 9 vars, all brute-forced.
            let net = chain_net(3, &["a!"]);
            let vmap = VariableMap::allocate(&net);
            let a = permutable_states(&net).unwrap();
            let lits: Vec<Lit> = (0..9).filter(|i| cube_bits >> i & 1 == 1)
                .map(|i| Lit::new(crate::sat::Var(i), signs >> i & 1 == 1)).collect();
            let cube = Cube::new(lits).unwrap();
            let f = permutations(&a).nth(k % 2).unwrap();
            let image = permute_cube(&f, &cube, &vmap).unwrap();
            for i in 0..512u64 {
                let t = Assignment::from_index(9, i);
                let ft = permute_assignment(&f, &t, &vmap).unwrap();
                prop_assert_eq!(cube.eval(&t), image.eval(&ft));
            }
        }
    }
}

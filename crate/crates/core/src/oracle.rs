//! Brute-force ground truth for small instances.
//!
//! The model checker here shares no code with [`crate::mc`] or
//! [`crate::product`]: it builds its own product, decides safety and deadlock
//! by reachability and liveness by searching for a cycle back to each
//! reachable accepting state.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::encoding::{decode, encode, phi_clauses, SyntacticProfile, VariableMap};
use crate::engine::Problem;
use crate::error::{Error, Result};
use crate::iso::{permutations, PermutableSet, Permutation};
use crate::lts::{apply_permutation, Label, LabelKind, Lts, Network, Process, Role, StateId, Transition};
use crate::mc::{mc, McOptions, Specification};
use crate::sat::Assignment;

pub const ORACLE_VAR_LIMIT: usize = 24;
const ORACLE_STATE_BOUND: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub all_solutions: BTreeSet<Assignment>,
    pub classes: Vec<BTreeSet<Assignment>>,
    pub phi_models: usize,
}

/// The (process, transition) pairs taking part in one joint move.
type Moves = Vec<(usize, Transition)>;
/// Target locations and moves of one joint move.
type JointMove = (Vec<StateId>, Moves);

struct Product {
    states: Vec<Vec<StateId>>,
    succ: Vec<Vec<(usize, Moves)>>,
}

fn joint_moves(net: &Network, locs: &[StateId]) -> Vec<JointMove> {
    let mut result = Vec::new();
    for (i, p) in net.processes().iter().enumerate() {
        for t in p.lts.transitions().iter().filter(|t| t.src == locs[i]) {
            let label = p.lts.label(t.label);
            match label.kind() {
                LabelKind::Input => continue,
                LabelKind::Internal => {
                    let mut next = locs.to_vec();
                    next[i] = t.dst;
                    result.push((next, vec![(i, *t)]));
                }
                LabelKind::Output => {
                    let mut partial: Vec<JointMove> = vec![{
                        let mut next = locs.to_vec();
                        next[i] = t.dst;
                        (next, vec![(i, *t)])
                    }];
                    let wanted = Label::input(label.base());
                    for (j, q) in net.processes().iter().enumerate() {
                        if j == i {
                            continue;
                        }
                        let Some(lj) = q.lts.labels().iter().position(|l| *l == wanted) else {
                            continue;
                        };
                        let options: Vec<Transition> = q
                            .lts
                            .transitions()
                            .iter()
                            .filter(|u| u.src == locs[j] && u.label == lj)
                            .copied()
                            .collect();
                        if options.is_empty() {
                            if q.role.is_monitor() {
                                continue;
                            }
                            partial.clear();
                            break;
                        }
                        partial = partial
                            .into_iter()
                            .flat_map(|(next, moves)| {
                                options.iter().map(move |u| {
                                    let mut n2 = next.clone();
                                    n2[j] = u.dst;
                                    let mut m2 = moves.clone();
                                    m2.push((j, *u));
                                    (n2, m2)
                                })
                            })
                            .collect();
                    }
                    result.extend(partial);
                }
            }
        }
    }
    result
}

fn build(net: &Network) -> Result<Product> {
    let starts: Vec<Vec<StateId>> = net.processes().iter().fold(vec![Vec::new()], |acc, p| {
        acc.into_iter()
            .flat_map(|prefix| {
                p.lts.initial().iter().map(move |&s| {
                    let mut v = prefix.clone();
                    v.push(s);
                    v
                })
            })
            .collect()
    });
    let mut ids: HashMap<Vec<StateId>, usize> = HashMap::new();
    let mut prod = Product {
        states: Vec::new(),
        succ: Vec::new(),
    };
    let mut work = Vec::new();
    for s in starts {
        if !ids.contains_key(&s) {
            ids.insert(s.clone(), prod.states.len());
            work.push(prod.states.len());
            prod.states.push(s);
            prod.succ.push(Vec::new());
        }
    }
    while let Some(x) = work.pop() {
        let locs = prod.states[x].clone();
        for (next, moves) in joint_moves(net, &locs) {
            let y = match ids.get(&next) {
                Some(&y) => y,
                None => {
                    if prod.states.len() >= ORACLE_STATE_BOUND {
                        return Err(Error::StateBound {
                            bound: ORACLE_STATE_BOUND,
                        });
                    }
                    let y = prod.states.len();
                    ids.insert(next.clone(), y);
                    prod.states.push(next);
                    prod.succ.push(Vec::new());
                    work.push(y);
                    y
                }
            };
            prod.succ[x].push((y, moves));
        }
    }
    Ok(prod)
}

fn reaches(prod: &Product, from: &[usize], goal: usize) -> bool {
    let mut seen = vec![false; prod.states.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &f in from {
        if !seen[f] {
            seen[f] = true;
            queue.push_back(f);
        }
    }
    while let Some(x) = queue.pop_front() {
        if x == goal {
            return true;
        }
        for (y, _) in &prod.succ[x] {
            if !seen[*y] {
                seen[*y] = true;
                queue.push_back(*y);
            }
        }
    }
    false
}

/// Independent decision of whether `net` satisfies `spec`.
pub fn satisfies(net: &Network, spec: &Specification) -> Result<bool> {
    let prod = build(net)?;
    let at = |set: &BTreeSet<(usize, StateId)>, x: usize| set.iter().any(|&(i, s)| prod.states[x][i] == s);
    for x in 0..prod.states.len() {
        if at(&spec.safety_error, x) {
            return Ok(false);
        }
        if spec.deadlock_is_violation && prod.succ[x].is_empty() {
            return Ok(false);
        }
    }
    for x in 0..prod.states.len() {
        if at(&spec.buchi_accepting, x) {
            let next: Vec<usize> = prod.succ[x].iter().map(|(y, _)| *y).collect();
            if reaches(&prod, &next, x) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Open (state, label) slots of synthesizable `proc` that no reachable location
/// of the candidate `cand` could fire, even with every open slot of every
/// process of `template` filled in.
pub fn dead_slots(template: &Network, cand: &Network, proc: usize) -> Result<BTreeSet<(StateId, usize)>> {
    let prod = build(cand)?;
    let mut saturated = Vec::with_capacity(cand.len());
    for (j, p) in cand.processes().iter().enumerate() {
        let t = template.process(j);
        let mut p = p.clone();
        if t.role == Role::Synthesizable {
            let mut ts = p.lts.transitions().clone();
            for s in 0..t.lts.num_states() {
                for l in (0..t.lts.labels().len()).filter(|&l| t.is_open_slot(s, l)) {
                    ts.insert(Transition::new(s, l, s));
                }
            }
            p.lts = p.lts.with_transitions(ts)?;
        }
        saturated.push(p);
    }
    let saturated = Network::new(saturated)?;
    let t = template.process(proc);
    let mut live = BTreeSet::new();
    for locs in &prod.states {
        for (_, moves) in joint_moves(&saturated, locs) {
            for (j, tr) in moves {
                if j == proc {
                    live.insert((tr.src, tr.label));
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for s in 0..t.lts.num_states() {
        for l in 0..t.lts.labels().len() {
            if t.is_open_slot(s, l) && !live.contains(&(s, l)) {
                out.insert((s, l));
            }
        }
    }
    Ok(out)
}

fn check_size(vmap: &VariableMap) -> Result<()> {
    if vmap.len() > ORACLE_VAR_LIMIT {
        return Err(Error::TooManyVariables {
            vars: vmap.len(),
            limit: ORACLE_VAR_LIMIT,
        });
    }
    Ok(())
}

/// f(σ) through decoding and state renaming, not through formula renaming.
pub fn image(sigma: &Assignment, f: &Permutation, vmap: &VariableMap, net: &Network) -> Result<Assignment> {
    let m = decode(sigma, vmap, net)?;
    let mut procs = m.processes().to_vec();
    for i in net.synthesizable() {
        procs[i].lts = apply_permutation(&procs[i].lts, f.process_map(i))?;
    }
    Ok(encode(&Network::new(procs)?, vmap))
}

/// Groups `items` by the orbit relation generated by `perms`.
pub fn quotient(
    items: &BTreeSet<Assignment>,
    perms: &[Permutation],
    vmap: &VariableMap,
    net: &Network,
) -> Result<Vec<BTreeSet<Assignment>>> {
    let mut left = items.clone();
    let mut classes = Vec::new();
    while let Some(s) = left.pop_first() {
        let mut class = BTreeSet::from([s.clone()]);
        for f in perms {
            let t = image(&s, f, vmap, net)?;
            left.remove(&t);
            class.insert(t);
        }
        classes.push(class);
    }
    Ok(classes)
}

pub fn brute_force(problem: &Problem, a: &PermutableSet) -> Result<OracleResult> {
    let vmap = VariableMap::allocate(&problem.net);
    check_size(&vmap)?;
    let clauses = phi_clauses(&problem.net, &problem.profile, &vmap);
    let n = vmap.len();
    let verdicts: Vec<Result<Option<(Assignment, bool)>>> = (0..1u64 << n)
        .into_par_iter()
        .map(|i| {
            let sigma = Assignment::from_index(n, i);
            if !clauses.iter().all(|c| c.eval(&sigma)) {
                return Ok(None);
            }
            let good = satisfies(&decode(&sigma, &vmap, &problem.net)?, &problem.spec)?;
            Ok(Some((sigma, good)))
        })
        .collect();
    let mut all_solutions = BTreeSet::new();
    let mut phi_models = 0;
    for v in verdicts {
        if let Some((sigma, good)) = v? {
            phi_models += 1;
            if good {
                all_solutions.insert(sigma);
            }
        }
    }
    let perms: Vec<Permutation> = permutations(a).collect();
    let classes = quotient(&all_solutions, &perms, &vmap, &problem.net)?;
    Ok(OracleResult {
        all_solutions,
        classes,
        phi_models,
    })
}

/// Second enumerator: descending order, store-based Φ check, engine model checker.
pub fn brute_force_cross(problem: &Problem) -> Result<BTreeSet<Assignment>> {
    let (store, vmap) = crate::encoding::build_phi(&problem.net, &problem.profile, 0)?;
    check_size(&vmap)?;
    let n = vmap.len();
    let opts = McOptions::with_bound(ORACLE_STATE_BOUND);
    let mut out = BTreeSet::new();
    for i in (0..1u64 << n).rev() {
        let sigma = Assignment::from_index(n, i);
        if store.satisfies(&sigma) && mc(&decode(&sigma, &vmap, &problem.net)?, &problem.spec, &opts)?.is_ok() {
            out.insert(sigma);
        }
    }
    Ok(out)
}

/// Solutions grouped by "equal after forgetting dead slots", and by the
/// coarser relation that also allows permutations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadQuotient {
    pub dead_classes: usize,
    pub combined: Vec<BTreeSet<Assignment>>,
    /// No non-identity permutation maps a solution into its own dead class.
    pub free_action: bool,
}

pub fn dead_quotient(problem: &Problem, a: &PermutableSet, solutions: &BTreeSet<Assignment>) -> Result<DeadQuotient> {
    let vmap = VariableMap::allocate(&problem.net);
    let net = &problem.net;
    let key = |sigma: &Assignment| -> Result<Assignment> {
        let cand = decode(sigma, &vmap, net)?;
        let mut k = sigma.clone();
        for i in net.synthesizable() {
            for (s, l) in dead_slots(net, &cand, i)? {
                for v in vmap.slot_vars(i, s, l) {
                    k.set(v, false);
                }
            }
        }
        Ok(k)
    };
    let keys: BTreeMap<&Assignment, Assignment> =
        solutions.iter().map(|s| Ok((s, key(s)?))).collect::<Result<_>>()?;
    let distinct: BTreeSet<&Assignment> = keys.values().collect();
    let perms: Vec<Permutation> = permutations(a).collect();

    let ids: BTreeMap<&Assignment, usize> = distinct.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut free_action = true;
    for s in solutions {
        let ks = ids[&keys[s]];
        for f in &perms {
            let t = image(s, f, &vmap, net)?;
            let Some(kt) = keys.get(&t) else {
                return Err(Error::IsomorphismBroken(t.to_string()));
            };
            let kt = ids[kt];
            if !f.is_identity() && kt == ks {
                free_action = false;
            }
            let (x, y) = (find(&mut parent, ks), find(&mut parent, kt));
            parent[x] = y;
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<Assignment>> = BTreeMap::new();
    for s in solutions {
        let r = find(&mut parent, ids[&keys[s]]);
        groups.entry(r).or_default().insert(s.clone());
    }
    Ok(DeadQuotient {
        dead_classes: distinct.len(),
        combined: groups.into_values().collect(),
        free_action,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct RandomParams {
    pub max_states: usize,
    pub max_vars: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            max_states: 4,
            max_vars: 16,
        }
    }
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// A random instance: one synthesizable process with at most two labels,
/// an optional environment, random safety/Büchi monitors.
pub fn random_problem<R: Rng>(rng: &mut R, params: RandomParams) -> Problem {
    let n = rng.gen_range(2..=params.max_states.max(2));
    let (labels, env_out): (Vec<&str>, Vec<&str>) = match rng.gen_range(0..5) {
        0 => (vec!["a!"], vec![]),
        1 => (vec!["a!", "b!"], vec![]),
        2 => (vec!["a!", "c?"], vec!["c"]),
        3 => (vec!["a!", "t"], vec![]),
        _ => (vec!["c?", "d?"], vec!["c", "d"]),
    };
    let l = labels.len();
    let slots = params.max_vars / n;

    let mut a_size = rng.gen_range(0..n);
    while a_size > 0 && a_size * l + 1 > slots {
        a_size -= 1;
    }
    let mut candidates: Vec<StateId> = (1..n).collect();
    candidates.shuffle(rng);
    let a: BTreeSet<StateId> = candidates[..a_size].iter().copied().collect();

    let mut fixed: Vec<(StateId, usize)> = (0..n)
        .filter(|s| !a.contains(s))
        .flat_map(|s| (0..l).map(move |x| (s, x)))
        .collect();
    fixed.shuffle(rng);
    let budget = slots - a_size * l;
    let open = rng.gen_range(1..=budget.min(fixed.len()));
    let closed: BTreeSet<(StateId, usize)> = fixed[open..].iter().copied().collect();

    let mut delta0 = BTreeSet::new();
    for p in (0..n).filter(|s| !a.contains(s)) {
        for x in 0..l {
            for q in (0..n).filter(|s| !a.contains(s)) {
                if rng.gen_bool(0.15) {
                    delta0.insert(Transition::new(p, x, q));
                }
            }
        }
    }
    let plabels: Vec<Label> = labels.iter().map(|s| s.parse().expect("label")).collect();
    let lts = Lts::new("P", names("q", n), plabels, [0], delta0).expect("valid");
    let mut proc = Process::new(lts, Role::Synthesizable);
    proc.closed_slots = closed;
    proc.permutable = Some(a);
    let mut procs = vec![proc];

    let listens = env_out.is_empty() && rng.gen_bool(0.4) || rng.gen_bool(0.2);
    if !env_out.is_empty() || listens {
        let k = rng.gen_range(1..=2);
        let mut elabels: Vec<Label> = env_out.iter().map(|b| Label::output(b)).collect();
        if listens {
            elabels.push(Label::input("a"));
        }
        let mut ts = BTreeSet::new();
        for s in 0..k {
            for x in 0..elabels.len() {
                if rng.gen_bool(0.6) {
                    ts.insert(Transition::new(s, x, rng.gen_range(0..k)));
                }
            }
        }
        let env = Lts::new("Env", names("e", k), elabels, [0], ts).expect("valid");
        procs.push(Process::new(env, Role::Environment));
    }

    let mut observed: Vec<&str> = labels
        .iter()
        .filter_map(|s| s.strip_suffix('!'))
        .chain(env_out.iter().copied())
        .collect();
    observed.sort_unstable();
    let mut spec = Specification::default();
    let pick_alphabet = |rng: &mut R| -> Vec<Label> {
        let mut obs: Vec<&str> = observed.iter().copied().filter(|_| rng.gen_bool(0.7)).collect();
        if obs.is_empty() {
            obs.push(observed[rng.gen_range(0..observed.len())]);
        }
        obs.iter().map(|b| Label::input(b)).collect()
    };

    let want_safety = rng.gen_bool(0.6);
    let want_live = rng.gen_bool(0.6);
    spec.deadlock_is_violation = rng.gen_bool(0.25);
    let want_safety = want_safety || !(want_live || spec.deadlock_is_violation);

    if want_safety {
        let k = rng.gen_range(1..=2);
        let alpha = pick_alphabet(rng);
        let mut ts = BTreeSet::new();
        for s in 0..k {
            for x in 0..alpha.len() {
                let r: f64 = rng.gen();
                if r < 0.3 {
                    continue;
                }
                let dst = if r < 0.42 { k } else { rng.gen_range(0..k) };
                ts.insert(Transition::new(s, x, dst));
            }
        }
        let mut st = names("m", k);
        st.push("err".into());
        let mon = Lts::new("Safety", st, alpha, [0], ts).expect("valid");
        spec.safety_error.insert((procs.len(), k));
        procs.push(Process::new(mon, Role::SafetyMonitor));
    }
    if want_live {
        let k = rng.gen_range(1..=2);
        let alpha = pick_alphabet(rng);
        let mut ts = BTreeSet::new();
        for s in 0..k {
            for x in 0..alpha.len() {
                for d in 0..k {
                    if rng.gen_bool(0.5) {
                        ts.insert(Transition::new(s, x, d));
                    }
                }
            }
        }
        let mon = Lts::new("Live", names("l", k), alpha, [0], ts).expect("valid");
        let idx = procs.len();
        for s in 0..k {
            if s == k - 1 || rng.gen_bool(0.3) {
                spec.buchi_accepting.insert((idx, s));
            }
        }
        procs.push(Process::new(mon, Role::LivenessMonitor));
    }

    let profile = SyntacticProfile {
        determinism: rng.gen_bool(0.7),
        input_enabledness: rng.gen_bool(0.5),
        io_partition: rng.gen_bool(0.5),
        deadlock_freedom: rng.gen_bool(0.4),
    };
    Problem {
        net: Network::new(procs).expect("valid"),
        spec,
        profile,
    }
}

#[derive(Debug, Clone)]
pub struct SuiteInstance {
    pub problem: Problem,
    pub a: PermutableSet,
    pub oracle: OracleResult,
}

/// `count` random instances that have at least one Φ-model and at least one
/// Φ-model violating the specification. Instances with fewer than two
/// permutable states are kept only occasionally.
pub fn random_suite(seed: u64, count: usize, params: RandomParams) -> Result<Vec<SuiteInstance>> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let problem = random_problem(&mut rng, params);
        let a = crate::iso::permutable_states(&problem.net)?;
        if a.is_trivial() && !rng.gen_bool(0.25) {
            continue;
        }
        let oracle = brute_force(&problem, &a)?;
        if oracle.phi_models == 0 || oracle.phi_models == oracle.all_solutions.len() {
            continue;
        }
        out.push(SuiteInstance { problem, a, oracle });
    }
    Ok(out)
}

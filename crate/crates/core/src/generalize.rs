//! Generalizers: from one bad (or correct) assignment to a formula covering many.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{decode, VariableMap};
use crate::error::{Error, Result};
use crate::iso::{permute_assignment, permute_cube, Permutation};
use crate::lts::{Label, LabelId, LabelKind, Network, ProductState, Role, StateId};
use crate::mc::{check, Evidence, Lasso, McOptions, Specification, Trace, Verdict};
use crate::product::{Move, ProductGraph};
use crate::sat::{Assignment, Cube, Lit};

/// How safety (and deadlock) violations are generalized.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SafetyGeneralizer {
    /// Synthesizable transitions used by the counterexample trace.
    #[default]
    Trace,
    /// Every transition of the candidate.
    Assignment,
}

/// A disjunction of cubes, deduplicated, containing the generalized assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Generalization {
    cubes: Vec<Cube>,
}

impl Generalization {
    pub fn new(cubes: Vec<Cube>, sigma: &Assignment) -> Result<Generalization> {
        let mut seen = BTreeSet::new();
        let cubes: Vec<Cube> = cubes.into_iter().filter(|c| seen.insert(c.clone())).collect();
        if !cubes.iter().any(|c| c.eval(sigma)) {
            return Err(Error::SelfInclusion);
        }
        Ok(Generalization { cubes })
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn into_cubes(self) -> Vec<Cube> {
        self.cubes
    }

    pub fn eval(&self, a: &Assignment) -> bool {
        self.cubes.iter().any(|c| c.eval(a))
    }
}

pub fn gamma_safe(sigma: &Assignment) -> Cube {
    Cube::positive(sigma.true_vars())
}

fn project<'a>(moves: impl Iterator<Item = &'a Move>, vmap: &VariableMap, net: &Network) -> Result<Vec<Lit>> {
    let mut lits = Vec::new();
    for m in moves {
        let p = net.process(m.process);
        if p.role != crate::lts::Role::Synthesizable {
            continue;
        }
        match vmap.var(m.process, m.transition) {
            Some(v) => lits.push(Lit::pos(v)),
            None if !p.is_open_slot(m.transition.src, m.transition.label) => {}
            None => {
                return Err(Error::UnknownVariable(format!(
                    "{}: {}",
                    p.lts.name(),
                    p.lts.render(&m.transition)
                )))
            }
        }
    }
    Ok(lits)
}

/// Positive cube of the synthesizable transitions along a safety trace.
pub fn gamma_trace(trace: &Trace, vmap: &VariableMap, net: &Network) -> Result<Cube> {
    let lits = project(trace.steps.iter().flat_map(|s| s.moves.iter()), vmap, net)?;
    Ok(Cube::new(lits).expect("positive"))
}

/// Positive cube of the synthesizable transitions on the lasso's stem and cycle.
pub fn gamma_live(_sigma: &Assignment, lasso: &Lasso, vmap: &VariableMap, net: &Network) -> Result<Cube> {
    let steps = lasso.stem.steps.iter().chain(&lasso.cycle);
    let lits = project(steps.flat_map(|s| s.moves.iter()), vmap, net)?;
    Ok(Cube::new(lits).expect("positive"))
}

/// Whether process `j` at `loc` can take `label` in some completion of the template.
fn may_take(net: &Network, j: usize, loc: usize, label: &Label) -> bool {
    let p = net.process(j);
    let Some(l) = p.lts.label_id(label) else {
        return false;
    };
    p.lts.outgoing(loc).any(|t| t.label == l)
        || (p.role == Role::Synthesizable && p.is_open_slot(loc, l))
}

/// Whether adding a transition on `label` to process `i` could enable a move
/// from the product state `end`, given what the partners can take there.
fn could_enable(net: &Network, i: usize, label: &Label, end: &ProductState) -> bool {
    let others = (0..net.len()).filter(|&j| j != i);
    match label.kind() {
        LabelKind::Internal => true,
        LabelKind::Input => {
            let partner = Label::output(label.base());
            others.into_iter().any(|j| may_take(net, j, end.locations[j], &partner))
        }
        LabelKind::Output => {
            let listener = Label::input(label.base());
            others
                .filter(|&j| !net.process(j).role.is_monitor())
                .filter(|&j| net.process(j).lts.label_id(&listener).is_some())
                .all(|j| may_take(net, j, end.locations[j], &listener))
        }
    }
}

/// The trace plus "no transition σ lacks" at the deadlocked synthesizable
/// locations, restricted to labels some partner could synchronize on there.
pub fn gamma_deadlock(sigma: &Assignment, trace: &Trace, vmap: &VariableMap, net: &Network) -> Result<Cube> {
    let mut lits = project(trace.steps.iter().flat_map(|s| s.moves.iter()), vmap, net)?;
    let end = trace.end();
    for i in net.synthesizable() {
        let lts = &net.process(i).lts;
        for v in vmap.state_vars(i, end.locations[i]) {
            let label = lts.label(vmap.info(v).transition.label);
            if !sigma.get(v) && could_enable(net, i, label, end) {
                lits.push(Lit::neg(v));
            }
        }
    }
    Ok(Cube::new(lits).expect("σ satisfies its own literals"))
}

pub fn gamma_lts(
    sigma: &Assignment,
    evidence: &Evidence,
    vmap: &VariableMap,
    net: &Network,
    safety: SafetyGeneralizer,
) -> Result<Generalization> {
    let cube = match (evidence, safety) {
        (Evidence::Safety(_), SafetyGeneralizer::Assignment) => gamma_safe(sigma),
        (Evidence::Safety(t), SafetyGeneralizer::Trace) => gamma_trace(t, vmap, net)?,
        (Evidence::Deadlock(t), _) => gamma_deadlock(sigma, t, vmap, net)?,
        (Evidence::Liveness(l), _) => gamma_live(sigma, l, vmap, net)?,
    };
    Generalization::new(vec![cube], sigma)
}

/// Fixes every variable except those of the given dead slots.
pub fn gamma_dead(sigma: &Assignment, dead: &BTreeSet<(usize, StateId, LabelId)>, vmap: &VariableMap) -> Result<Generalization> {
    let free: BTreeSet<_> = dead.iter().flat_map(|&(p, s, l)| vmap.slot_vars(p, s, l)).collect();
    let lits = vmap
        .vars()
        .filter(|v| !free.contains(v))
        .map(|v| Lit::new(v, sigma.get(v)))
        .collect();
    Generalization::new(vec![Cube::new(lits).expect("one literal per var")], sigma)
}

/// Process `j` has `label` in its alphabet and can never take it from `loc`:
/// no Δ0 transition there and no variable that could add one.
fn constantly_lacks(net: &Network, j: usize, loc: StateId, label: &Label) -> bool {
    let p = net.process(j);
    let Some(l) = p.lts.label_id(label) else {
        return false;
    };
    let open = p.role == Role::Synthesizable && p.is_open_slot(loc, l);
    !open && !p.lts.outgoing(loc).any(|t| t.label == l)
}

fn blocked_by_constants(net: &Network, i: usize, label: &Label, at: &ProductState) -> bool {
    let lacks = |j: usize, l: &Label| j != i && constantly_lacks(net, j, at.locations[j], l);
    let listener = Label::input(label.base());
    let some_listener_lacks = |skip: usize| {
        (0..net.len())
            .filter(|&k| k != skip && !net.process(k).role.is_monitor())
            .any(|k| lacks(k, &listener))
    };
    match label.kind() {
        LabelKind::Internal => false,
        LabelKind::Output => some_listener_lacks(i),
        LabelKind::Input => {
            let emitter = Label::output(label.base());
            (0..net.len())
                .filter(|&j| j != i && net.process(j).lts.label_id(&emitter).is_some())
                .all(|j| lacks(j, &emitter) || some_listener_lacks(j))
        }
    }
}

/// Open slots of the template `net` that cannot fire at any reachable
/// location of their source state, whatever any variable says. Candidates
/// that differ only on these slots have the same reachable product, so the
/// set is the same for all of them.
pub fn dead_slots(net: &Network, graph: &ProductGraph) -> BTreeSet<(usize, StateId, LabelId)> {
    let mut out = BTreeSet::new();
    for i in net.synthesizable() {
        let p = net.process(i);
        for s in 0..p.lts.num_states() {
            let here: Vec<&ProductState> = graph.states.iter().filter(|x| x.locations[i] == s).collect();
            for (l, label) in p.lts.labels().iter().enumerate() {
                if p.is_open_slot(s, l) && here.iter().all(|x| blocked_by_constants(net, i, label, x)) {
                    out.insert((i, s, l));
                }
            }
        }
    }
    out
}

/// Everything needed to check and generalize candidates of one problem.
#[derive(Debug, Clone)]
pub struct Checker<'a> {
    pub net: &'a Network,
    pub spec: &'a Specification,
    pub vmap: &'a VariableMap,
    pub state_bound: usize,
    pub safety: SafetyGeneralizer,
}

impl Checker<'_> {
    pub fn check(&self, sigma: &Assignment, ranks: Option<Vec<Vec<usize>>>) -> Result<(Verdict, ProductGraph, Network)> {
        let cand = decode(sigma, self.vmap, self.net)?;
        let opts = McOptions {
            state_bound: self.state_bound,
            ranks,
        };
        let (v, g) = check(&cand, self.spec, &opts)?;
        Ok((v, g, cand))
    }

    pub fn gamma_lts(&self, sigma: &Assignment, evidence: &Evidence) -> Result<Generalization> {
        gamma_lts(sigma, evidence, self.vmap, self.net, self.safety)
    }

    /// Checks f(ρ) under ranks f⁻¹ (when normalizing) and generalizes its own counterexample.
    pub fn gamma_image(&self, rho: &Assignment, f: &Permutation, normalize: bool) -> Result<Generalization> {
        let tau = permute_assignment(f, rho, self.vmap)?;
        let ranks = normalize.then(|| f.image_ranks());
        let (verdict, _, _) = self.check(&tau, ranks)?;
        match verdict.evidence() {
            None => Err(Error::IsomorphismBroken(tau.to_string())),
            Some(e) => self.gamma_lts(&tau, e),
        }
    }
}

/// Equivalence closure computed from scratch: one model check per permutation.
/// Returns the generalization and the number of model checks performed.
pub fn gamma_closure_naive(
    checker: &Checker<'_>,
    rho: &Assignment,
    perms: &[Permutation],
    normalize: bool,
) -> Result<(Generalization, usize)> {
    let parts: Vec<Result<Generalization>> = perms
        .par_iter()
        .map(|f| checker.gamma_image(rho, f, normalize))
        .collect();
    let mut cubes = Vec::new();
    for p in parts {
        cubes.extend(p?.into_cubes());
    }
    Ok((Generalization::new(cubes, rho)?, perms.len()))
}

/// Permuter-based closure: rename the cubes of γ(ρ) under every permutation.
pub fn gamma_pi(
    rho: &Assignment,
    base: &Generalization,
    perms: &[Permutation],
    vmap: &VariableMap,
) -> Result<Generalization> {
    let mut cubes = Vec::with_capacity(perms.len() * base.cubes().len());
    for f in perms {
        for c in base.cubes() {
            cubes.push(permute_cube(f, c, vmap)?);
        }
    }
    Generalization::new(cubes, rho)
}

//! The guess-check-generalize loop, its optimizers and the property audit.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::encoding::{build_phi, phi_clauses, SyntacticProfile, VariableMap};
use crate::error::{Error, Result};
use crate::generalize::{
    dead_slots, gamma_closure_naive, gamma_dead, gamma_pi, Checker, Generalization, SafetyGeneralizer,
};
use crate::iso::{equivalence_class, permutable_states, permutations, permute_assignment, PermutableSet, Permutation};
use crate::lts::Network;
use crate::mc::{Specification, DEFAULT_STATE_BOUND};
use crate::sat::{Assignment, Cube};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub net: Network,
    pub spec: Specification,
    pub profile: SyntacticProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Enumerate,
    First,
    Exhaust,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Unopt,
    Dead,
    Naive,
    Perm,
}

impl Optimizer {
    pub const ALL: [Optimizer; 4] = [Optimizer::Unopt, Optimizer::Dead, Optimizer::Naive, Optimizer::Perm];

    fn uses_classes(self) -> bool {
        matches!(self, Optimizer::Naive | Optimizer::Perm)
    }
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimizer::Unopt => "unopt",
            Optimizer::Dead => "dead",
            Optimizer::Naive => "naive",
            Optimizer::Perm => "perm",
        })
    }
}

impl FromStr for Optimizer {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "unopt" => Ok(Optimizer::Unopt),
            "dead" => Ok(Optimizer::Dead),
            "naive" => Ok(Optimizer::Naive),
            "perm" => Ok(Optimizer::Perm),
            _ => Err(format!("unknown optimizer `{s}`")),
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "enumerate" => Ok(Mode::Enumerate),
            "first" => Ok(Mode::First),
            "exhaust" | "exhaust-check" => Ok(Mode::Exhaust),
            _ => Err(format!("unknown mode `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    pub mode: Mode,
    pub optimizer: Optimizer,
    pub seed: u64,
    pub timeout: Duration,
    pub state_bound: usize,
    pub safety: SafetyGeneralizer,
    /// Widen naive/perm solution blocks by dead-transition re-pointing.
    pub dead_widening: bool,
    /// Check f(ρ) under ranks f⁻¹ in naive mode.
    pub normalize_naive: bool,
    pub record_pruned: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            mode: Mode::Enumerate,
            optimizer: Optimizer::Perm,
            seed: 0,
            timeout: Duration::from_secs(3600),
            state_bound: DEFAULT_STATE_BOUND,
            safety: SafetyGeneralizer::Trace,
            dead_widening: true,
            normalize_naive: true,
            record_pruned: false,
        }
    }
}

impl EngineConfig {
    pub fn with(optimizer: Optimizer, mode: Mode) -> EngineConfig {
        EngineConfig {
            optimizer,
            mode,
            ..EngineConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Solution,
    Generalization,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PruneRecord {
    pub iteration: usize,
    pub kind: BlockKind,
    pub source: Assignment,
    pub cubes: Vec<Cube>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunLedger {
    pub solutions: Vec<Assignment>,
    pub candidates: Vec<Assignment>,
    pub mc_calls: usize,
    /// Model checks spent inside generalization (naive: |perms| per bad candidate, perm: 1).
    pub gen_mc_calls: usize,
    pub sat_calls: usize,
    pub bad_candidates: usize,
    pub pruned_trace: Option<Vec<PruneRecord>>,
    #[serde(serialize_with = "secs")]
    pub elapsed: Duration,
    pub timed_out: bool,
    pub num_vars: usize,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl RunLedger {
    pub fn iterations(&self) -> usize {
        self.candidates.len()
    }
}

fn all_permutations(net: &Network, optimizer: Optimizer) -> Result<(PermutableSet, Vec<Permutation>)> {
    let a = permutable_states(net)?;
    let perms = if optimizer.uses_classes() {
        permutations(&a).collect()
    } else {
        vec![Permutation::identity(a.sizes())]
    };
    Ok((a, perms))
}

pub fn run(problem: &Problem, cfg: &EngineConfig) -> Result<RunLedger> {
    let start = Instant::now();
    let (mut store, vmap) = build_phi(&problem.net, &problem.profile, cfg.seed)?;
    problem.spec.validate(&problem.net)?;
    let (_, perms) = all_permutations(&problem.net, cfg.optimizer)?;
    let checker = Checker {
        net: &problem.net,
        spec: &problem.spec,
        vmap: &vmap,
        state_bound: cfg.state_bound,
        safety: cfg.safety,
    };
    let mut ledger = RunLedger {
        solutions: Vec::new(),
        candidates: Vec::new(),
        mc_calls: 0,
        gen_mc_calls: 0,
        sat_calls: 0,
        bad_candidates: 0,
        pruned_trace: cfg.record_pruned.then(Vec::new),
        elapsed: Duration::ZERO,
        timed_out: false,
        num_vars: vmap.len(),
    };

    loop {
        if start.elapsed() >= cfg.timeout {
            ledger.timed_out = true;
            break;
        }
        ledger.sat_calls += 1;
        let Some(sigma) = store.solve() else { break };
        debug_assert!(store.satisfies(&sigma));
        ledger.candidates.push(sigma.clone());
        let (verdict, graph, _) = checker.check(&sigma, None)?;
        ledger.mc_calls += 1;

        let (kind, gen) = match verdict.evidence() {
            None => {
                ledger.solutions.push(sigma.clone());
                if cfg.mode != Mode::Enumerate {
                    break;
                }
                let gen = match cfg.optimizer {
                    Optimizer::Unopt => Generalization::new(vec![Cube::of_assignment(&sigma)], &sigma)?,
                    Optimizer::Dead => gamma_dead(&sigma, &dead_slots(&problem.net, &graph), &vmap)?,
                    Optimizer::Naive | Optimizer::Perm if !cfg.dead_widening => {
                        let cubes = perms
                            .iter()
                            .map(|f| permute_assignment(f, &sigma, &vmap).map(|t| Cube::of_assignment(&t)))
                            .collect::<Result<Vec<_>>>()?;
                        Generalization::new(cubes, &sigma)?
                    }
                    Optimizer::Perm => {
                        let base = gamma_dead(&sigma, &dead_slots(&problem.net, &graph), &vmap)?;
                        gamma_pi(&sigma, &base, &perms, &vmap)?
                    }
                    Optimizer::Naive => {
                        let mut cubes = Vec::new();
                        for f in &perms {
                            let tau = permute_assignment(f, &sigma, &vmap)?;
                            let (_, g, _) = checker.check(&tau, None)?;
                            cubes.extend(gamma_dead(&tau, &dead_slots(&problem.net, &g), &vmap)?.into_cubes());
                        }
                        Generalization::new(cubes, &sigma)?
                    }
                };
                (BlockKind::Solution, gen)
            }
            Some(evidence) => {
                ledger.bad_candidates += 1;
                let gen = match cfg.optimizer {
                    Optimizer::Unopt | Optimizer::Dead => checker.gamma_lts(&sigma, evidence)?,
                    Optimizer::Naive => {
                        let (g, calls) = gamma_closure_naive(&checker, &sigma, &perms, cfg.normalize_naive)?;
                        ledger.mc_calls += calls;
                        ledger.gen_mc_calls += calls;
                        g
                    }
                    Optimizer::Perm => {
                        ledger.gen_mc_calls += 1;
                        let base = checker.gamma_lts(&sigma, evidence)?;
                        gamma_pi(&sigma, &base, &perms, &vmap)?
                    }
                };
                (BlockKind::Generalization, gen)
            }
        };
        for c in gen.cubes() {
            store.block_cube(c);
        }
        if let Some(trace) = &mut ledger.pruned_trace {
            trace.push(PruneRecord {
                iteration: ledger.candidates.len(),
                kind,
                source: sigma,
                cubes: gen.into_cubes(),
            });
        }
    }
    ledger.elapsed = start.elapsed();
    Ok(ledger)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub p1: bool,
    pub p2: bool,
    pub p3: bool,
    pub p4: bool,
    pub violations: Vec<String>,
}

impl PropertyReport {
    pub fn all_hold(&self) -> bool {
        self.p1 && self.p2 && self.p3 && self.p4
    }
}

pub const AUDIT_VAR_LIMIT: usize = 24;

/// Enumerates the models of Φ by brute force.
pub fn phi_models(problem: &Problem) -> Result<(VariableMap, Vec<Assignment>)> {
    let vmap = VariableMap::allocate(&problem.net);
    if vmap.len() > AUDIT_VAR_LIMIT {
        return Err(Error::TooManyVariables {
            vars: vmap.len(),
            limit: AUDIT_VAR_LIMIT,
        });
    }
    let clauses = phi_clauses(&problem.net, &problem.profile, &vmap);
    let n = vmap.len();
    let models = (0..1u64 << n)
        .map(|i| Assignment::from_index(n, i))
        .filter(|a| clauses.iter().all(|c| c.eval(a)))
        .collect();
    Ok((vmap, models))
}

/// Audits a run recorded with `record_pruned`: P1/P2 on the returned sets,
/// P3/P4 as invariants at every loop boundary of the pruned trace.
pub fn check_properties(problem: &Problem, cfg: &EngineConfig, ledger: &RunLedger) -> Result<PropertyReport> {
    let trace = ledger
        .pruned_trace
        .as_ref()
        .ok_or_else(|| Error::InvalidSpec("run was not recorded with a pruned trace".into()))?;
    let (vmap, models) = phi_models(problem)?;
    let a = permutable_states(&problem.net)?;
    let perms: Vec<Permutation> = permutations(&a).collect();
    let mut report = PropertyReport {
        p1: true,
        p2: true,
        p3: true,
        p4: true,
        violations: Vec::new(),
    };

    for (name, list, flag) in [
        ("P1", &ledger.solutions, &mut report.p1),
        ("P2", &ledger.candidates, &mut report.p2),
    ] {
        let members: BTreeSet<&Assignment> = list.iter().collect();
        for s in list {
            let class = equivalence_class(s, &vmap, &a)?;
            let hits = class.iter().filter(|c| members.contains(c)).count();
            if hits > 1 {
                *flag = false;
                report.violations.push(format!("{name}: class of {s} meets the set {hits} times"));
            }
        }
    }

    let index: HashMap<&Assignment, usize> = models.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut pruned = vec![false; models.len()];
    let checker = Checker {
        net: &problem.net,
        spec: &problem.spec,
        vmap: &vmap,
        state_bound: cfg.state_bound,
        safety: cfg.safety,
    };
    for rec in trace {
        let newly: Vec<usize> = (0..models.len())
            .filter(|&i| !pruned[i] && rec.cubes.iter().any(|c| c.eval(&models[i])))
            .collect();
        for &i in &newly {
            pruned[i] = true;
        }
        for &i in &newly {
            for f in &perms {
                let img = permute_assignment(f, &models[i], &vmap)?;
                let ok = index.get(&img).is_some_and(|&j| pruned[j]);
                if !ok {
                    report.p4 = false;
                    report
                        .violations
                        .push(format!("P4 at iteration {}: {} pruned but image {img} not", rec.iteration, models[i]));
                }
            }
        }
        if rec.kind == BlockKind::Generalization {
            for f in &perms {
                let rho = permute_assignment(f, &rec.source, &vmap)?;
                let gamma = checker.gamma_image(&rec.source, f, true)?;
                for (i, m) in models.iter().enumerate() {
                    if !pruned[i] && gamma.eval(m) {
                        report.p3 = false;
                        report.violations.push(format!(
                            "P3 at iteration {}: γ({rho}) covers unpruned {m}",
                            rec.iteration
                        ));
                        break;
                    }
                }
            }
        }
    }
    Ok(report)
}

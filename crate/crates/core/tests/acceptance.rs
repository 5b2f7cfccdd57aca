//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line
//! and fails on FAIL.

use std::collections::BTreeSet;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use isocomp::bench::matrix::{abp_two_state_rows, run_matrix, MatrixOptions, RowSpec};
use isocomp::bench::{build_abp, build_abp_without, CaseStudy, Variant};
use isocomp::encoding::VariableMap;
use isocomp::engine::{check_properties, phi_models, run, EngineConfig, Mode, Optimizer, Problem, RunLedger};
use isocomp::generalize::{gamma_closure_naive, gamma_pi, Checker, SafetyGeneralizer};
use isocomp::iso::{equivalence_class, permutable_states, permutations, permute_formula, Permutation};
use isocomp::lts::{Lts, Network, Process, Role, Transition};
use isocomp::mc::DEFAULT_STATE_BOUND;
use isocomp::oracle::{dead_quotient, random_suite, RandomParams, SuiteInstance};
use isocomp::sat::{Assignment, Cube};

const SUITE_SEED: u64 = 0x5eed;
const SUITE_SIZE: usize = 120;

fn suite() -> &'static [SuiteInstance] {
    static SUITE: OnceLock<Vec<SuiteInstance>> = OnceLock::new();
    SUITE.get_or_init(|| random_suite(SUITE_SEED, SUITE_SIZE, RandomParams::default()).unwrap())
}

fn verdict(n: u32, ok: bool, detail: &str) {
    println!("criterion {n}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn engine(problem: &Problem, optimizer: Optimizer, adjust: impl FnOnce(&mut EngineConfig)) -> RunLedger {
    let mut cfg = EngineConfig::with(optimizer, Mode::Enumerate);
    adjust(&mut cfg);
    let ledger = run(problem, &cfg).unwrap();
    assert!(!ledger.timed_out);
    ledger
}

fn sol_set(l: &RunLedger) -> BTreeSet<Assignment> {
    l.solutions.iter().cloned().collect()
}

#[test]
fn criterion_1_oracle_equivalence() {
    let start = Instant::now();
    let mut bad = Vec::new();
    for (k, inst) in suite().iter().enumerate() {
        for safety in [SafetyGeneralizer::Trace, SafetyGeneralizer::Assignment] {
            let l = engine(&inst.problem, Optimizer::Unopt, |c| c.safety = safety);
            if sol_set(&l) != inst.oracle.all_solutions || l.solutions.len() != inst.oracle.all_solutions.len() {
                bad.push(format!("instance {k} ({safety:?})"));
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        bad.is_empty() && suite().len() >= 100 && elapsed <= Duration::from_secs(600),
        &format!("{} instances, {:.1}s, mismatches: {bad:?}", suite().len(), elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_2_completeness_modulo_isomorphism() {
    let mut bad = Vec::new();
    let mut multi = 0;
    for (k, inst) in suite().iter().enumerate() {
        let oracle = &inst.oracle;
        multi += oracle.classes.iter().any(|c| c.len() > 1) as usize;

        // Exact isomorphism classes: widening by dead transitions switched off.
        let perm = engine(&inst.problem, Optimizer::Perm, |c| c.dead_widening = false);
        let naive = engine(&inst.problem, Optimizer::Naive, |c| c.dead_widening = false);
        let found = sol_set(&perm);
        let one_each = oracle.classes.iter().all(|c| c.iter().filter(|s| found.contains(s)).count() == 1);
        if !one_each || !found.is_subset(&oracle.all_solutions) || found.len() != oracle.classes.len() {
            bad.push(format!("instance {k}: perm misses or repeats an isomorphism class"));
        }
        if naive.solutions.len() != perm.solutions.len() {
            bad.push(format!("instance {k}: naive {} vs perm {}", naive.solutions.len(), perm.solutions.len()));
        }

        // Default engine: one member per class of "isomorphic after re-pointing dead transitions".
        let perm = engine(&inst.problem, Optimizer::Perm, |_| {});
        let naive = engine(&inst.problem, Optimizer::Naive, |_| {});
        let q = dead_quotient(&inst.problem, &inst.a, &oracle.all_solutions).unwrap();
        let found = sol_set(&perm);
        let one_each = q.combined.iter().all(|c| c.iter().filter(|s| found.contains(s)).count() == 1);
        if !one_each || !found.is_subset(&oracle.all_solutions) || found.len() != q.combined.len() {
            bad.push(format!("instance {k}: widened perm misses or repeats a combined class"));
        }
        if naive.solutions.len() != perm.solutions.len() {
            bad.push(format!("instance {k}: widened naive {} vs perm {}", naive.solutions.len(), perm.solutions.len()));
        }
    }
    verdict(
        2,
        bad.is_empty(),
        &format!("{} instances, {multi} with non-singleton classes, failures: {bad:?}", suite().len()),
    );
}

/// Models over all 2^n assignments.
fn models(n: usize, eval: impl Fn(&Assignment) -> bool) -> Vec<u64> {
    (0..1u64 << n).filter(|&i| eval(&Assignment::from_index(n, i))).collect()
}

#[test]
fn criterion_3_permuter_equals_closure() {
    let params = RandomParams {
        max_states: 4,
        max_vars: 12,
    };
    let mut events = 0;
    let mut bad = Vec::new();
    let mut seed = 0x3000;
    while events < 1000 {
        for inst in random_suite(seed, 20, params).unwrap() {
            let problem = &inst.problem;
            let (vmap, phi) = phi_models(problem).unwrap();
            assert!(vmap.len() <= 12);
            let perms: Vec<Permutation> = permutations(&inst.a).collect();
            for safety in [SafetyGeneralizer::Trace, SafetyGeneralizer::Assignment] {
                let checker = Checker {
                    net: &problem.net,
                    spec: &problem.spec,
                    vmap: &vmap,
                    state_bound: DEFAULT_STATE_BOUND,
                    safety,
                };
                for rho in phi.iter().filter(|s| !inst.oracle.all_solutions.contains(*s)) {
                    let (v, _, _) = checker.check(rho, None).unwrap();
                    let base = checker.gamma_lts(rho, v.evidence().unwrap()).unwrap();
                    let pi = gamma_pi(rho, &base, &perms, &vmap).unwrap();
                    let (closure, calls) = gamma_closure_naive(&checker, rho, &perms, true).unwrap();
                    events += 1;
                    if models(vmap.len(), |a| pi.eval(a)) != models(vmap.len(), |a| closure.eval(a)) {
                        bad.push(format!("seed {seed:#x}: ρ = {rho}"));
                    }
                    assert_eq!(calls, perms.len());
                }
            }
        }
        seed += 1;
    }
    verdict(3, bad.is_empty(), &format!("{events} events, mismatches: {bad:?}"));
}

#[test]
fn criterion_4_worked_example() {
    let lts = Lts::from_names("P", &["p0", "p1", "p2", "p3"], &["a!"], &["p0"], &[]).unwrap();
    let net = Network::new(vec![Process::new(lts, Role::Synthesizable)]).unwrap();
    let vmap = VariableMap::allocate(&net);
    let a = permutable_states(&net).unwrap();
    let e = |p: usize, q: usize| vmap.var(0, Transition::new(p, 0, q)).unwrap();
    let gamma1 = Cube::positive([e(0, 1), e(1, 2), e(2, 3)]);
    let gamma2 = Cube::positive([e(0, 3), e(3, 1), e(1, 2)]);
    // f = {p1 ↦ p3, p3 ↦ p2, p2 ↦ p1}
    let f = Permutation::from_pairs(&a, &[(0, 1, 3), (0, 3, 2), (0, 2, 1)]).unwrap();
    let image = permute_formula(&f, std::slice::from_ref(&gamma1), &vmap).unwrap();
    let rendered: Vec<String> = image[0].lits().iter().map(|l| vmap.describe(l.var, &net)).collect();
    verdict(
        4,
        image == vec![gamma2.clone()] && image[0].lits() == gamma2.lits(),
        &format!("image = {rendered:?}"),
    );
}

#[test]
fn criterion_5_class_size_arithmetic() {
    // An asymmetric chain over four permutable states.
    let lts = Lts::from_names("P", &["p0", "p1", "p2", "p3", "p4"], &["a!"], &["p0"], &[]).unwrap();
    let net = Network::new(vec![Process::new(lts, Role::Synthesizable)]).unwrap();
    let vmap = VariableMap::allocate(&net);
    let a = permutable_states(&net).unwrap();
    let mut sigma = Assignment::all_false(vmap.len());
    for (p, q) in [(0, 1), (1, 2), (2, 3), (3, 4)] {
        sigma.set(vmap.var(0, Transition::new(p, 0, q)).unwrap(), true);
    }
    let size = equivalence_class(&sigma, &vmap, &a).unwrap().len();

    let mut checked = 0;
    let mut bad = Vec::new();
    for (k, inst) in suite().iter().enumerate() {
        if inst.a.is_trivial() || inst.oracle.all_solutions.is_empty() {
            continue;
        }
        let q = dead_quotient(&inst.problem, &inst.a, &inst.oracle.all_solutions).unwrap();
        if !q.free_action {
            continue;
        }
        checked += 1;
        let factor = inst.a.num_permutations();
        let dead = engine(&inst.problem, Optimizer::Dead, |_| {}).solutions.len();
        let perm = engine(&inst.problem, Optimizer::Perm, |_| {}).solutions.len();
        if dead != factor * perm || dead != q.dead_classes {
            bad.push(format!("instance {k}: dead {dead}, perm {perm}, factor {factor}"));
        }
    }
    // ABP;{s1,s2}: every solution class is full and asymmetric.
    let abp = build_abp(Variant::ManyProcess, &["s1", "s2"]).unwrap();
    let dead = engine(&abp, Optimizer::Dead, |_| {}).solutions.len();
    let perm = engine(&abp, Optimizer::Perm, |_| {}).solutions.len();
    verdict(
        5,
        size == 24 && checked > 0 && bad.is_empty() && dead == 2 * perm,
        &format!("class size {size}, {checked} qualifying instances, ABP;{{s1,s2}} dead {dead} perm {perm}, failures: {bad:?}"),
    );
}

#[test]
fn criterion_6_properties_audit() {
    let mut bad = Vec::new();
    for (k, inst) in suite().iter().enumerate() {
        for widening in [true, false] {
            let cfg = EngineConfig {
                record_pruned: true,
                dead_widening: widening,
                ..EngineConfig::with(Optimizer::Perm, Mode::Enumerate)
            };
            let ledger = run(&inst.problem, &cfg).unwrap();
            let report = check_properties(&inst.problem, &cfg, &ledger).unwrap();
            if !report.all_hold() {
                bad.push(format!("instance {k} (widening {widening}): {:?}", report.violations));
            }
        }
    }
    verdict(6, bad.is_empty(), &format!("{} instances, violations: {bad:?}", suite().len()));
}

#[test]
fn criterion_7_mc_call_economy() {
    let mut bad = Vec::new();
    let (mut nontrivial, mut strict) = (0, 0);
    for (k, inst) in suite().iter().enumerate() {
        if inst.a.is_trivial() {
            continue;
        }
        nontrivial += 1;
        let factor = inst.a.num_permutations();
        let perm = engine(&inst.problem, Optimizer::Perm, |_| {});
        let naive = engine(&inst.problem, Optimizer::Naive, |_| {});
        let unopt = engine(&inst.problem, Optimizer::Unopt, |_| {});
        if naive.gen_mc_calls != factor * perm.gen_mc_calls {
            bad.push(format!("instance {k}: gen naive {} vs {factor} x {}", naive.gen_mc_calls, perm.gen_mc_calls));
        }
        if perm.mc_calls >= naive.mc_calls {
            bad.push(format!("instance {k}: mc perm {} >= naive {}", perm.mc_calls, naive.mc_calls));
        }
        let vmap = VariableMap::allocate(&inst.problem.net);
        let sols = sol_set(&perm);
        let nontrivial_bad = perm
            .candidates
            .iter()
            .filter(|c| !sols.contains(*c))
            .any(|c| equivalence_class(c, &vmap, &inst.a).unwrap().len() > 1);
        if nontrivial_bad {
            strict += 1;
            if perm.mc_calls >= unopt.mc_calls {
                bad.push(format!("instance {k}: mc perm {} >= unopt {}", perm.mc_calls, unopt.mc_calls));
            }
        }
    }
    verdict(
        7,
        bad.is_empty() && nontrivial > 0,
        &format!("{nontrivial} instances with |A| >= 2, {strict} with a nontrivial bad class, failures: {bad:?}"),
    );
}

#[test]
fn criterion_8_abp_two_state_ratios() {
    let opts = MatrixOptions {
        timeout: Duration::from_secs(3600),
        record_time: false,
        threads: None,
    };
    let rows = run_matrix(&abp_two_state_rows(&[Optimizer::Dead, Optimizer::Naive, Optimizer::Perm]), &opts).unwrap();
    let mut bad = Vec::new();
    let mut summary = Vec::new();
    for chunk in rows.chunks(3) {
        let (dead, naive, perm) = (&chunk[0], &chunk[1], &chunk[2]);
        summary.push(format!("{} {}/{}/{}", dead.a, dead.sol, naive.sol, perm.sol));
        if chunk.iter().any(|r| r.timeout) || dead.sol != 2 * perm.sol || naive.sol != perm.sol {
            bad.push(dead.a.clone());
        }
    }
    // Stretch target, reported but not gating.
    let stretch = run_matrix(&[RowSpec::new(CaseStudy::Abp, &["s1", "s2"], &Optimizer::ALL)], &opts).unwrap();
    let counts: Vec<u64> = stretch.iter().map(|r| r.sol).collect();
    println!("ABP;{{s1,s2}} unopt/dead/naive/perm = {counts:?} (stretch target: [64, 8, 4, 4])");
    verdict(8, bad.is_empty(), &format!("dead/naive/perm: {summary:?}, failing rows: {bad:?}"));
}

#[test]
fn criterion_9_unrealizable_exhaustion() {
    let problem = build_abp_without(Variant::ManyProcess, &["s1", "s2"], &["s7"]).unwrap();
    let mut iters = Vec::new();
    let mut ok = true;
    for o in Optimizer::ALL {
        let cfg = EngineConfig::with(o, Mode::First);
        let l = run(&problem, &cfg).unwrap();
        ok &= l.solutions.is_empty() && !l.timed_out;
        iters.push((o, l.iterations()));
    }
    let it = |o: Optimizer| iters.iter().find(|x| x.0 == o).unwrap().1;
    verdict(
        9,
        ok && it(Optimizer::Perm) < it(Optimizer::Unopt),
        &format!("iterations {iters:?}"),
    );
}

//! Propositional formulas, assignments and an incremental CDCL solver.

use std::fmt;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A propositional variable; ids are dense and 0-based (DIMACS id = index + 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn dimacs(self) -> i64 {
        self.0 as i64 + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Lit {
    pub var: Var,
    pub positive: bool,
}

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit { var, positive }
    }

    pub fn pos(var: Var) -> Lit {
        Lit::new(var, true)
    }

    pub fn neg(var: Var) -> Lit {
        Lit::new(var, false)
    }

    pub fn negate(self) -> Lit {
        Lit::new(self.var, !self.positive)
    }

    pub fn eval(self, a: &Assignment) -> bool {
        a.get(self.var) == self.positive
    }

    fn code(self) -> usize {
        2 * self.var.index() + usize::from(!self.positive)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "x{}", self.var.0)
        } else {
            write!(f, "¬x{}", self.var.0)
        }
    }
}

/// Sorts by variable and drops repeated literals. Returns `None` if some
/// variable occurs with both signs.
fn normalize(mut lits: Vec<Lit>) -> Option<Vec<Lit>> {
    lits.sort();
    lits.dedup();
    if lits.windows(2).any(|w| w[0].var == w[1].var) {
        None
    } else {
        Some(lits)
    }
}

/// Disjunction of literals; empty means false.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Clause(Vec<Lit>);

impl Clause {
    /// Returns `None` for tautologies.
    pub fn new(lits: Vec<Lit>) -> Option<Clause> {
        normalize(lits).map(Clause)
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn eval(&self, a: &Assignment) -> bool {
        self.0.iter().any(|l| l.eval(a))
    }
}

/// Conjunction of literals; empty means true.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cube(Vec<Lit>);

impl Cube {
    /// Returns `None` if the literals contradict each other.
    pub fn new(lits: Vec<Lit>) -> Option<Cube> {
        normalize(lits).map(Cube)
    }

    pub fn top() -> Cube {
        Cube(Vec::new())
    }

    pub fn positive(vars: impl IntoIterator<Item = Var>) -> Cube {
        Cube::new(vars.into_iter().map(Lit::pos).collect()).expect("positive literals never clash")
    }

    /// The cube satisfied by `a` alone.
    pub fn of_assignment(a: &Assignment) -> Cube {
        Cube((0..a.len()).map(|i| Lit::new(Var(i as u32), a.bits[i])).collect())
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, a: &Assignment) -> bool {
        self.0.iter().all(|l| l.eval(a))
    }

    pub fn negate(&self) -> Clause {
        Clause(self.0.iter().map(|l| l.negate()).collect())
    }
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "⊤");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ∧ ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Total assignment; ordered lexicographically by variable id with false < true.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Assignment {
        Assignment { bits }
    }

    pub fn all_false(n: usize) -> Assignment {
        Assignment { bits: vec![false; n] }
    }

    /// Bit `i` of `index` becomes the value of variable `i`.
    pub fn from_index(n: usize, index: u64) -> Assignment {
        Assignment {
            bits: (0..n).map(|i| index >> i & 1 == 1).collect(),
        }
    }

    pub fn to_index(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, v: Var) -> bool {
        self.bits[v.index()]
    }

    pub fn set(&mut self, v: Var, value: bool) {
        self.bits[v.index()] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn true_vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| Var(i as u32))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_char(if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl Serialize for Assignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Assignment, D::Error> {
        let s = String::deserialize(d)?;
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(serde::de::Error::custom(format!("bad bit `{c}`"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Assignment::new)
    }
}

/// The growing constraint set Φ: a clause log plus the incremental solver.
#[derive(Debug, Clone)]
pub struct ConstraintStore {
    clauses: Vec<Clause>,
    solver: Solver,
}

impl ConstraintStore {
    pub fn new(num_vars: usize, seed: u64) -> ConstraintStore {
        ConstraintStore {
            clauses: Vec::new(),
            solver: Solver::new(num_vars, seed),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.solver.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn add_clause(&mut self, c: Clause) {
        assert!(
            c.lits().iter().all(|l| l.var.index() < self.num_vars()),
            "clause mentions unallocated variable"
        );
        self.solver.add_clause(c.lits());
        self.clauses.push(c);
    }

    pub fn block_cube(&mut self, cube: &Cube) {
        self.add_clause(cube.negate());
    }

    pub fn block_assignment(&mut self, a: &Assignment) {
        self.block_cube(&Cube::of_assignment(a));
    }

    pub fn solve(&mut self) -> Option<Assignment> {
        self.solver.solve().map(Assignment::new)
    }

    /// Evaluates the clause log directly, without the solver.
    pub fn satisfies(&self, a: &Assignment) -> bool {
        self.clauses.iter().all(|c| c.eval(a))
    }

    pub fn dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars(), self.clauses.len());
        for c in &self.clauses {
            for l in c.lits() {
                let v = l.var.dimacs();
                let _ = write!(out, "{} ", if l.positive { v } else { -v });
            }
            out.push_str("0\n");
        }
        out
    }
}

const UNDEF: i8 = 0;

#[derive(Debug, Clone)]
struct ClauseData {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

#[derive(Debug, Clone, Copy)]
struct Watch {
    cref: u32,
    blocker: Lit,
}

#[derive(Debug, Clone)]
struct Solver {
    num_vars: usize,
    ok: bool,
    clauses: Vec<ClauseData>,
    learnts: Vec<u32>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    heap: VarHeap,
    max_learnts: f64,
}

impl Solver {
    fn new(num_vars: usize, seed: u64) -> Solver {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let activity: Vec<f64> = (0..num_vars).map(|_| rng.gen::<f64>() * 1e-5).collect();
        let mut heap = VarHeap::new(num_vars);
        for v in 0..num_vars {
            heap.insert(v, &activity);
        }
        Solver {
            num_vars,
            ok: true,
            clauses: Vec::new(),
            learnts: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            assigns: vec![UNDEF; num_vars],
            level: vec![0; num_vars],
            reason: vec![None; num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity,
            var_inc: 1.0,
            cla_inc: 1.0,
            phase: vec![false; num_vars],
            seen: vec![false; num_vars],
            heap,
            max_learnts: 2000.0,
        }
    }

    fn value(&self, l: Lit) -> i8 {
        let a = self.assigns[l.var.index()];
        if l.positive {
            a
        } else {
            -a
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<u32>) {
        let v = l.var.index();
        self.assigns[v] = if l.positive { 1 } else { -1 };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn add_clause(&mut self, lits: &[Lit]) {
        if !self.ok {
            return;
        }
        debug_assert_eq!(self.decision_level(), 0);
        let mut kept = Vec::with_capacity(lits.len());
        for &l in lits {
            match self.value(l) {
                1 => return,
                -1 => {}
                _ => kept.push(l),
            }
        }
        match kept.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(kept[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(kept, false);
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0].code()].push(Watch {
            cref,
            blocker: lits[1],
        });
        self.watches[lits[1].code()].push(Watch {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(ClauseData {
            lits,
            learnt,
            deleted: false,
            activity: 0.0,
        });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    /// Watches live in the list of the watched literal; a list is visited when
    /// that literal becomes false.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = p.negate();
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                if self.clauses[cref].deleted {
                    continue;
                }
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                if first != w.blocker && self.value(first) == 1 {
                    ws[j] = Watch {
                        cref: w.cref,
                        blocker: first,
                    };
                    j += 1;
                    continue;
                }
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[cref].lits[k];
                    if self.value(l) != -1 {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[l.code()].push(Watch {
                            cref: w.cref,
                            blocker: first,
                        });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watch {
                    cref: w.cref,
                    blocker: first,
                };
                j += 1;
                if self.value(first) == -1 {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                    self.qhead = self.trail.len();
                } else {
                    self.enqueue(first, Some(w.cref));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: usize) {
        let c = &mut self.clauses[cref];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit::pos(Var(0))];
        let mut path = 0;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        loop {
            self.bump_clause(confl as usize);
            let lits = self.clauses[confl as usize].lits.clone();
            let skip = usize::from(p.is_some());
            for &q in &lits[skip..] {
                let v = q.var.index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var.index()] {
                    break;
                }
            }
            let lit = self.trail[index];
            p = Some(lit);
            self.seen[lit.var.index()] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[lit.var.index()].expect("implied literal has a reason");
        }
        learnt[0] = p.expect("conflict at positive level").negate();

        // Drop literals implied by other literals of the clause.
        let marked: Vec<usize> = learnt[1..].iter().map(|l| l.var.index()).collect();
        let mut kept = vec![learnt[0]];
        for &l in &learnt[1..] {
            let redundant = match self.reason[l.var.index()] {
                None => false,
                Some(r) => self.clauses[r as usize].lits[1..].iter().all(|q| {
                    let v = q.var.index();
                    self.seen[v] || self.level[v] == 0
                }),
            };
            if !redundant {
                kept.push(l);
            }
        }
        for v in marked {
            self.seen[v] = false;
        }
        let mut learnt = kept;

        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var.index()] > self.level[learnt[max_i].var.index()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[learnt[1].var.index()];
        }
        (learnt, bt)
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var.index();
            self.assigns[v] = UNDEF;
            self.reason[v] = None;
            self.phase[v] = l.positive;
            if !self.heap.contains(v) {
                self.heap.insert(v, &self.activity);
            }
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = self.trail.len();
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v] == UNDEF {
                return Some(Lit::new(Var(v as u32), self.phase[v]));
            }
        }
        None
    }

    fn locked(&self, cref: u32) -> bool {
        let l = self.clauses[cref as usize].lits[0];
        self.value(l) == 1 && self.reason[l.var.index()] == Some(cref)
    }

    fn reduce_db(&mut self) {
        let mut learnts = std::mem::take(&mut self.learnts);
        learnts.sort_by(|&a, &b| {
            self.clauses[a as usize]
                .activity
                .total_cmp(&self.clauses[b as usize].activity)
        });
        let half = learnts.len() / 2;
        let mut keep = Vec::with_capacity(learnts.len());
        for (i, &c) in learnts.iter().enumerate() {
            if i < half && self.clauses[c as usize].lits.len() > 2 && !self.locked(c) {
                self.clauses[c as usize].deleted = true;
                self.clauses[c as usize].lits = Vec::new();
            } else {
                keep.push(c);
            }
        }
        self.learnts = keep;
    }

    fn search(&mut self, budget: u64) -> Option<bool> {
        let mut conflicts = 0;
        loop {
            if let Some(confl) = self.propagate() {
                conflicts += 1;
                if self.decision_level() == 0 {
                    return Some(false);
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.bump_clause(cref as usize);
                    self.enqueue(first, Some(cref));
                }
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;
            } else {
                if conflicts >= budget {
                    self.cancel_until(0);
                    return None;
                }
                if self.learnts.len() as f64 - self.trail.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                }
                match self.pick_branch() {
                    None => return Some(true),
                    Some(l) => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, None);
                    }
                }
            }
        }
    }

    fn solve(&mut self) -> Option<Vec<bool>> {
        if !self.ok {
            return None;
        }
        if self.propagate().is_some() {
            self.ok = false;
            return None;
        }
        let mut restart = 0;
        loop {
            let budget = (luby(2.0, restart) * 100.0) as u64;
            restart += 1;
            match self.search(budget) {
                Some(true) => {
                    let model = self.assigns.iter().map(|&a| a == 1).collect();
                    self.cancel_until(0);
                    return Some(model);
                }
                Some(false) => {
                    self.ok = false;
                    return None;
                }
                None => self.max_learnts *= 1.05,
            }
        }
    }
}

fn luby(y: f64, mut x: u32) -> f64 {
    let mut size = 1;
    let mut seq = 0;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}

/// Max-heap of variables keyed by activity.
#[derive(Debug, Clone)]
struct VarHeap {
    heap: Vec<usize>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn new(n: usize) -> VarHeap {
        VarHeap {
            heap: Vec::with_capacity(n),
            pos: vec![None; n],
        }
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v].is_some()
    }

    fn better(act: &[f64], a: usize, b: usize) -> bool {
        act[a] > act[b] || (act[a] == act[b] && a < b)
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        self.pos[v] = Some(self.heap.len());
        self.heap.push(v);
        self.up(self.heap.len() - 1, act);
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if let Some(i) = self.pos[v] {
            self.up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top] = None;
        if !self.heap.is_empty() {
            self.pos[self.heap[0]] = Some(0);
            self.down(0, act);
        }
        Some(top)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::better(act, v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i]] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let r = l + 1;
            let child = if r < self.heap.len() && Self::better(act, self.heap[r], self.heap[l]) {
                r
            } else {
                l
            };
            if !Self::better(act, self.heap[child], v) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i]] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(i: u32) -> Var {
        Var(i)
    }

    fn count_models(store: &ConstraintStore) -> usize {
        let n = store.num_vars();
        (0..1u64 << n)
            .filter(|&i| store.satisfies(&Assignment::from_index(n, i)))
            .count()
    }

    #[test]
    fn empty_clause_is_unsat() {
        let mut s = ConstraintStore::new(1, 0);
        assert!(s.solve().is_some());
        s.add_clause(Clause::new(vec![]).unwrap());
        assert!(s.solve().is_none());
        assert!(s.solve().is_none());
    }

    #[test]
    fn block_cube_removes_exactly_its_models() {
        let mut s = ConstraintStore::new(4, 0);
        s.add_clause(Clause::new(vec![Lit::pos(v(0)), Lit::pos(v(2))]).unwrap());
        let before = count_models(&s);
        let cube = Cube::positive([v(1), v(3)]);
        let hit = (0..16u64)
            .map(|i| Assignment::from_index(4, i))
            .filter(|a| s.satisfies(a) && cube.eval(a))
            .count();
        s.block_cube(&cube);
        assert_eq!(count_models(&s), before - hit);
        assert_eq!(s.clauses().last().unwrap().lits(), &[Lit::neg(v(1)), Lit::neg(v(3))]);
    }

    #[test]
    fn block_assignment_clause_shape() {
        let a = Assignment::new(vec![true, false, true]);
        let c = Cube::of_assignment(&a).negate();
        assert_eq!(c.lits(), &[Lit::neg(v(0)), Lit::pos(v(1)), Lit::neg(v(2))]);
    }

    #[test]
    fn exhaustion_by_blocking() {
        let n = 5;
        let mut s = ConstraintStore::new(n, 3);
        let mut seen = std::collections::BTreeSet::new();
        while let Some(a) = s.solve() {
            assert!(seen.insert(a.clone()));
            s.block_assignment(&a);
        }
        assert_eq!(seen.len(), 1 << n);
    }

    #[test]
    fn dimacs_dump() {
        let mut s = ConstraintStore::new(2, 0);
        s.add_clause(Clause::new(vec![Lit::pos(v(0)), Lit::neg(v(1))]).unwrap());
        assert_eq!(s.dimacs(), "p cnf 2 1\n1 -2 0\n");
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<f64> = (0..7).map(|i| luby(2.0, i)).collect();
        assert_eq!(seq, vec![1.0, 1.0, 2.0, 1.0, 1.0, 2.0, 4.0]);
    }

    #[test]
    fn pigeonhole_is_unsat() {
        // 5 pigeons, 4 holes.
        let (p, h) = (5u32, 4u32);
        let x = |i: u32, j: u32| v(i * h + j);
        let mut s = ConstraintStore::new((p * h) as usize, 1);
        for i in 0..p {
            s.add_clause(Clause::new((0..h).map(|j| Lit::pos(x(i, j))).collect()).unwrap());
        }
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    s.add_clause(Clause::new(vec![Lit::neg(x(a, j)), Lit::neg(x(b, j))]).unwrap());
                }
            }
        }
        assert!(s.solve().is_none());
    }

    fn clause_strategy(n: u32) -> impl Strategy<Value = Vec<(u32, bool)>> {
        prop::collection::vec((0..n, any::<bool>()), 1..4)
    }

    proptest! {
        #[test]
        fn random_cnf_agrees_with_brute_force(
            clauses in prop::collection::vec(clause_strategy(8), 0..40),
            seed in any::<u64>(),
        ) {
            let n = 8;
            let mut s = ConstraintStore::new(n, seed);
            let mut t = ConstraintStore::new(n, seed);
            let mut prev = usize::MAX;
            for c in &clauses {
                let lits = c.iter().map(|&(i, b)| Lit::new(v(i), b)).collect();
                if let Some(c) = Clause::new(lits) {
                    s.add_clause(c.clone());
                    t.add_clause(c);
                    let count = count_models(&s);
                    prop_assert!(count <= prev);
                    prev = count;
                    let got = s.solve();
                    prop_assert_eq!(&got, &t.solve());
                    match got {
                        Some(a) => prop_assert!(s.satisfies(&a)),
                        None => prop_assert_eq!(count, 0),
                    }
                }
            }
            // Enumerate every remaining model.
            let mut enumerated = 0;
            while let Some(a) = s.solve() {
                prop_assert!(s.satisfies(&a));
                s.block_assignment(&a);
                enumerated += 1;
            }
            let mut fresh = ConstraintStore::new(n, 0);
            for c in t.clauses() {
                fresh.add_clause(c.clone());
            }
            prop_assert_eq!(enumerated, count_models(&fresh));
        }
    }
}

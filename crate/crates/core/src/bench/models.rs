//! The alternating-bit and two-phase-commit case studies.
//!
//! Each builder starts from a complete process, strips every transition
//! incident to the chosen permutable states, and freezes the remaining
//! states whose outgoing transitions survived intact.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::encoding::SyntacticProfile;
use crate::engine::Problem;
use crate::error::{Error, Result};
use crate::lts::{Lts, Network, Process, Role, Transition};
use crate::mc::Specification;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Every protocol process has open slots.
    ManyProcess,
    /// Only the sender (ABP) or transaction manager (2PC) is synthesized.
    OneProcess,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::ManyProcess => "many-process",
            Variant::OneProcess => "one-process",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Variant> {
        match s {
            "many-process" | "many" => Ok(Variant::ManyProcess),
            "one-process" | "one" => Ok(Variant::OneProcess),
            _ => Err(Error::Model(format!("unknown variant `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseStudy {
    Abp,
    #[serde(rename = "2pc")]
    TwoPc,
}

impl fmt::Display for CaseStudy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseStudy::Abp => "ABP",
            CaseStudy::TwoPc => "2PC",
        })
    }
}

impl FromStr for CaseStudy {
    type Err = Error;
    fn from_str(s: &str) -> Result<CaseStudy> {
        match s.to_ascii_lowercase().as_str() {
            "abp" => Ok(CaseStudy::Abp),
            "2pc" => Ok(CaseStudy::TwoPc),
            _ => Err(Error::Model(format!("unknown case study `{s}`"))),
        }
    }
}

/// A hand-written process: state names, alphabet, initial state and transitions.
pub struct LtsDef {
    pub name: &'static str,
    pub states: &'static [&'static str],
    pub labels: &'static [&'static str],
    pub initial: &'static str,
    pub transitions: &'static [(&'static str, &'static str, &'static str)],
}

impl LtsDef {
    pub fn lts(&self) -> Lts {
        Lts::from_names(self.name, self.states, self.labels, &[self.initial], self.transitions)
            .expect("definitions are well-formed")
    }

    fn process(&self, role: Role) -> Process {
        Process::new(self.lts(), role)
    }
}

pub const SENDER: LtsDef = LtsDef {
    name: "Sender",
    states: &["s0", "s1", "s2", "s3", "s4", "s5", "s6", "s7"],
    labels: &["send?", "timeout?", "a'0?", "a'1?", "p0!", "p1!", "done!"],
    initial: "s0",
    transitions: &[
        ("s0", "a'0?", "s0"),
        ("s0", "a'1?", "s0"),
        ("s0", "timeout?", "s0"),
        ("s0", "send?", "s1"),
        ("s1", "p0!", "s2"),
        ("s2", "a'1?", "s2"),
        ("s2", "send?", "s2"),
        ("s2", "a'0?", "s3"),
        ("s2", "timeout?", "s1"),
        ("s3", "done!", "s4"),
        ("s4", "a'0?", "s4"),
        ("s4", "a'1?", "s4"),
        ("s4", "timeout?", "s4"),
        ("s4", "send?", "s5"),
        ("s5", "p1!", "s6"),
        ("s6", "a'0?", "s6"),
        ("s6", "send?", "s6"),
        ("s6", "a'1?", "s7"),
        ("s6", "timeout?", "s5"),
        ("s7", "done!", "s0"),
    ],
};

pub const RECEIVER_INCOMPLETE: LtsDef = LtsDef {
    name: "Receiver",
    states: &["r0", "r1", "r2", "r3", "r4", "r5"],
    labels: &["p'0?", "p'1?", "deliver!", "a0!", "a1!"],
    initial: "r0",
    transitions: &[
        ("r0", "p'0?", "r1"),
        ("r1", "deliver!", "r2"),
        ("r2", "a0!", "r3"),
        ("r3", "p'1?", "r4"),
        ("r4", "deliver!", "r5"),
        ("r5", "a1!", "r0"),
    ],
};

pub const RECEIVER: LtsDef = LtsDef {
    name: "Receiver",
    states: &["r0", "r1", "r2", "r3", "r4", "r5"],
    labels: &["p'0?", "p'1?", "deliver!", "a0!", "a1!"],
    initial: "r0",
    transitions: &[
        ("r0", "p'0?", "r1"),
        ("r0", "p'1?", "r5"),
        ("r1", "deliver!", "r2"),
        ("r2", "a0!", "r3"),
        ("r3", "p'1?", "r4"),
        ("r3", "p'0?", "r2"),
        ("r4", "deliver!", "r5"),
        ("r5", "a1!", "r0"),
    ],
};

const CLIENT_ABP: LtsDef = LtsDef {
    name: "Client",
    states: &["c0", "c1"],
    labels: &["send!", "done?"],
    initial: "c0",
    transitions: &[("c0", "send!", "c1"), ("c1", "done?", "c0")],
};

/// send, deliver and done must alternate in that order.
const ORDER: LtsDef = LtsDef {
    name: "Order",
    states: &["o0", "o1", "o2", "err"],
    labels: &["send?", "deliver?", "done?"],
    initial: "o0",
    transitions: &[
        ("o0", "send?", "o1"),
        ("o0", "deliver?", "err"),
        ("o0", "done?", "err"),
        ("o1", "deliver?", "o2"),
        ("o1", "send?", "err"),
        ("o1", "done?", "err"),
        ("o2", "done?", "o0"),
        ("o2", "send?", "err"),
        ("o2", "deliver?", "err"),
    ],
};

/// Accepts runs in which a request stays outstanding forever after the last loss.
const PROGRESS: LtsDef = LtsDef {
    name: "Progress",
    states: &["I", "O", "X", "F"],
    labels: &["send?", "done?", "loss?"],
    initial: "I",
    transitions: &[
        ("I", "send?", "O"),
        ("I", "send?", "X"),
        ("O", "done?", "I"),
        ("O", "loss?", "O"),
        ("O", "loss?", "X"),
        ("X", "done?", "F"),
        ("X", "loss?", "F"),
    ],
};

/// One-slot forward and backward buffers. A new message overwrites the
/// slot; a full slot is delivered or lost; timeout fires only when both are empty.
fn medium() -> Lts {
    const FWD: [&str; 3] = ["-", "p0", "p1"];
    const BWD: [&str; 3] = ["-", "a0", "a1"];
    let name = |f: usize, b: usize| format!("{}/{}", FWD[f], BWD[b]);
    let states: Vec<String> = (0..3).flat_map(|f| (0..3).map(move |b| (f, b))).map(|(f, b)| name(f, b)).collect();
    let mut ts: Vec<(String, &str, String)> = Vec::new();
    for f in 0..3 {
        for b in 0..3 {
            let here = name(f, b);
            ts.push((here.clone(), "p0?", name(1, b)));
            ts.push((here.clone(), "p1?", name(2, b)));
            ts.push((here.clone(), "a0?", name(f, 1)));
            ts.push((here.clone(), "a1?", name(f, 2)));
            if f > 0 {
                ts.push((here.clone(), ["p'0!", "p'1!"][f - 1], name(0, b)));
                ts.push((here.clone(), "loss!", name(0, b)));
            }
            if b > 0 {
                ts.push((here.clone(), ["a'0!", "a'1!"][b - 1], name(f, 0)));
                ts.push((here.clone(), "loss!", name(f, 0)));
            }
            if f == 0 && b == 0 {
                ts.push((here.clone(), "timeout!", here.clone()));
            }
        }
    }
    let st: Vec<&str> = states.iter().map(String::as_str).collect();
    let tr: Vec<(&str, &str, &str)> = ts.iter().map(|(p, l, q)| (p.as_str(), *l, q.as_str())).collect();
    Lts::from_names(
        "Medium",
        &st,
        &["p0?", "p1?", "a0?", "a1?", "p'0!", "p'1!", "a'0!", "a'1!", "timeout!", "loss!"],
        &["-/-"],
        &tr,
    )
    .expect("medium is well-formed")
}

pub const TX_MANAGER: LtsDef = LtsDef {
    name: "TxManager",
    states: &["m0", "m1", "m2", "m3", "m4", "m5", "m6", "m7", "m8", "m9", "m10", "m11"],
    labels: &[
        "x?", "x1!", "x2!", "yes1?", "yes2?", "no1?", "no2?", "cm1!", "cm2!", "ab1!", "ab2!", "succ!", "fail!",
    ],
    initial: "m0",
    transitions: &[
        ("m0", "x?", "m1"),
        ("m0", "yes1?", "m0"),
        ("m0", "yes2?", "m0"),
        ("m0", "no1?", "m0"),
        ("m0", "no2?", "m0"),
        ("m1", "x1!", "m2"),
        ("m2", "x2!", "m3"),
        ("m3", "x?", "m3"),
        ("m3", "yes1?", "m4"),
        ("m3", "yes2?", "m4"),
        ("m3", "no1?", "m8"),
        ("m3", "no2?", "m8"),
        ("m4", "x?", "m4"),
        ("m4", "yes1?", "m5"),
        ("m4", "yes2?", "m5"),
        ("m4", "no1?", "m9"),
        ("m4", "no2?", "m9"),
        ("m5", "cm1!", "m6"),
        ("m6", "cm2!", "m7"),
        ("m7", "succ!", "m0"),
        ("m8", "yes1?", "m9"),
        ("m8", "yes2?", "m9"),
        ("m8", "no1?", "m9"),
        ("m8", "no2?", "m9"),
        ("m9", "ab1!", "m10"),
        ("m10", "ab2!", "m11"),
        ("m11", "fail!", "m0"),
    ],
};

fn db_manager(i: usize, complete: bool) -> Lts {
    let l = |b: &str| format!("{b}{i}");
    let labels = [
        format!("{}?", l("x")),
        format!("{}!", l("qry")),
        format!("{}?", l("bd")),
        format!("{}?", l("gd")),
        format!("{}!", l("no")),
        format!("{}!", l("yes")),
        format!("{}?", l("ab")),
        format!("{}?", l("cm")),
    ];
    let mut ts = vec![
        ("b0", 0, "b1"),
        ("b1", 1, "b2"),
        ("b2", 2, "b3"),
        ("b3", 4, "b5"),
        ("b4", 5, "b5"),
        ("b5", 6, "b0"),
        ("b5", 7, "b0"),
    ];
    if complete {
        ts.push(("b2", 3, "b4"));
    }
    let lab: Vec<&str> = labels.iter().map(String::as_str).collect();
    let tr: Vec<(&str, &str, &str)> = ts.iter().map(|&(p, x, q)| (p, lab[x], q)).collect();
    Lts::from_names(&format!("Db{i}"), &["b0", "b1", "b2", "b3", "b4", "b5"], &lab, &["b0"], &tr)
        .expect("db manager is well-formed")
}

fn store(i: usize) -> Lts {
    let (q, g, b) = (format!("qry{i}?"), format!("gd{i}!"), format!("bd{i}!"));
    Lts::from_names(
        &format!("Store{i}"),
        &["t0", "t1"],
        &[&q, &g, &b],
        &["t0"],
        &[("t0", &q, "t1"), ("t1", &g, "t0"), ("t1", &b, "t0")],
    )
    .expect("store is well-formed")
}

const CLIENT_2PC: LtsDef = LtsDef {
    name: "Client",
    states: &["c0", "c1"],
    labels: &["x!", "succ?", "fail?"],
    initial: "c0",
    transitions: &[("c0", "x!", "c1"), ("c1", "succ?", "c0"), ("c1", "fail?", "c0")],
};

/// A database votes yes only after a good answer and no only after a bad one.
fn vote_monitor(i: usize) -> Lts {
    let (g, b, y, n) = (format!("gd{i}?"), format!("bd{i}?"), format!("yes{i}?"), format!("no{i}?"));
    Lts::from_names(
        &format!("Vote{i}"),
        &["v0", "vg", "vb", "err"],
        &[&g, &b, &y, &n],
        &["v0"],
        &[
            ("v0", &g, "vg"),
            ("v0", &b, "vb"),
            ("v0", &y, "err"),
            ("v0", &n, "err"),
            ("vg", &y, "v0"),
            ("vg", &n, "err"),
            ("vb", &n, "v0"),
            ("vb", &y, "err"),
        ],
    )
    .expect("vote monitor is well-formed")
}

/// Commit only after two yes votes and no no vote; abort only after a no
/// vote; never mix commit and abort; report succ after commit, fail after abort.
fn agreement_monitor() -> Lts {
    let w = |y1: bool, y2: bool, n: bool| format!("w{}{}{}", y1 as u8, y2 as u8, n as u8);
    let mut states = Vec::new();
    let mut ts: Vec<(String, &str, String)> = Vec::new();
    for bits in 0..8u8 {
        let (y1, y2, n) = (bits & 4 != 0, bits & 2 != 0, bits & 1 != 0);
        let here = w(y1, y2, n);
        states.push(here.clone());
        ts.push((here.clone(), "yes1?", w(true, y2, n)));
        ts.push((here.clone(), "yes2?", w(y1, true, n)));
        ts.push((here.clone(), "no1?", w(y1, y2, true)));
        ts.push((here.clone(), "no2?", w(y1, y2, true)));
        let commit = if y1 && y2 && !n { "C" } else { "err" };
        let abort = if n { "A" } else { "err" };
        for l in ["cm1?", "cm2?"] {
            ts.push((here.clone(), l, commit.into()));
        }
        for l in ["ab1?", "ab2?"] {
            ts.push((here.clone(), l, abort.into()));
        }
        ts.push((here.clone(), "succ?", "err".into()));
        ts.push((here.clone(), "fail?", "err".into()));
    }
    let idle = w(false, false, false);
    for (st, keep, bad, done, wrong) in [("C", ["cm1?", "cm2?"], ["ab1?", "ab2?"], "succ?", "fail?"), ("A", ["ab1?", "ab2?"], ["cm1?", "cm2?"], "fail?", "succ?")] {
        for l in keep {
            ts.push((st.into(), l, st.into()));
        }
        for l in bad.into_iter().chain([wrong, "yes1?", "yes2?", "no1?", "no2?"]) {
            ts.push((st.into(), l, "err".into()));
        }
        ts.push((st.into(), done, idle.clone()));
    }
    states.extend(["C", "A", "err"].map(String::from));
    let st: Vec<&str> = states.iter().map(String::as_str).collect();
    let tr: Vec<(&str, &str, &str)> = ts.iter().map(|(p, l, q)| (p.as_str(), *l, q.as_str())).collect();
    Lts::from_names(
        "Agreement",
        &st,
        &["yes1?", "yes2?", "no1?", "no2?", "cm1?", "cm2?", "ab1?", "ab2?", "succ?", "fail?"],
        &[&idle],
        &tr,
    )
    .expect("agreement monitor is well-formed")
}

/// Accepts runs in which some request is never answered with succ or fail.
const CONCLUDE: LtsDef = LtsDef {
    name: "Conclude",
    states: &["L0", "X", "F"],
    labels: &["x?", "succ?", "fail?"],
    initial: "L0",
    transitions: &[
        ("L0", "x?", "L0"),
        ("L0", "x?", "X"),
        ("X", "succ?", "F"),
        ("X", "fail?", "F"),
    ],
};

/// `complete` minus the states in `removed`, minus every transition incident
/// to `a`. Untouched non-A states are frozen and `a` becomes the permutable set.
pub fn strip(complete: &Lts, a: &[&str], removed: &[&str]) -> Result<Process> {
    let lookup = |n: &&str| {
        complete
            .state_id(n)
            .ok_or_else(|| Error::UnknownState(format!("{}.{n}", complete.name())))
    };
    let a_ids: BTreeSet<usize> = a.iter().map(lookup).collect::<Result<_>>()?;
    let gone: BTreeSet<usize> = removed.iter().map(lookup).collect::<Result<_>>()?;
    if a_ids.iter().any(|s| complete.is_initial(*s) || gone.contains(s)) {
        return Err(Error::InvalidPermutableSet(format!(
            "{}: permutable states must be non-initial and present",
            complete.name()
        )));
    }
    let keep: Vec<usize> = (0..complete.num_states()).filter(|s| !gone.contains(s)).collect();
    let new_id = |s: usize| keep.iter().position(|&k| k == s);
    let touched = |t: &Transition| a_ids.contains(&t.src) || a_ids.contains(&t.dst) || gone.contains(&t.dst);

    let mut transitions = BTreeSet::new();
    let mut damaged = BTreeSet::new();
    for t in complete.transitions() {
        if gone.contains(&t.src) {
            continue;
        }
        if touched(t) {
            damaged.insert(t.src);
            continue;
        }
        transitions.insert(Transition::new(new_id(t.src).unwrap(), t.label, new_id(t.dst).unwrap()));
    }
    let lts = Lts::new(
        complete.name(),
        keep.iter().map(|&s| complete.state_name(s).to_string()).collect(),
        complete.labels().to_vec(),
        complete.initial().iter().filter_map(|&s| new_id(s)),
        transitions,
    )?;
    let mut p = Process::new(lts, Role::Synthesizable);
    p.frozen = keep
        .iter()
        .filter(|s| !a_ids.contains(s) && !damaged.contains(s))
        .map(|&s| new_id(s).unwrap())
        .collect();
    p.permutable = Some(a_ids.iter().map(|&s| new_id(s).unwrap()).collect());
    Ok(p)
}

fn spec_for(procs: &[Process], safety: &[(&str, &str)], accepting: &[(&str, &str)], deadlock: bool) -> Specification {
    let find = |(p, s): &(&str, &str)| {
        let i = procs.iter().position(|x| x.lts.name() == *p).expect("monitor present");
        (i, procs[i].lts.state_id(s).expect("monitor state present"))
    };
    Specification {
        safety_error: safety.iter().map(find).collect(),
        buchi_accepting: accepting.iter().map(find).collect(),
        deadlock_is_violation: deadlock,
    }
}

pub fn build_abp(variant: Variant, a: &[&str]) -> Result<Problem> {
    build_abp_without(variant, a, &[])
}

/// ABP with the states in `removed` deleted from the sender.
pub fn build_abp_without(variant: Variant, a: &[&str], removed: &[&str]) -> Result<Problem> {
    let sender = strip(&SENDER.lts(), a, removed)?;
    let receiver = match variant {
        Variant::ManyProcess => RECEIVER_INCOMPLETE.process(Role::Synthesizable),
        Variant::OneProcess => RECEIVER.process(Role::Environment),
    };
    let procs = vec![
        sender,
        receiver,
        CLIENT_ABP.process(Role::Environment),
        Process::new(medium(), Role::Environment),
        ORDER.process(Role::SafetyMonitor),
        PROGRESS.process(Role::LivenessMonitor),
    ];
    let spec = spec_for(&procs, &[("Order", "err")], &[("Progress", "X")], true);
    Ok(Problem {
        net: Network::new(procs)?,
        spec,
        profile: SyntacticProfile::all(),
    })
}

pub fn build_2pc(variant: Variant, a: &[&str]) -> Result<Problem> {
    build_2pc_without(variant, a, &[])
}

/// 2PC with the states in `removed` deleted from the transaction manager.
pub fn build_2pc_without(variant: Variant, a: &[&str], removed: &[&str]) -> Result<Problem> {
    let mut procs = vec![strip(&TX_MANAGER.lts(), a, removed)?];
    for i in 1..=2 {
        let p = match variant {
            Variant::ManyProcess => {
                let lts = db_manager(i, false);
                let (b2, gd) = (
                    lts.state_id("b2").unwrap(),
                    lts.label_id(&format!("gd{i}?").parse()?).unwrap(),
                );
                let mut p = Process::new(lts, Role::Synthesizable);
                p.closed_slots = (0..p.lts.num_states())
                    .flat_map(|s| (0..p.lts.labels().len()).map(move |l| (s, l)))
                    .filter(|&slot| slot != (b2, gd))
                    .collect();
                p
            }
            Variant::OneProcess => Process::new(db_manager(i, true), Role::Environment),
        };
        procs.push(p);
    }
    procs.push(Process::new(store(1), Role::Environment));
    procs.push(Process::new(store(2), Role::Environment));
    procs.push(CLIENT_2PC.process(Role::Environment));
    procs.push(Process::new(agreement_monitor(), Role::SafetyMonitor));
    procs.push(Process::new(vote_monitor(1), Role::SafetyMonitor));
    procs.push(Process::new(vote_monitor(2), Role::SafetyMonitor));
    procs.push(CONCLUDE.process(Role::LivenessMonitor));
    let spec = spec_for(
        &procs,
        &[("Agreement", "err"), ("Vote1", "err"), ("Vote2", "err")],
        &[("Conclude", "X")],
        true,
    );
    Ok(Problem {
        net: Network::new(procs)?,
        spec,
        profile: SyntacticProfile::all(),
    })
}

pub fn build(case: CaseStudy, variant: Variant, a: &[&str]) -> Result<Problem> {
    match case {
        CaseStudy::Abp => build_abp(variant, a),
        CaseStudy::TwoPc => build_2pc(variant, a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{mc, McOptions};

    #[test]
    fn definition_sizes() {
        assert_eq!((SENDER.lts().num_states(), SENDER.lts().transitions().len()), (8, 20));
        assert_eq!(RECEIVER_INCOMPLETE.lts().transitions().len(), 6);
        assert_eq!(RECEIVER.lts().transitions().len(), 8);
        assert_eq!((TX_MANAGER.lts().num_states(), TX_MANAGER.lts().transitions().len()), (12, 27));
        assert_eq!(db_manager(1, false).transitions().len(), 7);
        assert_eq!(medium().num_states(), 9);
    }

    #[test]
    fn stripping_s3_s7_gives_the_incomplete_sender() {
        // The incomplete sender template: the complete sender without the
        // four transitions through s3 and s7.
        let expected = Lts::from_names(
            "Sender",
            SENDER.states,
            SENDER.labels,
            &["s0"],
            &[
                ("s0", "a'0?", "s0"),
                ("s0", "a'1?", "s0"),
                ("s0", "timeout?", "s0"),
                ("s0", "send?", "s1"),
                ("s1", "p0!", "s2"),
                ("s2", "a'1?", "s2"),
                ("s2", "send?", "s2"),
                ("s2", "timeout?", "s1"),
                ("s4", "a'0?", "s4"),
                ("s4", "a'1?", "s4"),
                ("s4", "timeout?", "s4"),
                ("s4", "send?", "s5"),
                ("s5", "p1!", "s6"),
                ("s6", "a'0?", "s6"),
                ("s6", "send?", "s6"),
                ("s6", "timeout?", "s5"),
            ],
        )
        .unwrap();
        let p = strip(&SENDER.lts(), &["s3", "s7"], &[]).unwrap();
        assert_eq!(p.lts, expected);
        let names: Vec<&str> = p.frozen.iter().map(|&s| p.lts.state_name(s)).collect();
        assert_eq!(names, ["s0", "s1", "s4", "s5"]);
    }

    #[test]
    fn complete_networks_are_correct() {
        for variant in [Variant::OneProcess, Variant::ManyProcess] {
            let mut abp = build_abp(variant, &[]).unwrap();
            let mut tpc = build_2pc(variant, &[]).unwrap();
            if variant == Variant::ManyProcess {
                abp.net = abp.net.with_process(1, RECEIVER.process(Role::Environment)).unwrap();
                let db: Vec<Process> = (1..=2).map(|i| Process::new(db_manager(i, true), Role::Environment)).collect();
                tpc.net = tpc.net.with_process(1, db[0].clone()).unwrap();
                tpc.net = tpc.net.with_process(2, db[1].clone()).unwrap();
            }
            let v = mc(&abp.net, &abp.spec, &McOptions::default()).unwrap();
            assert!(v.is_ok(), "ABP {variant}: {:?}", v.evidence());
            let v = mc(&tpc.net, &tpc.spec, &McOptions::default()).unwrap();
            assert!(v.is_ok(), "2PC {variant}: {:?}", v.evidence());
        }
    }

    #[test]
    fn broken_sender_violates_liveness() {
        // Ignoring the ack in s2 keeps the request outstanding forever.
        let lts = SENDER.lts();
        let mut ts = lts.transitions().clone();
        let (s2, s3, ack) = (
            lts.state_id("s2").unwrap(),
            lts.state_id("s3").unwrap(),
            lts.label_id(&"a'0?".parse().unwrap()).unwrap(),
        );
        ts.remove(&Transition::new(s2, ack, s3));
        ts.insert(Transition::new(s2, ack, s2));
        let problem = build_abp(Variant::OneProcess, &[]).unwrap();
        let net = problem.net.with_transitions(0, ts).unwrap();
        let v = mc(&net, &problem.spec, &McOptions::default()).unwrap();
        assert!(matches!(v.evidence(), Some(crate::mc::Evidence::Liveness(_))));
    }

    #[test]
    fn unknown_states_are_rejected() {
        assert!(matches!(build_abp(Variant::OneProcess, &["s9"]), Err(Error::UnknownState(_))));
        assert!(matches!(build_2pc(Variant::OneProcess, &["q1"]), Err(Error::UnknownState(_))));
        assert!(build_abp(Variant::OneProcess, &["s0"]).is_err());
    }
}

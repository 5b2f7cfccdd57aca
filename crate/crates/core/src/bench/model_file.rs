//! JSON model format.
//!
//! States and labels are referenced by name; transitions are
//! `[source, label, target]` triples with the label written `a?`, `a!` or `a`.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::encoding::SyntacticProfile;
use crate::engine::Problem;
use crate::error::{Error, Result};
use crate::lts::{Label, Lts, Network, Process, Role, StateId};
use crate::mc::Specification;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessFile {
    pub name: String,
    pub role: Role,
    pub states: Vec<String>,
    pub initial: Vec<String>,
    pub labels: Vec<Label>,
    pub transitions: Vec<(String, Label, String)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frozen: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub closed_slots: Vec<(String, Label)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutable: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SpecFile {
    #[serde(default)]
    pub safety_error: Vec<(String, String)>,
    #[serde(default)]
    pub buchi_accepting: Vec<(String, String)>,
    #[serde(default)]
    pub deadlock_is_violation: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub processes: Vec<ProcessFile>,
    #[serde(default)]
    pub spec: SpecFile,
    #[serde(default)]
    pub profile: SyntacticProfile,
}

fn state(lts: &Lts, name: &str) -> Result<StateId> {
    lts.state_id(name)
        .ok_or_else(|| Error::UnknownState(format!("{}.{name}", lts.name())))
}

impl ProcessFile {
    pub fn from_process(p: &Process) -> ProcessFile {
        let lts = &p.lts;
        let names = |set: &BTreeSet<StateId>| set.iter().map(|&s| lts.state_name(s).to_string()).collect();
        ProcessFile {
            name: lts.name().to_string(),
            role: p.role,
            states: lts.states().to_vec(),
            initial: lts.initial().iter().map(|&s| lts.state_name(s).to_string()).collect(),
            labels: lts.labels().to_vec(),
            transitions: lts
                .transitions()
                .iter()
                .map(|t| {
                    (
                        lts.state_name(t.src).to_string(),
                        lts.label(t.label).clone(),
                        lts.state_name(t.dst).to_string(),
                    )
                })
                .collect(),
            frozen: names(&p.frozen),
            closed_slots: p
                .closed_slots
                .iter()
                .map(|&(s, l)| (lts.state_name(s).to_string(), lts.label(l).clone()))
                .collect(),
            permutable: p.permutable.as_ref().map(names),
            note: None,
        }
    }

    pub fn to_process(&self) -> Result<Process> {
        let bare = Lts::new(self.name.clone(), self.states.clone(), self.labels.clone(), [], [])?;
        let label = |l: &Label| {
            bare.label_id(l).ok_or_else(|| Error::InvalidLts {
                lts: self.name.clone(),
                reason: format!("label `{l}` not in alphabet"),
            })
        };
        let initial = self.initial.iter().map(|s| state(&bare, s)).collect::<Result<Vec<_>>>()?;
        let transitions = self
            .transitions
            .iter()
            .map(|(p, l, q)| Ok(crate::lts::Transition::new(state(&bare, p)?, label(l)?, state(&bare, q)?)))
            .collect::<Result<Vec<_>>>()?;
        let lts = Lts::new(self.name.clone(), self.states.clone(), self.labels.clone(), initial, transitions)?;
        let states = |v: &[String]| v.iter().map(|s| state(&lts, s)).collect::<Result<BTreeSet<_>>>();
        let mut p = Process::new(lts.clone(), self.role);
        p.frozen = states(&self.frozen)?;
        p.closed_slots = self
            .closed_slots
            .iter()
            .map(|(s, l)| Ok((state(&lts, s)?, label(l)?)))
            .collect::<Result<_>>()?;
        p.permutable = self.permutable.as_deref().map(states).transpose()?;
        Ok(p)
    }
}

impl ModelFile {
    pub fn from_problem(name: &str, problem: &Problem) -> ModelFile {
        let net = &problem.net;
        let pairs = |set: &BTreeSet<(usize, StateId)>| {
            set.iter()
                .map(|&(i, s)| {
                    let lts = &net.process(i).lts;
                    (lts.name().to_string(), lts.state_name(s).to_string())
                })
                .collect()
        };
        ModelFile {
            name: name.to_string(),
            description: None,
            processes: net.processes().iter().map(ProcessFile::from_process).collect(),
            spec: SpecFile {
                safety_error: pairs(&problem.spec.safety_error),
                buchi_accepting: pairs(&problem.spec.buchi_accepting),
                deadlock_is_violation: problem.spec.deadlock_is_violation,
            },
            profile: problem.profile,
        }
    }

    pub fn to_problem(&self) -> Result<Problem> {
        let procs = self.processes.iter().map(ProcessFile::to_process).collect::<Result<Vec<_>>>()?;
        let net = Network::new(procs)?;
        let pairs = |v: &[(String, String)]| {
            v.iter()
                .map(|(p, s)| {
                    let i = net
                        .process_index(p)
                        .ok_or_else(|| Error::InvalidSpec(format!("unknown process `{p}`")))?;
                    Ok((i, state(&net.process(i).lts, s)?))
                })
                .collect::<Result<BTreeSet<_>>>()
        };
        let spec = Specification {
            safety_error: pairs(&self.spec.safety_error)?,
            buchi_accepting: pairs(&self.spec.buchi_accepting)?,
            deadlock_is_violation: self.spec.deadlock_is_violation,
        };
        spec.validate(&net)?;
        Ok(Problem {
            net,
            spec,
            profile: self.profile,
        })
    }

    pub fn from_json(text: &str) -> Result<ModelFile> {
        serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model files always serialize")
    }

    pub fn load(path: &Path) -> Result<ModelFile> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Model(format!("{}: {e}", path.display())))?;
        ModelFile::from_json(&text)
    }
}

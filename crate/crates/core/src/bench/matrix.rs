//! Experiment matrix: runs (case, A, optimizer) rows and writes CSV.

use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::models::{build_2pc_without, build_abp_without, CaseStudy, Variant};
use crate::engine::{run, EngineConfig, Mode, Optimizer, Problem};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 8] = ["case", "A", "optimizer", "sol", "iter", "time", "timeout", "partial_sol"];

fn default_variant() -> Variant {
    Variant::ManyProcess
}

fn default_mode() -> Mode {
    Mode::Enumerate
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_optimizers() -> Vec<Optimizer> {
    Optimizer::ALL.to_vec()
}

/// One line of a matrix file; expands to one row per optimizer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowSpec {
    pub case: CaseStudy,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    #[serde(rename = "A")]
    pub a: Vec<String>,
    /// States deleted outright (the unrealizable setups).
    #[serde(default)]
    pub removed: Vec<String>,
    #[serde(default = "default_optimizers")]
    pub optimizers: Vec<Optimizer>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Several seeds report rounded-up means.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

impl RowSpec {
    pub fn new(case: CaseStudy, a: &[&str], optimizers: &[Optimizer]) -> RowSpec {
        RowSpec {
            case,
            variant: Variant::ManyProcess,
            a: a.iter().map(|s| s.to_string()).collect(),
            removed: Vec::new(),
            optimizers: optimizers.to_vec(),
            mode: Mode::Enumerate,
            seeds: vec![0],
        }
    }

    pub fn id(&self) -> String {
        let mut id = self.case.to_string();
        if self.variant == Variant::OneProcess {
            id.push_str("/1p");
        }
        for r in &self.removed {
            id.push_str(&format!("-{r}"));
        }
        id
    }

    pub fn problem(&self) -> Result<Problem> {
        let a: Vec<&str> = self.a.iter().map(String::as_str).collect();
        let removed: Vec<&str> = self.removed.iter().map(String::as_str).collect();
        match self.case {
            CaseStudy::Abp => build_abp_without(self.variant, &a, &removed),
            CaseStudy::TwoPc => build_2pc_without(self.variant, &a, &removed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixFile {
    #[serde(default)]
    pub timeout_secs: Option<u64>,
    pub rows: Vec<RowSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixOptions {
    pub timeout: Duration,
    /// Leave the time column empty so the CSV is reproducible byte for byte.
    pub record_time: bool,
    pub threads: Option<usize>,
}

impl Default for MatrixOptions {
    fn default() -> Self {
        MatrixOptions {
            timeout: Duration::from_secs(3600),
            record_time: true,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub case: String,
    #[serde(rename = "A")]
    pub a: String,
    pub optimizer: Optimizer,
    pub sol: u64,
    pub iter: u64,
    pub time: Option<u64>,
    pub timeout: bool,
    pub partial_sol: Option<u64>,
}

fn ceil_mean(xs: &[u64]) -> u64 {
    let n = xs.len() as u64;
    xs.iter().sum::<u64>().div_ceil(n.max(1))
}

fn run_row(spec: &RowSpec, problem: &Problem, optimizer: Optimizer, opts: &MatrixOptions) -> Result<ExperimentRow> {
    let mut sols = Vec::new();
    let mut iters = Vec::new();
    let mut millis = Vec::new();
    let mut timed_out = false;
    for &seed in &spec.seeds {
        let cfg = EngineConfig {
            seed,
            timeout: opts.timeout,
            ..EngineConfig::with(optimizer, spec.mode)
        };
        let ledger = run(problem, &cfg)?;
        sols.push(ledger.solutions.len() as u64);
        iters.push(ledger.iterations() as u64);
        millis.push(ledger.elapsed.as_millis() as u64);
        timed_out |= ledger.timed_out;
    }
    let sol = ceil_mean(&sols);
    Ok(ExperimentRow {
        case: spec.id(),
        a: format!("{{{}}}", spec.a.join(",")),
        optimizer,
        sol,
        iter: ceil_mean(&iters),
        time: opts.record_time.then(|| ceil_mean(&millis).div_ceil(1000)),
        timeout: timed_out,
        partial_sol: timed_out.then_some(sol),
    })
}

/// Runs every (row, optimizer) pair on a worker pool; output order follows the input.
pub fn run_matrix(rows: &[RowSpec], opts: &MatrixOptions) -> Result<Vec<ExperimentRow>> {
    let problems = rows.iter().map(RowSpec::problem).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, Optimizer)> = rows
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.optimizers.iter().map(move |&o| (i, o)))
        .collect();
    let work = || {
        jobs.par_iter()
            .map(|&(i, o)| run_row(&rows[i], &problems[i], o, opts))
            .collect::<Result<Vec<_>>>()
    };
    match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Model(e.to_string()))?
            .install(work),
        None => work(),
    }
}

pub fn to_csv(rows: &[ExperimentRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let err = |e: csv::Error| Error::Model(e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Model(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// The two-permutable-state ABP rows.
pub fn abp_two_state_rows(optimizers: &[Optimizer]) -> Vec<RowSpec> {
    [["s1", "s2"], ["s2", "s3"], ["s3", "s4"], ["s4", "s5"], ["s5", "s6"], ["s6", "s7"]]
        .iter()
        .map(|a| RowSpec::new(CaseStudy::Abp, a, optimizers))
        .collect()
}

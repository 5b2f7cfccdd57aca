use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use isocomp::bench::matrix::{run_matrix, to_csv, ExperimentRow, MatrixFile, MatrixOptions};
use isocomp::bench::{build_2pc_without, build_abp_without, CaseStudy, ModelFile, Variant};
use isocomp::encoding::{build_phi, decode, VariableMap};
use isocomp::engine::{run, EngineConfig, Mode, Optimizer, Problem};
use isocomp::iso::{is_isomorphic_network, permutable_states};
use isocomp::mc::{mc, Evidence, McOptions, Step, DEFAULT_STATE_BOUND};
use isocomp::lts::Network;
use isocomp::oracle::brute_force;

#[derive(Parser)]
#[command(name = "isocomp", version, about = "Complete partially specified LTS networks against safety and liveness monitors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Search for completions of a model.
    Synth {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "enumerate")]
        mode: Mode,
        #[arg(long = "opt", default_value = "perm")]
        optimizer: Optimizer,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Wall-clock budget in seconds.
        #[arg(long, default_value_t = 3600)]
        timeout: u64,
        #[arg(long, default_value_t = DEFAULT_STATE_BOUND)]
        state_bound: usize,
        #[arg(long, value_enum, default_value = "json")]
        out: OutFormat,
        /// Write the initial constraint set in DIMACS format.
        #[arg(long)]
        dimacs: Option<PathBuf>,
        /// Also enumerate all candidates exhaustively and compare (small models only).
        #[arg(long)]
        dev_oracle: bool,
        /// Write every returned completion as a model file into this directory.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Run an experiment matrix and print CSV.
    Bench {
        #[arg(long)]
        matrix: PathBuf,
        /// Per-run budget in seconds; overrides the matrix file.
        #[arg(long)]
        timeout: Option<u64>,
        /// Leave the time column empty (reproducible output).
        #[arg(long)]
        no_time: bool,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Model-check a model as written.
    Check {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_STATE_BOUND)]
        state_bound: usize,
    },
    /// Decide whether two completions of a template are isomorphic up to its permutable states.
    Iso {
        #[arg(long)]
        template: PathBuf,
        left: PathBuf,
        right: PathBuf,
    },
    /// Print a built-in case study as a JSON model.
    Export {
        #[arg(long)]
        case: CaseStudy,
        #[arg(long, default_value = "many-process")]
        variant: Variant,
        /// Comma-separated permutable states.
        #[arg(long = "A", value_delimiter = ',', default_value = "")]
        a: Vec<String>,
        /// Comma-separated states to delete.
        #[arg(long, value_delimiter = ',')]
        removed: Vec<String>,
    },
}

fn load(path: &Path) -> Result<Problem> {
    let file = ModelFile::load(path)?;
    file.to_problem().with_context(|| format!("invalid model {}", path.display()))
}

fn render_steps(net: &Network, steps: &[Step]) -> Vec<String> {
    steps
        .iter()
        .map(|s| {
            let moves: Vec<String> = s
                .moves
                .iter()
                .map(|m| {
                    let lts = &net.process(m.process).lts;
                    format!("{}: {}", lts.name(), lts.render(&m.transition))
                })
                .collect();
            format!("{}  [{}]", s.label, moves.join("; "))
        })
        .collect()
}

fn print_evidence(net: &Network, e: &Evidence) {
    match e {
        Evidence::Safety(t) => {
            println!("safety violation:");
            render_steps(net, &t.steps).iter().for_each(|l| println!("  {l}"));
        }
        Evidence::Deadlock(t) => {
            println!("deadlock:");
            render_steps(net, &t.steps).iter().for_each(|l| println!("  {l}"));
        }
        Evidence::Liveness(l) => {
            println!("liveness violation, stem:");
            render_steps(net, &l.stem.steps).iter().for_each(|s| println!("  {s}"));
            println!("cycle:");
            render_steps(net, &l.cycle).iter().for_each(|s| println!("  {s}"));
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn synth(
    model: &Path,
    mode: Mode,
    optimizer: Optimizer,
    seed: u64,
    timeout: u64,
    state_bound: usize,
    out: OutFormat,
    dimacs: Option<&Path>,
    dev_oracle: bool,
    emit: Option<&Path>,
) -> Result<()> {
    let problem = load(model)?;
    if let Some(path) = dimacs {
        let (store, _) = build_phi(&problem.net, &problem.profile, seed)?;
        std::fs::write(path, store.dimacs()).with_context(|| format!("writing {}", path.display()))?;
    }
    let cfg = EngineConfig {
        seed,
        timeout: Duration::from_secs(timeout),
        state_bound,
        ..EngineConfig::with(optimizer, mode)
    };
    let ledger = run(&problem, &cfg)?;
    let vmap = VariableMap::allocate(&problem.net);
    if let Some(dir) = emit {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let stem = model.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        for (k, s) in ledger.solutions.iter().enumerate() {
            let completion = Problem {
                net: decode(s, &vmap, &problem.net)?,
                ..problem.clone()
            };
            let name = format!("{stem}-sol{k}");
            let path = dir.join(format!("{name}.json"));
            std::fs::write(&path, ModelFile::from_problem(&name, &completion).to_json())
                .with_context(|| format!("writing {}", path.display()))?;
        }
    }
    match out {
        OutFormat::Json => {
            let solutions: Vec<_> = ledger
                .solutions
                .iter()
                .map(|s| {
                    let added: Vec<String> = s.true_vars().map(|v| vmap.describe(v, &problem.net)).collect();
                    json!({ "assignment": s.to_string(), "transitions": added })
                })
                .collect();
            let doc = json!({
                "optimizer": optimizer,
                "mode": mode,
                "vars": ledger.num_vars,
                "iterations": ledger.iterations(),
                "mc_calls": ledger.mc_calls,
                "gen_mc_calls": ledger.gen_mc_calls,
                "sat_calls": ledger.sat_calls,
                "bad_candidates": ledger.bad_candidates,
                "elapsed_secs": ledger.elapsed.as_secs_f64(),
                "timed_out": ledger.timed_out,
                "solutions": solutions,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        OutFormat::Csv => {
            let sol = ledger.solutions.len() as u64;
            let row = ExperimentRow {
                case: model.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
                a: String::new(),
                optimizer,
                sol,
                iter: ledger.iterations() as u64,
                time: Some(ledger.elapsed.as_millis().div_ceil(1000) as u64),
                timeout: ledger.timed_out,
                partial_sol: ledger.timed_out.then_some(sol),
            };
            print!("{}", to_csv(&[row])?);
        }
    }
    if dev_oracle {
        let a = permutable_states(&problem.net)?;
        let oracle = brute_force(&problem, &a)?;
        let found: BTreeSet<_> = ledger.solutions.iter().cloned().collect();
        let hits = oracle
            .classes
            .iter()
            .filter(|c| c.iter().any(|s| found.contains(s)))
            .count();
        eprintln!(
            "oracle: {} solutions in {} classes; engine returned {} ({} classes hit, {} exact-set match)",
            oracle.all_solutions.len(),
            oracle.classes.len(),
            found.len(),
            hits,
            if found == oracle.all_solutions { "" } else { "no " },
        );
    }
    Ok(())
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Synth {
            model,
            mode,
            optimizer,
            seed,
            timeout,
            state_bound,
            out,
            dimacs,
            dev_oracle,
            emit,
        } => synth(
            &model,
            mode,
            optimizer,
            seed,
            timeout,
            state_bound,
            out,
            dimacs.as_deref(),
            dev_oracle,
            emit.as_deref(),
        )?,
        Command::Bench {
            matrix,
            timeout,
            no_time,
            threads,
            out,
        } => {
            let text = std::fs::read_to_string(&matrix).with_context(|| format!("reading {}", matrix.display()))?;
            let file: MatrixFile = serde_json::from_str(&text).context("invalid matrix file")?;
            let secs = timeout.or(file.timeout_secs).unwrap_or(3600);
            let opts = MatrixOptions {
                timeout: Duration::from_secs(secs),
                record_time: !no_time,
                threads,
            };
            let csv = to_csv(&run_matrix(&file.rows, &opts)?)?;
            match out {
                Some(path) => std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
        }
        Command::Check { model, state_bound } => {
            let problem = load(&model)?;
            let verdict = mc(&problem.net, &problem.spec, &McOptions::with_bound(state_bound))?;
            match verdict.evidence() {
                None => println!("ok"),
                Some(e) => {
                    print_evidence(&problem.net, e);
                    return Ok(ExitCode::FAILURE);
                }
            }
        }
        Command::Iso { template, left, right } => {
            let t = load(&template)?;
            let (l, r) = (load(&left)?, load(&right)?);
            let vmap = VariableMap::allocate(&t.net);
            let a = permutable_states(&t.net)?;
            // Re-read both completions as assignments over the template so
            // that only template-legal differences count.
            let as_completion = |p: &Problem| -> Result<Network> {
                let sigma = isocomp::encoding::encode(&p.net, &vmap);
                let back = decode(&sigma, &vmap, &t.net)?;
                let same = back.len() == p.net.len()
                    && back.processes().iter().zip(p.net.processes()).all(|(x, y)| x.lts == y.lts);
                if !same {
                    bail!("model is not a completion of the template");
                }
                Ok(back)
            };
            let (nl, nr) = (as_completion(&l)?, as_completion(&r)?);
            match is_isomorphic_network(&nl, &nr, &a) {
                Some(f) => {
                    println!("isomorphic");
                    for i in t.net.synthesizable() {
                        let lts = &t.net.process(i).lts;
                        for (s, &d) in f.process_map(i).iter().enumerate() {
                            if s != d {
                                println!("  {}: {} -> {}", lts.name(), lts.state_name(s), lts.state_name(d));
                            }
                        }
                    }
                }
                None => {
                    println!("not isomorphic");
                    return Ok(ExitCode::FAILURE);
                }
            }
        }
        Command::Export {
            case,
            variant,
            a,
            removed,
        } => {
            let a: Vec<&str> = a.iter().map(String::as_str).filter(|s| !s.is_empty()).collect();
            let removed: Vec<&str> = removed.iter().map(String::as_str).collect();
            let problem = match case {
                CaseStudy::Abp => build_abp_without(variant, &a, &removed)?,
                CaseStudy::TwoPc => build_2pc_without(variant, &a, &removed)?,
            };
            let mut name = format!("{}-{variant}", case.to_string().to_lowercase());
            for s in &a {
                name += &format!("-{s}");
            }
            for s in &removed {
                name += &format!("-no-{s}");
            }
            println!("{}", ModelFile::from_problem(&name, &problem).to_json());
        }
    }
    Ok(ExitCode::SUCCESS)
}

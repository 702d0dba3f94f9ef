use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cap_core::axioms::AxiomId;
use cap_core::report::{exit, run_queries_with, Report, RunOptions};
use cap_core::scenario::{load_scenario, parse_real, Atom, PerceptionRef, Query, Real, Scenario, Target};
use cap_core::suite::{builtin_scenario, builtin_scenarios, BUILTIN_SCENARIOS};

#[derive(Parser)]
#[command(name = "cap", version, about = "Evaluate and test costly ambiguity perception models")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for queries that do not set their own
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Override the grid resolution of parametric families
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Tolerance for value expectations
    #[arg(long, global = true, default_value_t = 1e-6)]
    tolerance: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Run independent queries concurrently
    #[arg(long, global = true)]
    parallel: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate lotteries, e.g. `f1` or `1/2*f1+1/2*f2` (all acts if none given)
    Eval {
        scenario: String,
        lotteries: Vec<String>,
        #[arg(long)]
        model: Option<String>,
    },
    /// Run the bundled golden scenarios
    Suite {
        /// List the bundled scenarios
        #[arg(long)]
        list: bool,
        /// Print the TOML of a bundled scenario
        #[arg(long, value_name = "NAME")]
        show: Option<String>,
    },
    /// Check behavioral axioms on a model
    Axioms {
        scenario: String,
        #[arg(long)]
        model: Option<String>,
        /// Axiom id, e.g. A5-eaar (defaults to those the variant satisfies)
        #[arg(long = "axiom")]
        axioms: Vec<AxiomId>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Estimate the cost of a perception from preferences alone
    Identify {
        scenario: String,
        #[arg(long)]
        model: Option<String>,
        /// Member index of a finite family
        #[arg(long, conflicts_with = "params", required_unless_present = "params")]
        member: Option<usize>,
        /// Parameters of a parametric family, comma separated
        #[arg(long, value_delimiter = ',', value_parser = real)]
        params: Option<Vec<f64>>,
        #[arg(long, default_value_t = 5000)]
        budget: usize,
        #[arg(long, value_delimiter = ',', value_parser = real)]
        scales: Option<Vec<f64>>,
    },
    /// Compare two lotteries
    Compare {
        scenario: String,
        left: String,
        right: String,
        #[arg(long)]
        model: Option<String>,
    },
    /// Run every query in the given scenario files
    Report {
        #[arg(required = true)]
        scenarios: Vec<String>,
    },
}

fn real(s: &str) -> Result<f64, String> {
    parse_real(s).ok_or_else(|| format!("not a number: {s}"))
}

/// `name` or `w*name+w*name...`
fn target(s: &str) -> Result<Target, String> {
    if !s.contains(['*', '+']) {
        return Ok(Target::Act(s.trim().to_string()));
    }
    let mut atoms = Vec::new();
    for part in s.split('+') {
        let (w, act) = part.split_once('*').unwrap_or(("1", part));
        atoms.push(Atom { prob: Real(real(w.trim())?), act: act.trim().to_string() });
    }
    Ok(Target::Atoms(atoms))
}

struct Failure(i32, String);

fn validation(e: impl std::fmt::Display) -> Failure {
    Failure(exit::VALIDATION, e.to_string())
}

/// A path, or `builtin:NAME` for a bundled scenario.
fn open(source: &str, grid: Option<usize>) -> Result<Scenario, Failure> {
    let s = match source.strip_prefix("builtin:") {
        Some(name) if !Path::new(source).exists() => builtin_scenario(name)
            .ok_or_else(|| validation(format!("no bundled scenario '{name}'")))?
            .map_err(validation)?,
        _ => load_scenario(source).map_err(validation)?,
    };
    match grid {
        Some(g) => s.with_grid(g).map_err(|e| validation(format!("{}: {e}", s.name))),
        None => Ok(s),
    }
}

fn pick_model(s: &Scenario, model: Option<String>) -> Result<String, Failure> {
    match model {
        Some(m) => Ok(m),
        None => s
            .models
            .keys()
            .next()
            .cloned()
            .ok_or_else(|| validation(format!("{}: scenario defines no models", s.name))),
    }
}

fn run(cli: Cli) -> Result<Report, Failure> {
    let g = &cli.global;
    let opts = RunOptions { seed: g.seed, tolerance: g.tolerance, parallel: g.parallel, ..Default::default() };
    let single = |s: Scenario, queries: Vec<Query>| -> Result<Report, Failure> {
        let s = s.with_queries(queries).map_err(validation)?;
        Ok(run_queries_with(&s, &opts))
    };
    match cli.command {
        Command::Eval { scenario, lotteries, model } => {
            let s = open(&scenario, g.grid)?;
            let model = pick_model(&s, model)?;
            let targets = if lotteries.is_empty() {
                s.acts.keys().map(|a| Ok(Target::Act(a.clone()))).collect::<Result<Vec<_>, String>>()
            } else {
                lotteries.iter().map(|l| target(l)).collect()
            }
            .map_err(validation)?;
            let queries = targets
                .into_iter()
                .map(|lottery| Query::Evaluate {
                    label: None,
                    model: model.clone(),
                    lottery,
                    expect_value: None,
                    tolerance: None,
                    expect_optimal: None,
                })
                .collect();
            single(s, queries)
        }
        Command::Compare { scenario, left, right, model } => {
            let s = open(&scenario, g.grid)?;
            let model = pick_model(&s, model)?;
            let q = Query::Compare {
                label: None,
                model,
                left: target(&left).map_err(validation)?,
                right: target(&right).map_err(validation)?,
                expect: None,
                tolerance: Some(Real(g.tolerance)),
            };
            single(s, vec![q])
        }
        Command::Axioms { scenario, model, axioms, trials } => {
            let s = open(&scenario, g.grid)?;
            let model = pick_model(&s, model)?;
            let q = Query::Axioms {
                label: None,
                model,
                axioms: (!axioms.is_empty()).then_some(axioms),
                trials: Some(trials),
                seed: None,
                expect: None,
            };
            single(s, vec![q])
        }
        Command::Identify { scenario, model, member, params, budget, scales } => {
            let s = open(&scenario, g.grid)?;
            let model = pick_model(&s, model)?;
            let perception = match (member, params) {
                (Some(i), _) => PerceptionRef::Member(i),
                (None, Some(p)) => PerceptionRef::Params(p.into_iter().map(Real).collect()),
                (None, None) => unreachable!("clap requires one of them"),
            };
            let q = Query::Identify {
                label: None,
                model,
                perception,
                scales: scales.map(|v| v.into_iter().map(Real).collect()),
                budget: Some(budget),
                seed: None,
                expect_value: None,
                tolerance: None,
            };
            single(s, vec![q])
        }
        Command::Report { scenarios } => {
            let mut report = Report::default();
            for source in &scenarios {
                let s = open(source, g.grid)?;
                report.sections.extend(run_queries_with(&s, &opts).sections);
            }
            Ok(report)
        }
        Command::Suite { .. } => {
            let mut report = Report::default();
            for s in builtin_scenarios() {
                let s = match g.grid {
                    Some(r) => s.with_grid(r).map_err(validation)?,
                    None => s,
                };
                report.sections.extend(run_queries_with(&s, &opts).sections);
            }
            Ok(report)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Suite { list, show } = &cli.command {
        if *list {
            for (name, _) in BUILTIN_SCENARIOS {
                println!("{name}");
            }
            return ExitCode::SUCCESS;
        }
        if let Some(name) = show {
            return match BUILTIN_SCENARIOS.iter().find(|(n, _)| n == name) {
                Some((_, text)) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                None => {
                    eprintln!("error: no bundled scenario '{name}'");
                    ExitCode::from(exit::VALIDATION as u8)
                }
            };
        }
    }
    let format = cli.global.format;
    let result = run(cli);
    match result {
        Ok(report) => {
            let text = match format {
                Format::Human => report.to_human(),
                Format::Machine => report.to_json() + "\n",
            };
            // a closed pipe is not an error worth reporting
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code as u8)
        }
    }
}

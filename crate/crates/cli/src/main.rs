//! Command-line surface for the preference engine.
//!
//! Every subcommand reads a JSON problem file (or DIMACS, for the
//! reduction commands), prints a machine-readable result envelope on
//! standard output and a short human summary on standard error, and
//! exits 0 when the answer is "true"/"consistent", 1 when it is
//! "false"/"inconsistent", and 2 on usage or input errors.

use std::fs;
use std::io::Read;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use hclp_core::engine::{EngineRun, TieOrder};
use hclp_core::io::{
    mib_witness, model_witness, parse_problem, parse_query, parse_strong_query, problem_to_json,
    FileConstraint, ParsedProblem, ResultEnvelope,
};
use hclp_core::oracle::{self, ClassConstraint, ModelClassSpec};
use hclp_core::ordering::statement_to_ordering;
use hclp_core::sat::{build_instance_with, parse_dimacs, verify_reduction_full};
use hclp_core::semantics::{satisfies_all_resolved, satisfies_resolved, HclpModel};
use hclp_core::{EngineError, PreferenceStatement};

/// Consistency and entailment for lexicographic preference models.
#[derive(Parser)]
#[command(name = "hclp", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether some sequence model satisfies all statements.
    /// Exits 0 and prints a witness model if so; exits 1 with the
    /// maximal inconsistency base otherwise.
    Check { file: PathBuf },
    /// Decide whether the statements entail a query over sequence
    /// models. A negative answer (exit 1) carries a countermodel.
    Deduce {
        /// Query of the form "NAME <= NAME" or "NAME < NAME".
        #[arg(long)]
        query: String,
        file: PathBuf,
    },
    /// Print the maximal inconsistency base. Exits 1 when the
    /// statements are inconsistent, 0 otherwise.
    Mib { file: PathBuf },
    /// Print a consistent repair: supported statements survive, the
    /// rest are weakened to non-strict form. Exits 1 when the input
    /// needed repairing.
    Repair { file: PathBuf },
    /// Decide whether some sequence using every evaluation satisfies
    /// the statements.
    StrongCheck { file: PathBuf },
    /// Entailment over full sequences. Also accepts "NAME == NAME"
    /// (equivalence) queries. Requires a strongly consistent input.
    StrongDeduce {
        #[arg(long)]
        query: String,
        file: PathBuf,
    },
    /// Entailment by exhaustive model enumeration; handles level bounds
    /// above 1. Honors the file's max_level_size/equivalence unless
    /// --max-level-size is given.
    BruteDeduce {
        #[arg(long)]
        query: String,
        /// Bound on the number of evaluations per level.
        #[arg(long)]
        max_level_size: Option<usize>,
        /// Restrict to models using every evaluation.
        #[arg(long)]
        full_sigma: bool,
        file: PathBuf,
    },
    /// Build the entailment instance encoding a 3-CNF formula: the
    /// formula is satisfiable exactly when "alpha <= beta" is not
    /// entailed at the given level bound.
    #[command(name = "reduce-3sat")]
    Reduce3Sat {
        /// DIMACS CNF input file.
        #[arg(long)]
        dimacs: PathBuf,
        /// Level-size bound (at least 2).
        #[arg(long)]
        t: usize,
        /// Combiner for the generated costs.
        #[arg(long, default_value = "sum", value_parser = ["sum", "max"])]
        operator: String,
        /// Write the generated problem file here instead of inlining it
        /// in the envelope.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Check the reduction's biconditional on a small formula by brute
    /// force on both sides. Exits 0 when the two sides agree.
    VerifyReduction {
        #[arg(long)]
        dimacs: PathBuf,
        #[arg(long)]
        t: usize,
        /// Combiner for the generated costs.
        #[arg(long, default_value = "sum", value_parser = ["sum", "max"])]
        operator: String,
    },
    /// Translate between preference statements and ordering statements.
    Translate {
        /// Rewrite each preference statement as an ordering statement
        /// (supporters vs opposers).
        #[arg(long, conflicts_with = "from_ordering")]
        to_ordering: bool,
        /// Realize each ordering statement as a fresh alternative pair,
        /// emitting a pure preference problem.
        #[arg(long)]
        from_ordering: bool,
        /// Write the emitted problem here (with --from-ordering).
        #[arg(long)]
        emit: Option<PathBuf>,
        file: PathBuf,
    },
    /// Enumerate the models of the problem's model class.
    Enumerate {
        /// Report only the number of models.
        #[arg(long)]
        count_only: bool,
        #[arg(long)]
        max_level_size: Option<usize>,
        #[arg(long)]
        full_sigma: bool,
        file: PathBuf,
    },
}

/// Input or usage failures: anything that should exit 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn oracle_cap() -> usize {
    std::env::var("HCLP_ORACLE_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(oracle::DEFAULT_SIZE_CAP)
}

fn read_input(path: &Path) -> Result<String, InputError> {
    if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| InputError(format!("reading stdin: {e}")))?;
        Ok(buf)
    } else {
        fs::read_to_string(path)
            .map_err(|e| InputError(format!("reading {}: {e}", path.display())))
    }
}

fn load_problem(path: &Path) -> Result<ParsedProblem, InputError> {
    let text = read_input(path)?;
    let problem =
        parse_problem(&text).map_err(|e| InputError(format!("[{}] {e}", e.code())))?;
    eprintln!("{}", hclp_core::io::table_echo(&problem.table));
    Ok(problem)
}

/// What a subcommand produced: a verdict, an optional witness, the exit
/// code, and a one-line summary for standard error.
struct Outcome {
    verdict: Value,
    witness: Option<Value>,
    exit: i32,
    summary: String,
}

fn main() {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let started = Instant::now();
    match run(cli.command) {
        Ok(out) => {
            let envelope = ResultEnvelope {
                command: argv,
                verdict: out.verdict,
                witness: out.witness,
                timing_us: started.elapsed().as_micros(),
            };
            println!("{}", envelope.to_json());
            eprintln!("{}", out.summary);
            std::process::exit(out.exit);
        }
        Err(InputError(message)) => {
            eprintln!("error: {message}");
            std::process::exit(2);
        }
    }
}

fn run(command: Command) -> Result<Outcome, InputError> {
    match command {
        Command::Check { file } => {
            let problem = load_problem(&file)?;
            let (table, gamma) = problem.sequence_view()?;
            let run = EngineRun::compute(&table, &gamma, &TieOrder::declaration(&table))?;
            let consistent = run.is_consistent();
            if consistent {
                let model = run.to_sequence().to_model();
                Ok(Outcome {
                    verdict: json!(true),
                    witness: Some(model_witness(&table, &model)),
                    exit: 0,
                    summary: format!(
                        "consistent; witness sequence of {} evaluations",
                        run.sequence().len()
                    ),
                })
            } else {
                let base = run.mib(&table, &gamma);
                Ok(Outcome {
                    verdict: json!(false),
                    witness: Some(mib_witness(&base)),
                    exit: 1,
                    summary: format!(
                        "inconsistent; {} statements and {} evaluations in the maximal base",
                        base.gamma_part.len(),
                        base.c_part.len()
                    ),
                })
            }
        }
        Command::Deduce { query, file } => {
            let problem = load_problem(&file)?;
            let (table, gamma) = problem.sequence_view()?;
            let query = parse_query(&query).map_err(|e| InputError(e.to_string()))?;
            let entailed = hclp_core::deduce(&table, &gamma, &query)?;
            if entailed {
                Ok(Outcome {
                    verdict: json!(true),
                    witness: None,
                    exit: 0,
                    summary: format!("entailed: {query}"),
                })
            } else {
                // Every negative answer is independently checkable: the
                // countermodel satisfies the statements and refutes the
                // query.
                let mut refutation = gamma.clone();
                refutation.push(hclp_core::negate(&query));
                let run =
                    EngineRun::compute(&table, &refutation, &TieOrder::declaration(&table))?;
                let model = run.to_sequence().to_model();
                Ok(Outcome {
                    verdict: json!(false),
                    witness: Some(model_witness(&table, &model)),
                    exit: 1,
                    summary: format!("not entailed: {query}; countermodel attached"),
                })
            }
        }
        Command::Mib { file } => {
            let problem = load_problem(&file)?;
            let (table, gamma) = problem.sequence_view()?;
            let run = EngineRun::compute(&table, &gamma, &TieOrder::declaration(&table))?;
            let base = run.mib(&table, &gamma);
            let consistent = run.is_consistent();
            Ok(Outcome {
                verdict: mib_witness(&base),
                witness: Some(model_witness(&table, &run.to_sequence().to_model())),
                exit: if consistent { 0 } else { 1 },
                summary: format!(
                    "{} statements and {} evaluations in the maximal base ({})",
                    base.gamma_part.len(),
                    base.c_part.len(),
                    if consistent { "consistent" } else { "inconsistent" }
                ),
            })
        }
        Command::Repair { file } => {
            let problem = load_problem(&file)?;
            let (table, gamma) = problem.sequence_view()?;
            let was_consistent = hclp_core::is_consistent(&table, &gamma)?;
            let repaired = hclp_core::repair(&table, &gamma)?;
            let run = EngineRun::compute(&table, &repaired, &TieOrder::declaration(&table))?;
            Ok(Outcome {
                verdict: json!(repaired.iter().map(|s| s.to_string()).collect::<Vec<_>>()),
                witness: Some(model_witness(&table, &run.to_sequence().to_model())),
                exit: if was_consistent { 0 } else { 1 },
                summary: format!(
                    "repair has {} statements ({})",
                    repaired.len(),
                    if was_consistent {
                        "input was already consistent"
                    } else {
                        "input was inconsistent"
                    }
                ),
            })
        }
        Command::StrongCheck { file } => {
            let problem = load_problem(&file)?;
            let (table, gamma) = problem.sequence_view()?;
            let strong = hclp_core::strong_is_consistent(&table, &gamma)?;
            let witness = if strong {
                let run = EngineRun::compute(&table, &gamma, &TieOrder::declaration(&table))?;
                Some(model_witness(&table, &run.to_sequence().to_model()))
            } else {
                Some(mib_witness(&hclp_core::mib(&table, &gamma)?))
            };
            Ok(Outcome {
                verdict: json!(strong),
                witness,
                exit: if strong { 0 } else { 1 },
                summary: format!("{}strongly consistent", if strong { "" } else { "not " }),
            })
        }
        Command::StrongDeduce { query, file } => {
            let problem = load_problem(&file)?;
            let (table, gamma) = problem.sequence_view()?;
            let query = parse_strong_query(&query).map_err(|e| InputError(e.to_string()))?;
            let entailed = match hclp_core::strong_deduce(&table, &gamma, &query) {
                Ok(v) => v,
                Err(e @ EngineError::NotStronglyConsistent) => {
                    return Err(InputError(e.to_string()))
                }
                Err(e) => return Err(InputError(e.to_string())),
            };
            Ok(Outcome {
                verdict: json!(entailed),
                witness: None,
                exit: if entailed { 0 } else { 1 },
                summary: format!(
                    "{} over full sequences",
                    if entailed { "entailed" } else { "not entailed" }
                ),
            })
        }
        Command::BruteDeduce {
            query,
            max_level_size,
            full_sigma,
            file,
        } => {
            let problem = load_problem(&file)?;
            let (table, gamma) = problem.merged().map_err(|e| InputError(e.to_string()))?;
            let query = parse_query(&query).map_err(|e| InputError(e.to_string()))?;
            let spec = model_spec(&problem, max_level_size, full_sigma);
            let cap = oracle_cap();
            let entailed = oracle::brute_deduce_with_cap(&table, &gamma, &query, &spec, cap)?;
            let witness = if entailed {
                None
            } else {
                find_countermodel(&table, &gamma, &query, &spec, cap)?
                    .map(|m| model_witness(&table, &m))
            };
            Ok(Outcome {
                verdict: json!(entailed),
                witness,
                exit: if entailed { 0 } else { 1 },
                summary: format!(
                    "{} by exhaustive enumeration",
                    if entailed { "entailed" } else { "not entailed" }
                ),
            })
        }
        Command::Reduce3Sat {
            dimacs,
            t,
            operator,
            emit,
        } => {
            let text = read_input(&dimacs)?;
            let cnf = parse_dimacs(&text)?;
            let instance = build_instance_with(&cnf, t, parse_operator(&operator))?;
            let problem = ParsedProblem {
                table: instance.table.clone(),
                preferences: instance.gamma.clone(),
                orderings: vec![],
                constraint: Some(FileConstraint::MaxLevelSize(t)),
            };
            let emitted = problem_to_json(&problem);
            let verdict = json!({
                "variables": cnf.num_vars,
                "clauses": cnf.clauses.len(),
                "evaluations": instance.table.evaluation_count(),
                "alternatives": instance.table.alternative_count(),
                "statements": instance.gamma.len(),
                "query": instance.query.to_string(),
            });
            let summary = format!(
                "instance built: {} evaluations, {} alternatives, {} statements{}",
                instance.table.evaluation_count(),
                instance.table.alternative_count(),
                instance.gamma.len(),
                emit.as_ref()
                    .map(|p| format!("; wrote {}", p.display()))
                    .unwrap_or_default()
            );
            let witness = match &emit {
                Some(path) => {
                    fs::write(path, &emitted)
                        .map_err(|e| InputError(format!("writing {}: {e}", path.display())))?;
                    None
                }
                None => Some(Value::String(emitted)),
            };
            Ok(Outcome {
                verdict,
                witness,
                exit: 0,
                summary,
            })
        }
        Command::VerifyReduction { dimacs, t, operator } => {
            let text = read_input(&dimacs)?;
            let cnf = parse_dimacs(&text)?;
            let report =
                verify_reduction_full(&cnf, t, parse_operator(&operator), oracle_cap())?;
            Ok(Outcome {
                verdict: json!({
                    "sat": report.sat,
                    "entailed": report.entailed,
                    "agree": report.agree,
                }),
                witness: None,
                exit: if report.agree { 0 } else { 1 },
                summary: format!(
                    "sat={} entailed={} agree={}",
                    report.sat, report.entailed, report.agree
                ),
            })
        }
        Command::Translate {
            to_ordering,
            from_ordering,
            emit,
            file,
        } => {
            let problem = load_problem(&file)?;
            if to_ordering == from_ordering {
                return Err(InputError(
                    "pass exactly one of --to-ordering / --from-ordering".into(),
                ));
            }
            if to_ordering {
                let translated = problem
                    .preferences
                    .iter()
                    .map(|stmt| {
                        let tau = statement_to_ordering(&problem.table, stmt)?;
                        Ok(json!({
                            "left": tau.left(),
                            "rel": if tau.strict { "<" } else { "<=" },
                            "right": tau.right(),
                        }))
                    })
                    .collect::<Result<Vec<Value>, hclp_core::ordering::OrderingError>>()
                    .map_err(|e| InputError(e.to_string()))?;
                Ok(Outcome {
                    summary: format!("{} statements translated", translated.len()),
                    verdict: Value::Array(translated),
                    witness: None,
                    exit: 0,
                })
            } else {
                let (table, preferences) =
                    problem.merged().map_err(|e| InputError(e.to_string()))?;
                let emitted_problem = ParsedProblem {
                    table,
                    preferences,
                    orderings: vec![],
                    constraint: problem.constraint.clone(),
                };
                let emitted = problem_to_json(&emitted_problem);
                let witness = match &emit {
                    Some(path) => {
                        fs::write(path, &emitted).map_err(|e| {
                            InputError(format!("writing {}: {e}", path.display()))
                        })?;
                        None
                    }
                    None => Some(Value::String(emitted)),
                };
                Ok(Outcome {
                    verdict: json!({
                        "alternatives": emitted_problem.table.alternative_count(),
                        "statements": emitted_problem.preferences.len(),
                    }),
                    witness,
                    exit: 0,
                    summary: "ordering statements realized as fresh alternative pairs".into(),
                })
            }
        }
        Command::Enumerate {
            count_only,
            max_level_size,
            full_sigma,
            file,
        } => {
            let problem = load_problem(&file)?;
            let (table, _) = problem.merged().map_err(|e| InputError(e.to_string()))?;
            let spec = model_spec(&problem, max_level_size, full_sigma);
            let cap = oracle_cap();
            if count_only {
                let count = oracle::count_models(&table, &spec, cap)?;
                Ok(Outcome {
                    verdict: json!(count),
                    witness: None,
                    exit: 0,
                    summary: format!("{count} models"),
                })
            } else {
                let models = oracle::enumerate_models_with_cap(&table, &spec, cap)?;
                let listed: Vec<Value> = models
                    .iter()
                    .map(|m| json!(m.level_names(&table)))
                    .collect();
                Ok(Outcome {
                    verdict: json!(models.len()),
                    witness: Some(Value::Array(listed)),
                    exit: 0,
                    summary: format!("{} models listed", models.len()),
                })
            }
        }
    }
}

fn parse_operator(text: &str) -> hclp_core::Combiner {
    match text {
        "max" => hclp_core::Combiner::Max,
        _ => hclp_core::Combiner::Sum,
    }
}

/// Model class for the oracle commands: an explicit flag wins, then the
/// file's constraint, then the unrestricted class.
fn model_spec(
    problem: &ParsedProblem,
    max_level_size: Option<usize>,
    full_sigma: bool,
) -> ModelClassSpec {
    let constraint = match (max_level_size, &problem.constraint) {
        (Some(t), _) => ClassConstraint::LevelSizeAtMost(t),
        (None, Some(FileConstraint::MaxLevelSize(t))) => ClassConstraint::LevelSizeAtMost(*t),
        (None, Some(FileConstraint::Equivalence(partition))) => {
            ClassConstraint::EquivalenceClasses(partition.clone())
        }
        (None, None) => ClassConstraint::Unrestricted,
    };
    ModelClassSpec {
        constraint,
        require_full_sigma: full_sigma,
    }
}

/// First enumerated model satisfying the statements but not the query.
fn find_countermodel(
    table: &hclp_core::CostTable,
    gamma: &[PreferenceStatement],
    query: &PreferenceStatement,
    spec: &ModelClassSpec,
    cap: usize,
) -> Result<Option<HclpModel>, InputError> {
    let resolved: Vec<_> = gamma
        .iter()
        .map(|s| s.resolve(table))
        .collect::<Result<_, _>>()?;
    let query = query.resolve(table)?;
    let mut found = None;
    oracle::for_each_model(table, spec, cap, |m| {
        if satisfies_all_resolved(table, m, &resolved) && !satisfies_resolved(table, m, query) {
            found = Some(m.clone());
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(found)
}

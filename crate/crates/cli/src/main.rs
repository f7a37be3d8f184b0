use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rescalc::machine::{
    machine_step_run, may_solvable, MachineConfig, MachineNodeRecord, MachineRun, Outcome, Policy, SolvabilityVerdict,
    DEFAULT_BUDGET,
};
use rescalc::reduction::{strategy_run, GivenStep, Mode, Pick, Strategy, Trace, TraceEnd, TraceRecord};
use rescalc::standardization::{is_standard, standardize, standardize_trace, StdReport, DEFAULT_SLACK};
use rescalc::{from_lambda, parse_lambda, parse_sum, parse_term, print_expression, print_term, Error, Term};

const EXIT_OK: u8 = 0;
const EXIT_CRASH: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_PARSE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rescalc",
    version,
    about = "Resource lambda calculus: reduction, standardization and the ND machine",
    after_help = "Exit codes: 0 ok, 1 crash or undefined, 2 budget or search exhausted, 3 parse error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a term (or a sum) and print the trace(s).
    Reduce(ReduceArgs),
    /// Build a standard nd chain from M to N, or check a recorded trace.
    Standardize(StandardizeArgs),
    /// Run the ND machine.
    Machine(MachineArgs),
    /// Decide may-solvability within a budget.
    Solvable(SolvableArgs),
    /// Translate a pure lambda term into the resource calculus.
    Translate(TranslateArgs),
}

#[derive(Args)]
struct Input {
    /// Input text; read from --file or stdin when absent.
    input: Option<String>,
    /// Read the input from a file.
    #[arg(long, conflicts_with = "input")]
    file: Option<PathBuf>,
}

impl Input {
    fn read(&self) -> Result<String, String> {
        match (&self.input, &self.file) {
            (Some(s), _) => Ok(s.clone()),
            (None, Some(p)) => std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display())),
            (None, None) => {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s).map_err(|e| format!("stdin: {e}"))?;
                Ok(s)
            }
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Baby,
    Giant,
    Nd,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "nd")]
    mode: ModeArg,
    /// `leftmost`, `all`, or `path=P1,P2,...` where each P is a
    /// slash-separated public path (`.` for the root) with an optional
    /// `@k` result index.
    #[arg(long, default_value = "leftmost")]
    pick: String,
    /// Maximum number of steps per trace.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    steps: u64,
    /// Print every state of each trace, not only the result.
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct StandardizeArgs {
    /// The source term M, or a trace record (JSON) when --target is absent.
    #[command(flatten)]
    input: Input,
    /// The target term N.
    #[arg(long)]
    target: Option<String>,
    /// Maximum length of the searched chain.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    /// Only check whether the given trace is standard.
    #[arg(long)]
    check: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Canonical,
    Random,
    All,
}

#[derive(Args)]
struct MachineArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "canonical")]
    policy: PolicyArg,
    /// Seed of the random policy.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of machine rule applications.
    #[arg(long, default_value_t = DEFAULT_BUDGET as u64, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    /// Do not branch over which bag element a rule consumes.
    #[arg(long)]
    no_element_branching: bool,
    /// Print the derivation tree of each converged run.
    #[arg(long)]
    tree: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct SolvableArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = DEFAULT_BUDGET as u64, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct TranslateArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

/// A failure with its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(p) => Fail(EXIT_PARSE, format!("parse error: {p}")),
            Error::SearchExhausted(_) | Error::NoChainFound { .. } => Fail(EXIT_BUDGET, e.to_string()),
            other => Fail(EXIT_CRASH, other.to_string()),
        }
    }
}

fn parse_fail(e: rescalc::ParseError) -> Fail {
    Fail(EXIT_PARSE, format!("parse error: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Reduce(a) => reduce(a),
        Command::Standardize(a) => standardize_cmd(a),
        Command::Machine(a) => machine(a),
        Command::Solvable(a) => solvable(a),
        Command::Translate(a) => translate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("rescalc: {msg}");
            ExitCode::from(code)
        }
    }
}

fn read(input: &Input) -> Result<String, Fail> {
    input.read().map(|s| s.trim().to_string()).map_err(|e| Fail(EXIT_CRASH, e))
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("records serialize")
}

fn parse_pick(s: &str) -> Result<Pick, Fail> {
    match s {
        "leftmost" => Ok(Pick::LeftmostFirst),
        "all" => Ok(Pick::Exhaustive),
        _ => {
            let Some(list) = s.strip_prefix("path=") else {
                return Err(Fail(EXIT_PARSE, format!("unknown pick {s:?}: expected leftmost, all or path=...")));
            };
            let mut steps = Vec::new();
            for item in list.split(',') {
                let (path, choice) = match item.split_once('@') {
                    Some((p, k)) => {
                        let k = k.parse().map_err(|_| Fail(EXIT_PARSE, format!("bad result index in {item:?}")))?;
                        (p, k)
                    }
                    None => (item, 0),
                };
                let path = match path {
                    "" | "." => Vec::new(),
                    p => p.split('/').map(str::to_string).collect(),
                };
                steps.push(GivenStep { path, choice });
            }
            Ok(Pick::GivenPaths(steps))
        }
    }
}

fn reduce(a: &ReduceArgs) -> Result<u8, Fail> {
    let src = read(&a.input)?;
    let pick = parse_pick(&a.pick)?;
    let m = parse_sum(&src).map_err(parse_fail)?;
    let mode = match a.mode {
        ModeArg::Baby => Mode::Baby,
        ModeArg::Giant => Mode::Giant,
        ModeArg::Nd => Mode::Nd,
    };
    let traces = strategy_run(&m, &Strategy::new(mode, pick), a.steps as usize)?;
    let mut printed = std::collections::HashSet::new();
    for (k, tr) in traces.iter().enumerate() {
        if a.format == Format::Text && !a.trace && !printed.insert(tr.final_state().to_string()) {
            continue;
        }
        match a.format {
            Format::Structured => println!("{}", json(&tr.to_record())),
            Format::Text => {
                if traces.len() > 1 && a.trace {
                    println!("trace {}: {}", k + 1, end_name(tr.end));
                }
                print_trace(tr, a.trace);
            }
        }
    }
    Ok(reduce_exit(&traces))
}

fn reduce_exit(traces: &[Trace]) -> u8 {
    if traces.iter().any(|t| t.end == TraceEnd::BudgetExhausted) {
        EXIT_BUDGET
    } else if !traces.is_empty() && traces.iter().all(|t| t.end == TraceEnd::Crashed) {
        EXIT_CRASH
    } else {
        EXIT_OK
    }
}

fn end_name(e: TraceEnd) -> &'static str {
    match e {
        TraceEnd::Normal => "normal",
        TraceEnd::OuterNormal => "outer normal",
        TraceEnd::Crashed => "crashed",
        TraceEnd::BudgetExhausted => "budget exhausted",
        TraceEnd::Completed => "completed",
    }
}

fn print_trace(tr: &Trace, all: bool) {
    if !all {
        println!("{}", tr.final_state());
        return;
    }
    println!("{}", tr.initial);
    for s in &tr.steps {
        let path = s.redex.path.to_public(&s.before).map(|p| p.join("/")).unwrap_or_default();
        let path = if path.is_empty() { ".".to_string() } else { path };
        println!("  -> {}    [{path}]", s.after);
    }
    if tr.end == TraceEnd::BudgetExhausted {
        println!("  ... budget exhausted");
    }
}

fn standardize_cmd(a: &StandardizeArgs) -> Result<u8, Fail> {
    let src = read(&a.input)?;
    let trace = if let Some(target) = &a.target {
        let m = parse_term(&src).map_err(parse_fail)?;
        let n = parse_term(target).map_err(parse_fail)?;
        if a.check {
            return Err(Fail(EXIT_PARSE, "--check needs a trace record, not --target".into()));
        }
        standardize(&m, &n, a.budget as usize)?
    } else {
        let rec: TraceRecord =
            serde_json::from_str(&src).map_err(|e| Fail(EXIT_PARSE, format!("parse error: trace record: {e}")))?;
        let tr = Trace::from_record(&rec)?;
        if a.check {
            let rep = is_standard(&tr)?;
            print_report(&rep, a.format);
            return Ok(if rep.standard { EXIT_OK } else { EXIT_CRASH });
        }
        standardize_trace(&tr, DEFAULT_SLACK)?
    };
    match a.format {
        Format::Structured => println!("{}", json(&trace.to_record())),
        Format::Text => print_trace(&trace, true),
    }
    Ok(EXIT_OK)
}

fn print_report(rep: &StdReport, format: Format) {
    match (format, &rep.violation) {
        (Format::Structured, _) => println!("{}", json(rep)),
        (Format::Text, None) => println!("standard"),
        (Format::Text, Some(v)) => {
            println!("not standard: step {} fires a residual of a redex preceding step {}", v.step, v.preceded);
            println!("  fired at {}", v.fired.join("/"));
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
enum RunRecord {
    Converged { result: String, tree: Option<MachineNodeRecord> },
    Undefined { stuck: String },
    BudgetExhausted,
}

fn machine(a: &MachineArgs) -> Result<u8, Fail> {
    let m = parse_term(&read(&a.input)?).map_err(parse_fail)?;
    let policy = match a.policy {
        PolicyArg::Canonical => Policy::CanonicalFirst,
        PolicyArg::Random => Policy::SeededRandom(a.seed),
        PolicyArg::All => Policy::EnumerateAll,
    };
    let mut cfg = MachineConfig::new(policy, a.budget as usize);
    cfg.branch_elements = !a.no_element_branching;
    let run = machine_step_run(&m, &cfg);
    for o in &run.outcomes {
        let rec = match o {
            Outcome::Converged { result, tree } => {
                RunRecord::Converged { result: print_term(result), tree: a.tree.then(|| tree.to_record()) }
            }
            Outcome::Undefined { stuck } => RunRecord::Undefined { stuck: print_expression(stuck) },
            Outcome::BudgetExhausted => RunRecord::BudgetExhausted,
        };
        match a.format {
            Format::Structured => println!("{}", json(&rec)),
            Format::Text => match rec {
                RunRecord::Converged { result, tree } => {
                    println!("converged: {result}");
                    if let Some(t) = tree {
                        print_tree(&t, 1);
                    }
                }
                RunRecord::Undefined { stuck } => println!("undefined: stuck at {stuck}"),
                RunRecord::BudgetExhausted => println!("budget exhausted"),
            },
        }
    }
    Ok(machine_exit(&run))
}

fn machine_exit(run: &MachineRun<Term>) -> u8 {
    if run.converged().next().is_some() {
        EXIT_OK
    } else if run.outcomes.iter().any(|o| matches!(o, Outcome::BudgetExhausted)) || !run.exhaustive {
        EXIT_BUDGET
    } else {
        EXIT_CRASH
    }
}

fn print_tree(n: &MachineNodeRecord, depth: usize) {
    let pad = "  ".repeat(depth);
    println!("{pad}({}) {} => {}", rule_name(n), n.judgment_in, n.judgment_out);
    for c in &n.children {
        print_tree(c, depth + 1);
    }
}

fn rule_name(n: &MachineNodeRecord) -> String {
    serde_json::to_value(n.rule).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn solvable(a: &SolvableArgs) -> Result<u8, Fail> {
    let m = parse_term(&read(&a.input)?).map_err(parse_fail)?;
    let v = may_solvable(&m, a.budget as usize);
    match a.format {
        Format::Structured => println!("{}", json(&v)),
        Format::Text => match &v {
            SolvabilityVerdict::MaySolvable { witness, explored } => {
                println!("may-solvable: reaches {} ({})", witness.judgment_out, applications(*explored))
            }
            SolvabilityVerdict::NotWithinBudget { explored, exhaustive: true } => {
                println!("not may-solvable: every run is undefined ({})", applications(*explored))
            }
            SolvabilityVerdict::NotWithinBudget { explored, exhaustive: false } => {
                println!("unknown: no converging run found, search incomplete ({})", applications(*explored))
            }
        },
    }
    Ok(match v {
        SolvabilityVerdict::MaySolvable { .. } => EXIT_OK,
        SolvabilityVerdict::NotWithinBudget { exhaustive: true, .. } => EXIT_CRASH,
        SolvabilityVerdict::NotWithinBudget { .. } => EXIT_BUDGET,
    })
}

fn translate(a: &TranslateArgs) -> Result<u8, Fail> {
    let l = parse_lambda(&read(&a.input)?).map_err(parse_fail)?;
    let t = from_lambda(&l);
    match a.format {
        Format::Structured => println!("{}", json(&serde_json::json!({ "term": print_term(&t) }))),
        Format::Text => println!("{}", print_term(&t)),
    }
    Ok(EXIT_OK)
}

fn applications(n: usize) -> String {
    if n == 1 {
        "1 rule application".into()
    } else {
        format!("{n} rule applications")
    }
}

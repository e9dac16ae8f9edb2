//! `effectlab`: check, analyze, find states on, enumerate and test claims
//! about finite effect algebras.
//!
//! Exit codes: 0 ok, 1 usage or I/O error, 2 invalid algebra, 3 parse error,
//! 4 no state exists, 5 hypotheses not met, 6 budget exhausted, 7 a claim
//! failed.

mod file;
mod report;

use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use effectlab::enumerate::{
    self, Budget, Checkpoint, EnumerateError, EnumerationConfig, Filters, StatelessSearch,
};
use effectlab::lp::{fraction_string, Constraint, Relation};
use effectlab::states::{self, Infeasibility, StateOutcome, StateVector, StatesError};
use effectlab::theorems::{self, ClaimReport, Evidence, SweepReport};
use effectlab::{EffectAlgebra, SumTable, ValidationReport};
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::json;

use crate::file::Loaded;
use crate::report::witness_elements;

mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const INVALID: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const STATELESS: u8 = 4;
    pub const HYPOTHESES: u8 = 5;
    pub const BUDGET: u8 = 6;
    pub const CLAIM: u8 = 7;
}

#[derive(Parser)]
#[command(name = "effectlab", version, about = "Finite effect algebra workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the axioms of an algebra file.
    Check {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        /// Print the expanded sum table as an algebra file.
        #[arg(long, conflicts_with = "json")]
        emit: bool,
    },
    /// Classification, atoms, sharp elements, blocks and centers.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        /// Print the Hasse diagram in DOT instead.
        #[arg(long, conflicts_with = "json")]
        dot: bool,
    },
    /// Find a state, or certify that none exists.
    States {
        file: PathBuf,
        /// Require ω(x ∨ y) ≤ ω(x) + ω(y).
        #[arg(long)]
        subadditive: bool,
        /// Build the state through an atom and a central element.
        #[arg(long, conflicts_with = "subadditive")]
        via_exstate: bool,
        #[arg(long)]
        json: bool,
    },
    /// Count (or list) algebras of a given size up to isomorphism.
    Enumerate(EnumerateArgs),
    /// Evaluate the claim registry on a file, or sweep it over all small algebras.
    Theorems(TheoremArgs),
}

#[derive(Args)]
struct BudgetArgs {
    /// Search node limit.
    #[arg(long)]
    max_nodes: Option<u64>,
    /// Wall-clock limit in seconds.
    #[arg(long, env = "EFFECTLAB_TIME_LIMIT", default_value_t = 3600)]
    time_limit: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget {
            max_nodes: self.max_nodes.unwrap_or(u64::MAX),
            time_limit: Duration::from_secs(self.time_limit),
        }
    }
}

#[derive(Args)]
struct EnumerateArgs {
    size: usize,
    #[arg(long)]
    lattice_only: bool,
    #[arg(long)]
    modular_only: bool,
    /// Keep only algebras with S(E) ≠ E.
    #[arg(long)]
    unsharp_only: bool,
    /// Scan sizes 2..=SIZE for the first algebra without states.
    #[arg(long)]
    find_stateless: bool,
    /// Print every algebra as an algebra file.
    #[arg(long, conflicts_with = "find_stateless")]
    list: bool,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Where to write the checkpoint if the budget runs out.
    #[arg(long, default_value = "effectlab-checkpoint.json")]
    checkpoint: PathBuf,
    /// Continue from a checkpoint.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TheoremArgs {
    #[arg(required_unless_present = "sweep", conflicts_with = "sweep")]
    file: Option<PathBuf>,
    /// Sweep every algebra with up to N elements.
    #[arg(long, value_name = "N")]
    sweep: Option<usize>,
    /// Restrict to one claim id.
    #[arg(long)]
    claim: Option<String>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long)]
    json: bool,
}

/// A terminal outcome: message for stderr and an exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    let outcome = match cli.command {
        Command::Check { file, json, emit } => cmd_check(&file, json, emit),
        Command::Analyze { file, json, dot } => cmd_analyze(&file, json, dot),
        Command::States { file, subadditive, via_exstate, json } => {
            cmd_states(&file, subadditive, via_exstate, json)
        }
        Command::Enumerate(args) => cmd_enumerate(&args),
        Command::Theorems(args) => cmd_theorems(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("effectlab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    file::load(path).map_err(|e| Failure::new(exit::PARSE, format!("cannot parse {}: {e}", path.display())))
}

fn violations_json(t: &SumTable, r: &ValidationReport) -> serde_json::Value {
    let list: Vec<_> = r
        .violations
        .iter()
        .map(|v| {
            let witness: Vec<&str> = v.witness.iter().map(|&x| t.label(x)).collect();
            json!({ "axiom": v.axiom.code(), "witness": witness, "detail": v.detail })
        })
        .collect();
    serde_json::Value::Array(list)
}

fn print_violations(t: &SumTable, r: &ValidationReport) {
    println!("invalid: {} violation(s)", r.violations.len());
    for v in &r.violations {
        let witness: Vec<&str> = v.witness.iter().map(|&x| t.label(x)).collect();
        println!("  {} [{}]: {}", v.axiom.code(), witness.join(", "), v.detail);
    }
}

/// Loads and validates, printing violations for invalid tables.
fn load_valid(path: &Path, json: bool) -> Result<EffectAlgebra, Failure> {
    match load(path)? {
        Loaded::Built(e) => Ok(e),
        Loaded::Table(t) => {
            let report = t.validate();
            if report.is_valid() {
                return Ok(EffectAlgebra::new(t).expect("validated"));
            }
            if json {
                print_json(&json!({ "valid": false, "violations": violations_json(&t, &report) }));
            } else {
                print_violations(&t, &report);
            }
            Err(Failure::new(exit::INVALID, format!("{} is not an effect algebra", path.display())))
        }
    }
}

fn cmd_check(path: &Path, json: bool, emit: bool) -> Outcome {
    let e = load_valid(path, json)?;
    if emit {
        print!("{}", file::to_toml(&e));
    } else if json {
        print_json(&json!({ "valid": true, "size": e.size(), "violations": [] }));
    } else {
        println!("valid effect algebra with {} elements", e.size());
    }
    Ok(exit::OK)
}

fn cmd_analyze(path: &Path, json: bool, dot: bool) -> Outcome {
    let e = load_valid(path, json)?;
    if dot {
        print!("{}", report::hasse_dot(&e));
    } else if json {
        print_json(&report::analyze(&e));
    } else {
        print!("{}", report::analysis_text(&report::analyze(&e)));
    }
    Ok(exit::OK)
}

fn state_json(e: &EffectAlgebra, s: &StateVector) -> serde_json::Value {
    let values: Vec<_> = s
        .labelled(e)
        .into_iter()
        .map(|(element, value)| json!({ "element": element, "value": value }))
        .collect();
    serde_json::Value::Array(values)
}

fn print_state(e: &EffectAlgebra, s: &StateVector) {
    for (label, value) in s.labelled(e) {
        println!("  ω({label}) = {value}");
    }
}

fn render_constraint(e: &EffectAlgebra, c: &Constraint) -> String {
    let mut lhs = String::new();
    for (j, q) in &c.terms {
        let sign = if q.is_negative() { " - " } else { " + " };
        let mag = q.abs();
        let coeff = if mag.is_one() { String::new() } else { format!("{}·", fraction_string(&mag)) };
        lhs.push_str(sign);
        lhs.push_str(&format!("{coeff}ω({})", e.label(*j)));
    }
    let lhs = lhs.strip_prefix(" + ").map(str::to_string).unwrap_or_else(|| format!("-{}", &lhs[3..]));
    let rel = match c.relation {
        Relation::Eq => "=",
        Relation::Le => "≤",
    };
    format!("{lhs} {rel} {}", fraction_string(&c.rhs))
}

fn certificate_rows(e: &EffectAlgebra, inf: &Infeasibility) -> Vec<(String, String)> {
    inf.system
        .constraints
        .iter()
        .zip(&inf.certificate.multipliers)
        .filter(|(_, z)| !z.is_zero())
        .map(|(c, z)| (fraction_string(z), render_constraint(e, c)))
        .collect()
}

fn report_infeasible(e: &EffectAlgebra, inf: &Infeasibility, what: &str, json: bool) -> Outcome {
    let verified = inf.verify();
    let rows = certificate_rows(e, inf);
    if json {
        let rows: Vec<_> =
            rows.iter().map(|(z, c)| json!({ "multiplier": z, "constraint": c })).collect();
        print_json(&json!({ "kind": "infeasible", "what": what, "verified": verified, "certificate": rows }));
    } else {
        println!("no {what} exists; certificate (verified: {verified}):");
        for (z, c) in rows {
            println!("  {z} × [{c}]");
        }
        println!("  the combination has nonnegative coefficients and right-hand side -1");
    }
    Ok(exit::STATELESS)
}

fn cmd_states(path: &Path, subadditive: bool, via_exstate: bool, json: bool) -> Outcome {
    let e = load_valid(path, json)?;
    if via_exstate {
        return match states::state_via_exstate_procedure(&e) {
            Ok((state, trace)) => {
                if json {
                    print_json(&json!({
                        "kind": "state",
                        "values": state_json(&e, &state),
                        "trace": {
                            "atom": e.label(trace.atom),
                            "multiplicity": trace.multiplicity,
                            "branch": trace.branch,
                            "checks": trace.checks.iter().map(|c| json!({
                                "atom": e.label(c.atom),
                                "join": e.label(c.join),
                                "double": c.double.map(|d| e.label(d)),
                            })).collect::<Vec<_>>(),
                            "central": e.label(trace.central),
                        },
                    }));
                } else {
                    println!("atom {0} with {0} ≤ {0}', ord = {1}", e.label(trace.atom), trace.multiplicity);
                    match trace.branch {
                        states::Branch::CompatibleWithAll => println!("{} is compatible with every element", e.label(trace.atom)),
                        states::Branch::Dichotomy => {
                            for c in &trace.checks {
                                let (x, a) = (e.label(c.atom), e.label(trace.atom));
                                println!("  {x} is not compatible with {a}: {a} ∨ {x} = {} = 2·{a}", e.label(c.join));
                            }
                        }
                    }
                    println!("central element {}·{} = {}", trace.multiplicity, e.label(trace.atom), e.label(trace.central));
                    println!("subadditive state lifted from [0, c]:");
                    print_state(&e, &state);
                }
                Ok(exit::OK)
            }
            Err(StatesError::HypothesisViolated(h)) => {
                Err(Failure::new(exit::HYPOTHESES, format!("hypothesis not met: {h}")))
            }
            Err(StatesError::NotLattice) => {
                Err(Failure::new(exit::HYPOTHESES, "hypothesis not met: E is a lattice"))
            }
            Err(err) => Err(Failure::new(exit::CLAIM, err.to_string())),
        };
    }
    let (outcome, what) = if subadditive {
        match states::find_subadditive_state(&e) {
            Ok(o) => (o, "subadditive state"),
            Err(_) => return Err(Failure::new(exit::HYPOTHESES, "hypothesis not met: E is a lattice")),
        }
    } else {
        (states::find_state(&e), "state")
    };
    match outcome {
        StateOutcome::Feasible(s) => {
            if json {
                print_json(&json!({ "kind": "state", "values": state_json(&e, &s) }));
            } else {
                println!("{what}:");
                print_state(&e, &s);
            }
            Ok(exit::OK)
        }
        StateOutcome::Infeasible(inf) => report_infeasible(&e, &inf, what, json),
    }
}

fn read_checkpoint(path: &Path) -> Result<Checkpoint, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(exit::USAGE, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::new(exit::PARSE, format!("bad checkpoint: {e}")))
}

fn budget_failure(err: EnumerateError, path: Option<&Path>) -> Failure {
    match err {
        EnumerateError::BudgetExceeded { kind, checkpoint } => {
            let Some(path) = path else {
                return Failure::new(exit::BUDGET, format!("{kind:?} budget exhausted"));
            };
            let text = serde_json::to_string_pretty(&checkpoint).expect("checkpoint serializes");
            if let Err(e) = std::fs::write(path, text) {
                return Failure::new(exit::USAGE, format!("{kind:?} budget exhausted; cannot write checkpoint: {e}"));
            }
            Failure::new(
                exit::BUDGET,
                format!("{kind:?} budget exhausted; checkpoint written to {}", path.display()),
            )
        }
        EnumerateError::InvalidConfig(msg) => Failure::new(exit::USAGE, msg),
    }
}

fn cmd_enumerate(args: &EnumerateArgs) -> Outcome {
    let resume = args.resume.as_deref().map(read_checkpoint).transpose()?;
    let budget = args.budget.budget();
    if args.find_stateless {
        let found = enumerate::find_stateless(args.size, budget, args.budget.jobs, resume.as_ref())
            .map_err(|e| budget_failure(e, Some(&args.checkpoint)))?;
        match found {
            StatelessSearch::Found(e) => {
                if args.json {
                    print_json(&json!({ "found": true, "size": e.size(), "algebra": file::to_file(&e) }));
                } else {
                    println!("# stateless effect algebra with {} elements", e.size());
                    print!("{}", file::to_toml(&e));
                }
            }
            StatelessSearch::NoneFound { cleared_sizes } => {
                if args.json {
                    print_json(&json!({ "found": false, "cleared_sizes": cleared_sizes }));
                } else {
                    println!("NoneFound: every algebra with at most {} elements has a state", args.size);
                }
            }
        }
        return Ok(exit::OK);
    }
    let config = EnumerationConfig {
        size: args.size,
        filters: Filters {
            lattice_only: args.lattice_only,
            modular_only: args.modular_only,
            unsharp_only: args.unsharp_only,
        },
        budget,
        jobs: args.budget.jobs,
    };
    let mut listed = Vec::new();
    let summary = enumerate::run(
        &config,
        resume.as_ref(),
        |e| args.list.then(|| file::to_file(&e)),
        |f| {
            listed.extend(f);
            ControlFlow::Continue(())
        },
    )
    .map_err(|e| budget_failure(e, Some(&args.checkpoint)))?;
    if args.json {
        print_json(&json!({
            "size": args.size,
            "filters": config.filters,
            "count": summary.emitted,
            "instances": args.list.then_some(&listed),
        }));
    } else {
        for (i, f) in listed.iter().enumerate() {
            println!("# algebra {}", i + 1);
            println!("{}", toml::to_string(f).expect("plain data serializes"));
        }
        println!("{}", summary.emitted);
    }
    Ok(exit::OK)
}

fn evidence_text(e: &EffectAlgebra, ev: &Evidence) -> String {
    let names = |xs: &[usize]| xs.iter().map(|&x| e.label(x)).collect::<Vec<_>>().join(", ");
    let values = |s: &StateVector| {
        s.labelled(e).into_iter().map(|(l, v)| format!("{l}={v}")).collect::<Vec<_>>().join(" ")
    };
    match ev {
        Evidence::Structure { witness } => format!("[{}]", names(&witness_elements(witness))),
        Evidence::Family { base, members } => format!("{} with {{{}}}", e.label(*base), names(members)),
        Evidence::State { state } => values(state),
        Evidence::Central { central, state } => format!("c={}: {}", e.label(*central), values(state)),
        Evidence::Trace { trace } => format!(
            "a={} ord={} c={} ({} checks)",
            e.label(trace.atom),
            trace.multiplicity,
            e.label(trace.central),
            trace.checks.len()
        ),
    }
}

fn claim_row(e: &EffectAlgebra, r: &ClaimReport) -> String {
    let hyps = if r.hypotheses_met {
        "met".to_string()
    } else {
        let unmet: Vec<&str> = r.hypotheses.iter().filter(|h| !h.holds).map(|h| h.name).collect();
        format!("unmet: {}", unmet.join(", "))
    };
    let conclusion = match r.conclusion_holds {
        Some(true) => "holds",
        Some(false) => "FAILS",
        None => "-",
    };
    let witness = r.witness.as_ref().map(|w| evidence_text(e, w)).unwrap_or_default();
    format!("{:<18} {:<10} {:>6}  {hyps}  {witness}", r.claim, conclusion, r.cases)
}

fn cmd_theorems(args: &TheoremArgs) -> Outcome {
    if let Some(n) = args.sweep {
        let config = EnumerationConfig {
            size: n,
            filters: Filters::default(),
            budget: args.budget.budget(),
            jobs: args.budget.jobs,
        };
        let ids: Vec<&str> = match &args.claim {
            Some(id) => vec![id.as_str()],
            None => theorems::CLAIMS.iter().map(|c| c.id).collect(),
        };
        let mut reports: Vec<SweepReport> = Vec::new();
        for id in ids {
            let r = theorems::sweep(&config, id).map_err(|err| match err {
                theorems::TheoremError::UnknownClaim(c) => Failure::new(exit::USAGE, format!("unknown claim {c:?}")),
                theorems::TheoremError::Enumerate(e) => budget_failure(e, None),
            })?;
            reports.push(r);
        }
        let failed = reports.iter().any(|r| !r.holds());
        if args.json {
            print_json(&reports);
        } else {
            println!("{:<18} {:<10} {:>9} {:>9}", "claim", "verdict", "instances", "met");
            for r in &reports {
                let verdict = if r.holds() { "holds" } else { "FAILS" };
                println!("{:<18} {:<10} {:>9} {:>9}", r.claim, verdict, r.instances, r.hypotheses_met);
                if let Some(c) = &r.counterexample {
                    let reduced = EffectAlgebra::new(c.reduced.clone()).expect("intervals are effect algebras");
                    println!("# reduced counterexample for {}", r.claim);
                    print!("{}", file::to_toml(&reduced));
                }
            }
        }
        return Ok(if failed { exit::CLAIM } else { exit::OK });
    }
    let path = args.file.as_deref().expect("clap requires a file without --sweep");
    let e = load_valid(path, args.json)?;
    let reports = match &args.claim {
        Some(id) => vec![theorems::check(&e, id).map_err(|err| Failure::new(exit::USAGE, err.to_string()))?],
        None => theorems::check_all(&e),
    };
    if args.json {
        print_json(&reports);
    } else {
        println!("{:<18} {:<10} {:>6}  hypotheses  witness", "claim", "conclusion", "cases");
        for r in &reports {
            println!("{}", claim_row(&e, r));
        }
    }
    Ok(if reports.iter().any(ClaimReport::failed) { exit::CLAIM } else { exit::OK })
}

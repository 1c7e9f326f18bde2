//! The `orchestra` command line: validate, compile, synth, simulate, oracle.
//!
//! Every command prints a JSON report on standard output and a one-line
//! summary on standard error, and writes its artifacts under `--out`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::automata::{AutomatonError, ControllableDfa, Nfa, NfaOptions};
use crate::ltlf::{check_alphabet, parse, Formula};
use crate::nondet::{
    self, ArenaOptions, NondetOptions, SynthesisError, Transducer, TransducerJson,
    TransducerOrchestrator,
};
use crate::services::{
    load_community, service_stats, LoadedCommunity, Mode, NondetCommunity, ServiceModel,
    StochasticCommunity,
};
use crate::simulation::{exhaustive_adversary, monte_carlo, Verdict};
use crate::stochastic::{
    brute_force_oracle, policy_from_json, solve_lexicographic, CompositionMdp, MdpOptions,
    PolicyOrchestrator, SolutionJson, SolverOptions, StochasticError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_UNREALIZABLE: i32 = 4;
pub const EXIT_GUARD_RAIL: i32 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "orchestra",
    version,
    about = "Orchestrator synthesis for service communities with LTLf goals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the goal and the community, report alphabet and service stats
    Validate(RunArgs),
    /// Write the goal NFA and the controllable DFA
    Compile(RunArgs),
    /// Synthesize an orchestrator (transducer or optimal policy)
    Synth(RunArgs),
    /// Run a synthesized orchestrator against the community
    Simulate(RunArgs),
    /// Brute-force the finite-horizon optimum of the composition MDP
    Oracle(RunArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Nondet,
    Stochastic,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Nondet => Mode::Nondet,
            ModeArg::Stochastic => Mode::Stochastic,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// LTLf goal file
    #[arg(long)]
    pub spec: PathBuf,
    /// Community JSON document
    #[arg(long)]
    pub community: PathBuf,
    /// Expected community mode; defaults to the document's
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Base seed for sampling
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Cap on automaton, arena and MDP states
    #[arg(long, default_value_t = 1_000_000)]
    pub max_states: usize,
    /// Convergence and comparison tolerance
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Cap on value-iteration sweeps
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iterations: usize,
    /// Monte Carlo episodes
    #[arg(long, default_value_t = 10_000)]
    pub episodes: usize,
    /// Exhaustive-adversary depth (simulate) or oracle horizon
    #[arg(long)]
    pub depth: Option<usize>,
    /// Steps per episode; defaults to 10 × the number of MDP states
    #[arg(long)]
    pub step_cap: Option<usize>,
    /// Orchestrator artifact for simulate; defaults to the one under --out
    #[arg(long)]
    pub orchestrator: Option<PathBuf>,
    /// Also write DOT renderings
    #[arg(long)]
    pub dot: bool,
    /// Write the episode log as JSON lines (simulate)
    #[arg(long)]
    pub traces: bool,
    /// Cross-check the stochastic solution against the oracle (synth)
    #[arg(long)]
    pub oracle: bool,
}

/// Exit code, machine-readable report and human summary of a command.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
    pub summary: String,
}

impl Outcome {
    fn ok(report: Value, summary: impl Into<String>) -> Self {
        Outcome {
            code: EXIT_OK,
            report,
            summary: summary.into(),
        }
    }

    fn fail(code: i32, message: impl Into<String>) -> Self {
        let message = message.into();
        Outcome {
            code,
            report: json!({ "ok": false, "exit_code": code, "error": message }),
            summary: message,
        }
    }

    fn fail_with(code: i32, message: impl Into<String>, details: Value) -> Self {
        let mut o = Outcome::fail(code, message);
        o.report["details"] = details;
        o
    }
}

type Step<T> = Result<T, Outcome>;

pub const DEFAULT_ORACLE_HORIZON: usize = 8;

/// Parses the process arguments, runs, prints, and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let outcome = run(&cli);
    println!(
        "{}",
        serde_json::to_string_pretty(&outcome.report).expect("reports serialize")
    );
    eprintln!("{}", outcome.summary);
    outcome.code
}

pub fn run(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Validate(a) => validate(a),
        Command::Compile(a) => compile(a),
        Command::Synth(a) => synth(a),
        Command::Simulate(a) => simulate(a),
        Command::Oracle(a) => oracle(a),
    };
    result.unwrap_or_else(|o| o)
}

fn read(path: &Path, what: &str) -> Step<String> {
    fs::read_to_string(path).map_err(|e| {
        Outcome::fail(
            EXIT_INVALID,
            format!("cannot read {what} {}: {e}", path.display()),
        )
    })
}

fn check_args(args: &RunArgs) -> Step<()> {
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(Outcome::fail(
            EXIT_INVALID,
            format!("--tol must be positive, got {}", args.tol),
        ));
    }
    for (flag, v) in [
        ("--max-states", args.max_states),
        ("--max-iterations", args.max_iterations),
        ("--episodes", args.episodes),
    ] {
        if v == 0 {
            return Err(Outcome::fail(
                EXIT_INVALID,
                format!("{flag} must be at least 1"),
            ));
        }
    }
    if args.step_cap == Some(0) {
        return Err(Outcome::fail(EXIT_INVALID, "--step-cap must be at least 1"));
    }
    Ok(())
}

fn load_formula(args: &RunArgs) -> Step<Formula> {
    let text = read(&args.spec, "goal")?;
    parse(&text).map_err(|e| {
        Outcome::fail_with(
            EXIT_INVALID,
            e.to_string(),
            json!({ "line": e.line, "column": e.column, "found": e.found, "expected": e.expected }),
        )
    })
}

fn load_inputs(args: &RunArgs) -> Step<(Formula, LoadedCommunity)> {
    check_args(args)?;
    let formula = load_formula(args)?;
    let community = load_community(&read(&args.community, "community")?)
        .map_err(|e| Outcome::fail(EXIT_INVALID, e.to_string()))?;
    if let Some(mode) = args.mode.map(Mode::from) {
        if mode != community.mode() {
            return Err(Outcome::fail(
                EXIT_INVALID,
                format!(
                    "--mode {mode} but the community document declares {}",
                    community.mode()
                ),
            ));
        }
    }
    let report = check_alphabet(&formula, community.alphabet());
    if !report.is_ok() {
        return Err(Outcome::fail_with(
            EXIT_INVALID,
            format!(
                "alphabet violation: {} not offered by any service",
                report.violations.join(", ")
            ),
            json!({ "violations": report.violations }),
        ));
    }
    Ok((formula, community))
}

fn write_text(args: &RunArgs, name: &str, text: &str) -> Step<String> {
    fs::create_dir_all(&args.out)
        .and_then(|()| fs::write(args.out.join(name), text))
        .map_err(|e| {
            Outcome::fail(
                EXIT_INVALID,
                format!("cannot write {}: {e}", args.out.join(name).display()),
            )
        })?;
    Ok(name.to_string())
}

fn write_json(args: &RunArgs, name: &str, value: &impl Serialize) -> Step<String> {
    let mut text = serde_json::to_string_pretty(value).expect("artifacts serialize");
    text.push('\n');
    write_text(args, name, &text)
}

fn automaton_failure(e: AutomatonError) -> Outcome {
    match e {
        AutomatonError::StateCap { .. } => Outcome::fail(EXIT_RESOURCE, e.to_string()),
        AutomatonError::UnknownSymbol(_) => Outcome::fail(EXIT_INVALID, e.to_string()),
    }
}

fn nondet_failure(e: SynthesisError) -> Outcome {
    match e {
        SynthesisError::Automaton(a) => automaton_failure(a),
        SynthesisError::StateCap { .. } => Outcome::fail(EXIT_RESOURCE, e.to_string()),
        SynthesisError::Unrealizable { .. } => Outcome::fail(EXIT_UNREALIZABLE, e.to_string()),
        SynthesisError::AlphabetViolation(_) | SynthesisError::AlphabetMismatch(_) => {
            Outcome::fail(EXIT_INVALID, e.to_string())
        }
    }
}

fn stochastic_failure(e: StochasticError) -> Outcome {
    match e {
        StochasticError::Automaton(a) => automaton_failure(a),
        StochasticError::StateCap { .. }
        | StochasticError::NonConvergence { .. }
        | StochasticError::Divergence { .. } => Outcome::fail(EXIT_RESOURCE, e.to_string()),
        StochasticError::Unachievable => Outcome::fail(EXIT_UNREALIZABLE, e.to_string()),
        StochasticError::GuardRail(_) => Outcome::fail(EXIT_GUARD_RAIL, e.to_string()),
        StochasticError::AlphabetViolation(_) | StochasticError::AlphabetMismatch(_) => {
            Outcome::fail(EXIT_INVALID, e.to_string())
        }
    }
}

fn nfa_options(args: &RunArgs) -> NfaOptions {
    NfaOptions {
        max_states: args.max_states,
        ..NfaOptions::default()
    }
}

fn solver_options(args: &RunArgs) -> SolverOptions<f64> {
    SolverOptions {
        tolerance: args.tol,
        max_iterations: args.max_iterations,
        ..SolverOptions::default()
    }
}

fn build_dfa(formula: &Formula, alphabet: &[String], args: &RunArgs) -> Step<ControllableDfa> {
    let nfa = Nfa::build(formula, alphabet, &nfa_options(args)).map_err(automaton_failure)?;
    Ok(ControllableDfa::new(nfa))
}

fn build_mdp(
    formula: &Formula,
    community: &StochasticCommunity<f64>,
    args: &RunArgs,
) -> Step<CompositionMdp<f64>> {
    let dfa = build_dfa(formula, community.alphabet(), args)?;
    CompositionMdp::build(
        &dfa,
        community,
        &MdpOptions {
            max_states: args.max_states,
        },
    )
    .map_err(stochastic_failure)
}

fn into_stochastic(community: LoadedCommunity, command: &str) -> Step<StochasticCommunity<f64>> {
    community.into_stochastic().map_err(|_| {
        Outcome::fail(
            EXIT_INVALID,
            format!("{command} requires a stochastic community"),
        )
    })
}

fn validate(args: &RunArgs) -> Step<Outcome> {
    let (formula, community) = load_inputs(args)?;
    let stats = match &community {
        LoadedCommunity::Nondet(c) => service_stats(c),
        LoadedCommunity::Stochastic(c) => service_stats(c),
    };
    let summary = format!(
        "valid: {} community with {} services over {} actions",
        community.mode(),
        stats.len(),
        community.alphabet().len()
    );
    Ok(Outcome::ok(
        json!({
            "ok": true,
            "mode": community.mode(),
            "formula": formula.to_string(),
            "formula_atoms": formula.atoms(),
            "alphabet": community.alphabet(),
            "alphabet_check": { "violations": Vec::<String>::new() },
            "services": stats,
        }),
        summary,
    ))
}

fn compile(args: &RunArgs) -> Step<Outcome> {
    let (formula, community) = load_inputs(args)?;
    let dfa = build_dfa(&formula, community.alphabet(), args)?;
    let nfa = dfa.nfa();
    let mut files = vec![
        write_json(args, "nfa.json", &nfa.to_json())?,
        write_json(args, "dfa.json", &dfa.to_json())?,
    ];
    if args.dot {
        files.push(write_text(args, "nfa.dot", &nfa.to_dot())?);
        files.push(write_text(args, "dfa.dot", &dfa.to_dot())?);
    }
    let summary = format!(
        "NFA with {} states, controllable DFA with {} states",
        nfa.num_states(),
        dfa.num_states()
    );
    Ok(Outcome::ok(
        json!({
            "ok": true,
            "formula": formula.to_string(),
            "alphabet": nfa.alphabet(),
            "closure_size": nfa.closure_size(),
            "nfa_states": nfa.num_states(),
            "nfa_accepting": nfa.accepting_states().count(),
            "dfa_states": dfa.num_states(),
            "files": files,
        }),
        summary,
    ))
}

fn synth(args: &RunArgs) -> Step<Outcome> {
    let (formula, community) = load_inputs(args)?;
    match community {
        LoadedCommunity::Nondet(c) => synth_nondet(args, &formula, &c),
        LoadedCommunity::Stochastic(c) => synth_stochastic(args, &formula, &c),
    }
}

fn synth_nondet(args: &RunArgs, formula: &Formula, community: &NondetCommunity) -> Step<Outcome> {
    let options = NondetOptions {
        nfa: nfa_options(args),
        arena: ArenaOptions {
            max_states: args.max_states,
        },
    };
    let syn = nondet::synthesize(formula, community, &options).map_err(nondet_failure)?;
    let mut files = Vec::new();
    let mut first_output = Value::Null;
    if let Some(t) = &syn.transducer {
        let json = t.to_json();
        if let Some(o) = json.outputs.get("0") {
            first_output = json!({ "action": o.action, "q": o.nfa_state, "service": o.service });
        }
        files.push(write_json(args, "transducer.json", &json)?);
    }
    if args.dot {
        files.push(write_text(
            args,
            "arena.dot",
            &syn.arena.to_dot(Some(syn.region.ranks())),
        )?);
    }
    let realizable = syn.is_realizable();
    let report = json!({
        "ok": true,
        "mode": Mode::Nondet,
        "realizable": realizable,
        "nfa_states": syn.dfa.nfa().num_states(),
        "arena_states": syn.arena.num_states(),
        "winning_states": syn.region.len(),
        "fixpoint_iterations": syn.region.iterations(),
        "initial_rank": syn.initial_rank(),
        "transducer_states": syn.transducer.as_ref().map(Transducer::num_states),
        "first_output": first_output,
        "files": files,
    });
    record(args, "synth.json", report, |r| {
        if realizable {
            let o = &r["first_output"];
            (
                EXIT_OK,
                format!(
                    "realizable; first delegation ({}, service {})",
                    o["action"].as_str().unwrap_or("-"),
                    o["service"]
                ),
            )
        } else {
            (
                EXIT_UNREALIZABLE,
                "unrealizable: the initial arena state is losing".to_string(),
            )
        }
    })
}

/// Records the report as `name`, then derives exit code and summary.
fn record(
    args: &RunArgs,
    name: &str,
    mut report: Value,
    finish: impl FnOnce(&Value) -> (i32, String),
) -> Step<Outcome> {
    let (code, summary) = finish(&report);
    if let Some(files) = report["files"].as_array_mut() {
        files.push(Value::String(name.to_string()));
    }
    report["exit_code"] = json!(code);
    write_json(args, name, &report)?;
    Ok(Outcome {
        code,
        report,
        summary,
    })
}

fn synth_stochastic(
    args: &RunArgs,
    formula: &Formula,
    community: &StochasticCommunity<f64>,
) -> Step<Outcome> {
    let mdp = build_mdp(formula, community, args)?;
    let solution = solve_lexicographic(&mdp, &solver_options(args)).map_err(stochastic_failure)?;
    let json = solution.to_json(&mdp);
    let mut files = vec![write_json(args, "solution.json", &json)?];
    if args.dot {
        files.push(write_text(
            args,
            "mdp.dot",
            &mdp.to_dot(Some(&solution.p_star)),
        )?);
    }
    let first_action = json
        .policy
        .get(&json.initial)
        .map(|e| json!(e))
        .unwrap_or(Value::Null);
    let oracle = if args.oracle {
        let horizon = args.depth.unwrap_or(DEFAULT_ORACLE_HORIZON);
        let r = brute_force_oracle(&mdp, horizon).map_err(stochastic_failure)?;
        let agrees = (r.probability - solution.initial_probability()).abs() <= 1e-6
            && match (r.conditional_cost, solution.initial_cost()) {
                (Some(a), Some(b)) => (a - b).abs() <= 1e-6,
                (None, _) => r.probability == 0.0,
                _ => false,
            };
        json!({ "horizon": horizon, "probability": r.probability, "conditional_cost": r.conditional_cost, "agrees": agrees })
    } else {
        Value::Null
    };
    let report = json!({
        "ok": true,
        "mode": Mode::Stochastic,
        "achievable": solution.achievable,
        "p_star": solution.initial_probability(),
        "J_star": solution.initial_cost(),
        "mdp_states": mdp.num_states(),
        "mdp_actions": mdp.num_actions(),
        "first_action": first_action,
        "iterations": solution.iterations,
        "residuals": json.residuals,
        "oracle": oracle,
        "files": files,
    });
    record(args, "synth.json", report, |r| {
        if solution.achievable {
            (
                EXIT_OK,
                format!("p* = {}, J* = {}", r["p_star"], r["J_star"]),
            )
        } else {
            (
                EXIT_UNREALIZABLE,
                "unachievable: the goal is reached with probability 0".to_string(),
            )
        }
    })
}

fn artifact(args: &RunArgs, default: &str) -> Step<String> {
    let path = args
        .orchestrator
        .clone()
        .unwrap_or_else(|| args.out.join(default));
    if !path.exists() {
        return Err(Outcome::fail(
            EXIT_INVALID,
            format!(
                "orchestrator artifact {} not found; run synth first or pass --orchestrator",
                path.display()
            ),
        ));
    }
    read(&path, "orchestrator artifact")
}

fn simulate(args: &RunArgs) -> Step<Outcome> {
    let (formula, community) = load_inputs(args)?;
    match community {
        LoadedCommunity::Nondet(c) => simulate_nondet(args, &formula, &c),
        LoadedCommunity::Stochastic(c) => simulate_stochastic(args, &formula, &c),
    }
}

fn simulate_nondet(
    args: &RunArgs,
    formula: &Formula,
    community: &NondetCommunity,
) -> Step<Outcome> {
    let text = artifact(args, "transducer.json")?;
    let json: TransducerJson = serde_json::from_str(&text)
        .map_err(|e| Outcome::fail(EXIT_INVALID, format!("bad transducer artifact: {e}")))?;
    let names = community
        .services()
        .iter()
        .map(|s| {
            (0..=s.num_states())
                .map(|q| s.state_name(q).to_string())
                .collect()
        })
        .collect();
    let transducer = Transducer::from_json(&json, names)
        .map_err(|e| Outcome::fail(EXIT_INVALID, format!("bad transducer artifact: {e}")))?;
    let depth = args
        .depth
        .unwrap_or(transducer.rank(transducer.initial()) + 2);
    let verdict = exhaustive_adversary(
        &TransducerOrchestrator::new(&transducer),
        community,
        formula,
        depth,
    );
    let (summary, body) = match &verdict {
        Verdict::AllSuccessful {
            branches,
            max_steps,
        } => (
            format!("all {branches} branches successful within depth {depth}"),
            json!({ "verdict": "all_successful", "branches": branches, "max_steps": max_steps }),
        ),
        Verdict::Counterexample(trace) => (
            format!("counterexample after {} steps", trace.steps.len()),
            json!({ "verdict": "counterexample", "counterexample": trace.to_json(community) }),
        ),
    };
    let mut report = json!({ "ok": true, "mode": Mode::Nondet, "depth": depth, "files": [] });
    merge(&mut report, body);
    record(args, "simulate.json", report, |_| (EXIT_OK, summary))
}

fn merge(report: &mut Value, extra: Value) {
    if let (Some(r), Value::Object(e)) = (report.as_object_mut(), extra) {
        r.extend(e);
    }
}

fn simulate_stochastic(
    args: &RunArgs,
    formula: &Formula,
    community: &StochasticCommunity<f64>,
) -> Step<Outcome> {
    let text = artifact(args, "solution.json")?;
    let json: SolutionJson = serde_json::from_str(&text)
        .map_err(|e| Outcome::fail(EXIT_INVALID, format!("bad solution artifact: {e}")))?;
    let mdp = build_mdp(formula, community, args)?;
    let policy = policy_from_json(&json, &mdp)
        .map_err(|e| Outcome::fail(EXIT_INVALID, format!("bad solution artifact: {e}")))?;
    let step_cap = args.step_cap.unwrap_or(10 * mdp.num_states());
    let orch = PolicyOrchestrator::new(&mdp, &policy);
    let (stats, traces) = monte_carlo(
        &orch,
        community,
        formula,
        args.episodes,
        args.seed,
        step_cap,
    );
    let mut files = Vec::new();
    if args.traces {
        let mut log = String::new();
        for t in &traces {
            log.push_str(&serde_json::to_string(&t.to_json(community)).expect("traces serialize"));
            log.push('\n');
        }
        files.push(write_text(args, "traces.jsonl", &log)?);
    }
    let summary = format!(
        "success rate {:.4} ± {:.4} over {} episodes; mean conditional cost {}",
        stats.success_rate,
        stats.success_rate_stderr,
        stats.episodes,
        stats
            .mean_conditional_cost
            .map_or("undefined".to_string(), |c| format!("{c:.6}"))
    );
    let mut report =
        json!({ "ok": true, "mode": Mode::Stochastic, "step_cap": step_cap, "files": files });
    merge(
        &mut report,
        serde_json::to_value(&stats).expect("stats serialize"),
    );
    record(args, "simulate.json", report, |_| (EXIT_OK, summary))
}

fn oracle(args: &RunArgs) -> Step<Outcome> {
    let (formula, community) = load_inputs(args)?;
    let community = into_stochastic(community, "oracle")?;
    let mdp = build_mdp(&formula, &community, args)?;
    let horizon = args.depth.unwrap_or(DEFAULT_ORACLE_HORIZON);
    let r = brute_force_oracle(&mdp, horizon).map_err(stochastic_failure)?;
    let report = json!({
        "ok": true,
        "horizon": horizon,
        "mdp_states": mdp.num_states(),
        "probability": r.probability,
        "conditional_cost": r.conditional_cost,
        "files": [],
    });
    let summary = format!(
        "horizon {horizon}: probability {}, conditional cost {:?}",
        r.probability, r.conditional_cost
    );
    record(args, "oracle.json", report, |_| (EXIT_OK, summary))
}

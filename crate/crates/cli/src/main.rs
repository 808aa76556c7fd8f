use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use annolog::engine::{
    check_consistency, iterate, lfp, trace_lines, ConflictLine, FixpointResult, OnConflict, Witness,
};
use annolog::error::{EngineError, TrainError};
use annolog::neural::UnrolledNet;
use annolog::program::{add_incon_rules, prune, AtomId, Literal, Program};
use annolog::syntax::{parse_program, parse_query, serialize};
use annolog::trainer::{train, Dataset, Policy, TrainConfig};
use annolog::LatticeConfig;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "annolog", version, about = "Evaluate, check and train annotated logic programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Annotation lattice.
    #[arg(long, value_enum, default_value_t = Mode::Signed, global = true)]
    mode: Mode,
    /// Grid resolution N for `--mode unit` (values k/N); defaults to 10.
    #[arg(long, global = true)]
    resolution: Option<u32>,
    /// Number of unrolled cells; defaults to height·|L|.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Print every change of every iteration.
    #[arg(long, global = true)]
    trace: bool,
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    #[arg(long, default_value_t = 500, global = true)]
    epochs: usize,
    #[arg(long, default_value_t = 0.1, global = true)]
    lr: f64,
    /// `hard` or `penalty:LAMBDA`.
    #[arg(long, default_value = "hard", value_parser = parse_policy, global = true)]
    policy: Policy,
    /// Where to write programs produced by `train` and `prune`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit JSON records instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the least fixpoint.
    Eval { program: PathBuf },
    /// Decide `LIT:[l,u]`.
    Query { program: PathBuf, query: String },
    /// Report consistency and conflict witnesses.
    Check { program: PathBuf },
    /// Learn the weights of parametrized rules.
    Train { program: PathBuf, data: PathBuf },
    /// Erase body literals with weight -1.
    Prune { program: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Unit,
    Signed,
}

fn parse_policy(s: &str) -> Result<Policy, String> {
    if s == "hard" {
        return Ok(Policy::HardCheck);
    }
    match s.strip_prefix("penalty:").map(str::parse::<f64>) {
        Some(Ok(l)) if l.is_finite() && l >= 0.0 => Ok(Policy::Penalty(l)),
        _ => Err(format!("expected `hard` or `penalty:LAMBDA`, got `{s}`")),
    }
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

fn engine_failure(e: EngineError) -> Failure {
    match e {
        EngineError::BoundExceeded { .. } | EngineError::DetectionMismatch(_) => Failure::internal(e.to_string()),
        other => Failure::usage(other.to_string()),
    }
}

fn train_failure(e: TrainError) -> Failure {
    match e {
        TrainError::Engine(inner) => engine_failure(inner),
        TrainError::AllRejected { .. } => Failure {
            code: 1,
            message: e.to_string(),
        },
        other => Failure::usage(other.to_string()),
    }
}

struct Output {
    stdout: String,
    code: u8,
}

impl Output {
    fn new() -> Self {
        Output {
            stdout: String::new(),
            code: 0,
        }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.stdout.push_str(s.as_ref());
        self.stdout.push('\n');
    }
}

fn lattice(cli: &Cli) -> Result<LatticeConfig, Failure> {
    match (cli.mode, cli.resolution) {
        (Mode::Signed, None) => Ok(LatticeConfig::signed()),
        (Mode::Signed, Some(_)) => Err(Failure::usage("--resolution only applies to --mode unit")),
        (Mode::Unit, n) => LatticeConfig::unit(n.unwrap_or(10)).map_err(|e| Failure::usage(e.to_string())),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load(cli: &Cli, path: &Path) -> Result<Program, Failure> {
    let text = read(path)?;
    parse_program(&text, lattice(cli)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_program(cli: &Cli, out: &mut Output, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
        None => {
            out.stdout.push_str(text);
            Ok(())
        }
    }
}

fn witness_json(p: &Program, w: &Witness) -> Value {
    json!({
        "atom": p.symbols().name(w.atom),
        "iteration": w.iteration,
        "first": w.first.to_string(),
        "second": w.second.to_string(),
    })
}

fn print_trace(p: &Program, res: &FixpointResult, out: &mut Output) {
    if let Some(trace) = &res.trace {
        for l in trace_lines(p, trace) {
            out.line(l);
        }
    }
}

/// Non-`⊥` intervals in literal order.
fn annotations(p: &Program, res: &FixpointResult) -> Vec<(String, String)> {
    (0..p.literal_count())
        .map(Literal::from_index)
        .filter_map(|l| {
            let mu = res.final_state.interval(l)?;
            (!mu.is_bottom()).then(|| (p.literal_name(l), mu.to_string()))
        })
        .collect()
}

fn eval(cli: &Cli, path: &Path) -> Result<Output, Failure> {
    let p = load(cli, path)?;
    let mut out = Output::new();
    if let Some(k) = cli.k {
        return eval_network(cli, &p, k);
    }
    let res = lfp(&p, cli.trace).map_err(engine_failure)?;
    if cli.json {
        let lits: serde_json::Map<String, Value> =
            annotations(&p, &res).into_iter().map(|(k, v)| (k, Value::String(v))).collect();
        let witnesses: Vec<Value> = res.witnesses.iter().map(|w| witness_json(&p, w)).collect();
        let mut rec = json!({
            "consistent": res.consistent,
            "iterations": res.iterations,
            "literals": lits,
            "witnesses": witnesses,
        });
        if let Some(trace) = &res.trace {
            rec["trace"] = json!(trace_lines(&p, trace));
        }
        out.line(rec.to_string());
    } else {
        print_trace(&p, &res, &mut out);
        for w in &res.witnesses {
            out.line(ConflictLine { program: &p, witness: w }.to_string());
        }
        if res.consistent {
            for (lit, mu) in annotations(&p, &res) {
                out.line(format!("{lit} -> {mu}"));
            }
        }
        out.line(format!("iterations: {}", res.iterations));
    }
    if !res.consistent {
        out.code = 1;
    }
    Ok(out)
}

/// Run the unrolled network for `k` cells instead of iterating to the fixpoint.
fn eval_network(cli: &Cli, p: &Program, k: usize) -> Result<Output, Failure> {
    let net = UnrolledNet::compile(p).map_err(|e| Failure::usage(e.to_string()))?.with_k(k);
    let cells = net.trajectory(k, &[]).map_err(|e| Failure::usage(e.to_string()))?;
    let last = cells.last().expect("A_0 is always present");
    let cfg = p.config();
    let mut out = Output::new();
    let mut lits = Vec::new();
    let mut conflicted = Vec::new();
    for a in 0..p.atom_count() {
        let atom = AtomId::from_index(a);
        let (pos, neg) = (last.get(Literal::pos(atom)), last.get(Literal::neg(atom)));
        match cfg.from_signed_lowers(pos, neg) {
            Ok(mu) => {
                for (lit, val) in [(Literal::pos(atom), mu), (Literal::neg(atom), mu.negate())] {
                    if !val.is_bottom() {
                        lits.push((lit, p.literal_name(lit), val.to_string()));
                    }
                }
            }
            Err(_) => conflicted.push(p.symbols().name(atom).to_string()),
        }
    }
    lits.sort_by_key(|(l, _, _)| l.index());
    if cli.trace {
        for (t, pair) in cells.windows(2).enumerate() {
            for (i, (a, b)) in pair[0].values().iter().zip(pair[1].values()).enumerate() {
                if a != b {
                    out.line(format!("cell {}: {} -> {b}", t + 1, p.literal_name(Literal::from_index(i))));
                }
            }
        }
    }
    if cli.json {
        let map: serde_json::Map<String, Value> = lits.into_iter().map(|(_, k, v)| (k, Value::String(v))).collect();
        out.line(json!({"cells": k, "consistent": conflicted.is_empty(), "literals": map, "conflicted": conflicted}).to_string());
    } else {
        for a in &conflicted {
            out.line(format!("INCONSISTENT at cell {k}: atom {a}"));
        }
        for (_, lit, mu) in lits {
            out.line(format!("{lit} -> {mu}"));
        }
        out.line(format!("cells: {k}"));
    }
    if !conflicted.is_empty() {
        out.code = 1;
    }
    Ok(out)
}

fn query(cli: &Cli, path: &Path, q: &str) -> Result<Output, Failure> {
    let p = load(cli, path)?;
    let (lit, mu) = parse_query(q, &p).map_err(|e| Failure::usage(format!("query `{q}`: {e}")))?;
    let res = lfp(&p, cli.trace).map_err(engine_failure)?;
    let mut out = Output::new();
    if !cli.json {
        print_trace(&p, &res, &mut out);
    }
    if !res.consistent {
        if cli.json {
            let witnesses: Vec<Value> = res.witnesses.iter().map(|w| witness_json(&p, w)).collect();
            out.line(json!({"query": q, "result": "INCONSISTENT", "witnesses": witnesses}).to_string());
        } else {
            for w in &res.witnesses {
                out.line(ConflictLine { program: &p, witness: w }.to_string());
            }
        }
        out.code = 1;
        return Ok(out);
    }
    let here = res.final_state.interval(lit).expect("consistent fixpoint");
    let entailed = mu.leq(&here).map_err(|e| Failure::internal(e.to_string()))?;
    let verdict = if entailed { "ENTAILED" } else { "NOT-ENTAILED" };
    if cli.json {
        out.line(json!({"query": q, "result": verdict, "fixpoint": here.to_string()}).to_string());
    } else {
        out.line(verdict);
    }
    out.code = if entailed { 0 } else { 1 };
    Ok(out)
}

fn check(cli: &Cli, path: &Path) -> Result<Output, Failure> {
    let p = load(cli, path)?;
    let res = check_consistency(&p).map_err(engine_failure)?;
    let aug = add_incon_rules(&p).map_err(|e| Failure::usage(e.to_string()))?;
    let mut out = Output::new();
    if cli.trace && !cli.json {
        let traced = iterate(&aug, OnConflict::Continue, true).map_err(engine_failure)?;
        print_trace(&aug, &traced, &mut out);
    }
    if cli.json {
        let witnesses: Vec<Value> = res.witnesses.iter().map(|w| witness_json(&p, w)).collect();
        out.line(
            json!({
                "consistent": res.consistent,
                "iterations": res.iterations,
                "witness_iteration": res.conflict_iteration,
                "incon_iteration": res.incon_iteration,
                "witnesses": witnesses,
            })
            .to_string(),
        );
    } else if res.consistent {
        out.line("CONSISTENT");
    } else {
        for w in &res.witnesses {
            out.line(ConflictLine { program: &p, witness: w }.to_string());
        }
        if let Some(k) = res.incon_iteration {
            out.line(format!("incon true at iter {k}"));
        }
    }
    if !res.consistent {
        out.code = 1;
    }
    Ok(out)
}

fn train_cmd(cli: &Cli, path: &Path, data_path: &Path) -> Result<Output, Failure> {
    let p = load(cli, path)?;
    let data = Dataset::parse(&read(data_path)?, &p)
        .map_err(|e| Failure::usage(format!("{}: {e}", data_path.display())))?;
    let cfg = TrainConfig {
        epochs: cli.epochs,
        learning_rate: cli.lr,
        seed: cli.seed,
        policy: cli.policy,
        k: cli.k,
        ..TrainConfig::default()
    };
    let report = train(&p, &data, &cfg).map_err(train_failure)?;
    let mut out = Output::new();
    let mut log = String::new();
    if cli.json {
        log.push_str(&report.history_json());
        let _ = writeln!(log, "{}", json!({"rejected": report.rejected, "epochs": report.history.len()}));
    } else {
        for r in &report.history {
            let _ = writeln!(
                log,
                "epoch {}: loss {:.4} accuracy {:.4} consistency {:.4} {} step {}",
                r.epoch,
                r.loss,
                r.accuracy,
                r.consistency,
                if r.accepted { "accepted" } else { "rejected" },
                r.step
            );
        }
        let _ = writeln!(log, "rejected updates: {}", report.rejected);
    }
    let text = serialize(&report.program);
    match &cli.out {
        Some(_) => {
            write_program(cli, &mut out, &text)?;
            out.stdout.push_str(&log);
        }
        None => {
            eprint!("{log}");
            out.stdout.push_str(&text);
        }
    }
    Ok(out)
}

fn prune_cmd(cli: &Cli, path: &Path) -> Result<Output, Failure> {
    let p = load(cli, path)?;
    let mut out = Output::new();
    write_program(cli, &mut out, &serialize(&prune(&p)))?;
    Ok(out)
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Eval { program } => eval(cli, program),
        Command::Query { program, query: q } => query(cli, program, q),
        Command::Check { program } => check(cli, program),
        Command::Train { program, data } => train_cmd(cli, program, data),
        Command::Prune { program } => prune_cmd(cli, program),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

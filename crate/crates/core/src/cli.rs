//! Command-line front end. Exit codes: 0 sat, 1 unsat, 2 unknown, 3 error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Map, Value};

use crate::ast::{Formula, LinearTerm, Model, Rel, Symbols};
use crate::driver::{decide, Decision, Verdict};
use crate::oracle::{enumerate_box_solutions, semi_decide, BoxSystem};
use crate::reductions::encode_minsky;
use crate::textio::{parse_formula, parse_minsky, parse_system_json, print_formula, SystemText};

pub const EXIT_SAT: i32 = 0;
pub const EXIT_UNSAT: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "powpa", version, about = "Existential Presburger arithmetic with two power predicates")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Run every enumeration to the end.
    Complete,
    /// Stop enumerations after `--budget` candidates and report unknown.
    Budget,
}

#[derive(Args, Debug)]
struct Bases {
    #[arg(long)]
    alpha: BigInt,
    #[arg(long)]
    beta: BigInt,
}

#[derive(Args, Debug)]
struct Solve {
    #[command(flatten)]
    bases: Bases,
    #[arg(long, value_enum, default_value_t = Mode::Budget)]
    mode: Mode,
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    /// Starting precision, in bits, of logarithm enclosures.
    #[arg(long)]
    precision_bits: Option<u32>,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Decide a closed existential sentence.
    Decide {
        #[command(flatten)]
        opts: Solve,
        #[arg(long, conflicts_with = "file", required_unless_present = "file")]
        expr: Option<String>,
        /// Read the sentence from a file.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Decide `A z > b ∧ C z = d` over powers given as JSON.
    SolveSystem {
        #[command(flatten)]
        opts: Solve,
        #[arg(long)]
        system: PathBuf,
    },
    /// Brute-force search in a box.
    Oracle {
        #[command(flatten)]
        bases: Bases,
        /// Largest exponent tried.
        #[arg(long = "box")]
        side: u64,
        /// List every exponent tuple of this system in the box, as JSON.
        #[arg(long, conflicts_with = "expr", required_unless_present = "expr")]
        system: Option<PathBuf>,
        /// Search a model of this sentence instead.
        #[arg(long)]
        expr: Option<String>,
        /// Range `[-n, n]` for variables not constrained to powers.
        #[arg(long, default_value_t = 16)]
        lin_box: u64,
        #[arg(long)]
        json: bool,
    },
    /// Print the sentence encoding a two-counter machine.
    EncodeMinsky {
        #[command(flatten)]
        bases: Bases,
        #[arg(long)]
        machine: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Msg(String),
    #[error("cannot read {path}: {err}")]
    Io { path: PathBuf, err: std::io::Error },
}

fn msg(e: impl std::fmt::Display) -> CliError {
    CliError::Msg(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|err| CliError::Io { path: path.to_path_buf(), err })
}

/// Parses `args` (without the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`.
pub fn run_with<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("powpa")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_SAT };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.cmd, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

/// Runs with process arguments already stripped of the program name.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

fn check_bases(b: &Bases) -> Result<(), CliError> {
    for g in [&b.alpha, &b.beta] {
        if g <= &BigInt::from(1) {
            return Err(CliError::Msg(format!("power base must exceed 1, got {g}")));
        }
    }
    Ok(())
}

fn budget_of(o: &Solve) -> u64 {
    match o.mode {
        Mode::Complete => u64::MAX,
        Mode::Budget => o.budget,
    }
}

fn dispatch(cmd: Cmd, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Cmd::Decide { opts, expr, file } => {
            let text = match (expr, file) {
                (Some(e), _) => e,
                (None, Some(p)) => read(&p)?,
                (None, None) => unreachable!("clap requires one"),
            };
            let parsed = parse_formula(&text).map_err(msg)?;
            let mut syms = parsed.symbols;
            solve_and_report(&opts, &parsed.formula, &mut syms, out)
        }
        Cmd::SolveSystem { opts, system } => {
            let sys = parse_system_json(&read(&system)?).map_err(msg)?;
            let (f, mut syms) = system_sentence(&sys);
            solve_and_report(&opts, &f, &mut syms, out)
        }
        Cmd::Oracle { bases, side, system, expr, lin_box, json } => {
            check_bases(&bases)?;
            if let Some(path) = system {
                let sys = parse_system_json(&read(&path)?).map_err(msg)?;
                let sols = enumerate_box_solutions(&BoxSystem::from_text(&sys, &bases.alpha, &bases.beta), side);
                // a list of tuples in either output mode
                writeln!(out, "{}", json!(sols)).map_err(msg)?;
                return Ok(EXIT_SAT);
            }
            let parsed = parse_formula(expr.as_deref().unwrap_or_default()).map_err(msg)?;
            if !parsed.formula.free_vars().is_empty() {
                return Err(CliError::Msg("free variables not allowed".into()));
            }
            if !existential(&parsed.formula, true) {
                return Err(CliError::Msg("only existential sentences are supported".into()));
            }
            let found = semi_decide(&parsed.formula, &bases.alpha, &bases.beta, side, lin_box);
            let verdict = if found.is_some() { "sat" } else { "unknown" };
            let model = found.unwrap_or_default();
            if json {
                writeln!(out, "{}", json!({"verdict": verdict, "model": model_json(&model, &parsed.symbols)})).map_err(msg)?;
            } else {
                write_human(out, verdict, &model, &parsed.symbols).map_err(msg)?;
            }
            Ok(if verdict == "sat" { EXIT_SAT } else { EXIT_UNKNOWN })
        }
        Cmd::EncodeMinsky { bases, machine } => {
            let m = parse_minsky(&read(&machine)?).map_err(msg)?;
            let enc = encode_minsky(&m, &bases.alpha, &bases.beta).map_err(msg)?;
            writeln!(out, "{}", print_formula(&enc.formula, &enc.symbols)).map_err(msg)?;
            Ok(EXIT_SAT)
        }
    }
}

/// Quantifiers only in existential position.
fn existential(f: &Formula, positive: bool) -> bool {
    match f {
        Formula::Atom(_) => true,
        Formula::And(gs) | Formula::Or(gs) => gs.iter().all(|g| existential(g, positive)),
        Formula::Not(g) => existential(g, !positive),
        Formula::Exists(_, g) => positive && existential(g, positive),
        Formula::Forall(_, g) => !positive && existential(g, positive),
    }
}

/// `∃ z1..zl . ⋀ zi ∈ γi^ℕ ∧ A z > b ∧ C z = d`.
pub fn system_sentence(sys: &SystemText) -> (Formula, Symbols) {
    let mut syms = Symbols::new();
    let vars: Vec<_> = (1..=sys.bases.len()).map(|i| syms.intern(&format!("z{i}"))).collect();
    let row_term = |row: &[BigInt], rhs: &BigInt| {
        let mut t = LinearTerm::constant(-rhs.clone());
        for (v, c) in vars.iter().zip(row) {
            t.add_coeff(*v, c);
        }
        t
    };
    let mut parts: Vec<Formula> = vars.iter().zip(&sys.bases).map(|(v, g)| Formula::power(LinearTerm::var(*v), *g)).collect();
    parts.extend(sys.a.iter().zip(&sys.b).map(|(r, b)| Formula::cmp(row_term(r, b), Rel::Gt)));
    parts.extend(sys.c.iter().zip(&sys.d).map(|(r, d)| Formula::cmp(row_term(r, d), Rel::Eq)));
    (Formula::Exists(vars, Box::new(Formula::And(parts))), syms)
}

fn model_json(m: &Model, syms: &Symbols) -> Value {
    let mut obj = Map::new();
    for (v, x) in m {
        obj.insert(syms.name(*v).to_string(), Value::String(x.to_string()));
    }
    Value::Object(obj)
}

fn write_human(out: &mut dyn Write, verdict: &str, m: &Model, syms: &Symbols) -> std::io::Result<()> {
    writeln!(out, "{verdict}")?;
    for (v, x) in m {
        writeln!(out, "  {} = {x}", syms.name(*v))?;
    }
    Ok(())
}

fn solve_and_report(o: &Solve, f: &Formula, syms: &mut Symbols, out: &mut dyn Write) -> Result<i32, CliError> {
    check_bases(&o.bases)?;
    if let Some(bits) = o.precision_bits {
        crate::numth::set_enclosure_floor_bits(bits);
    }
    let Decision { verdict, stats } = decide(f, syms, &o.bases.alpha, &o.bases.beta, budget_of(o)).map_err(msg)?;
    let empty = Model::new();
    let model = match &verdict {
        Verdict::Sat { model, .. } => model,
        _ => &empty,
    };
    if o.json {
        let v = json!({
            "verdict": verdict.label(),
            "model": model_json(model, syms),
            "stats": {
                "instances": stats.instances,
                "cells": stats.cells,
                "enumerated": stats.enumerated,
                "budgetTruncated": stats.budget_truncated,
            },
        });
        writeln!(out, "{v}").map_err(msg)?;
    } else {
        write_human(out, verdict.label(), model, syms).map_err(msg)?;
        if let Verdict::Unknown(reason) = &verdict {
            writeln!(out, "  reason: {reason}").map_err(msg)?;
        }
    }
    Ok(match verdict {
        Verdict::Sat { .. } => EXIT_SAT,
        Verdict::Unsat => EXIT_UNSAT,
        Verdict::Unknown(_) => EXIT_UNKNOWN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run_with(args.iter().copied(), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn decide_exit_codes() {
        let (c, out, _) = call(&["decide", "--alpha", "2", "--beta", "3", "--expr", "exists x . powA(x) & x > 5 & x < 9"]);
        assert_eq!(c, 0);
        assert!(out.contains("x = 8"), "{out}");
        let (c, _, _) = call(&["decide", "--alpha", "2", "--beta", "3", "--expr", "exists x . powA(x) & powB(x) & x > 1"]);
        assert_eq!(c, 1);
    }

    #[test]
    fn json_shape() {
        let (c, out, _) = call(&["decide", "--alpha", "2", "--beta", "3", "--json", "--expr", "exists x y . powA(x) & powB(y) & x = y + 1"]);
        assert_eq!(c, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "sat");
        assert_eq!(v["model"]["x"], "2");
        assert_eq!(v["model"]["y"], "1");
        assert!(v["stats"]["budgetTruncated"].is_boolean());
        assert!(v["stats"]["instances"].is_u64());
    }

    #[test]
    fn errors() {
        let (c, _, err) = call(&["decide", "--alpha", "1", "--beta", "3", "--expr", "exists x . x = 1"]);
        assert_eq!(c, 3);
        assert!(err.contains("exceed 1"));
        let (c, _, err) = call(&["decide", "--alpha", "2", "--beta", "3", "--expr", "x = 1"]);
        assert_eq!((c, err.trim()), (3, "error: free variables not allowed"));
        let (c, _, _) = call(&["decide", "--alpha", "2", "--beta", "3", "--expr", "exists x . x ="]);
        assert_eq!(c, 3);
        let (c, _, _) = call(&["frobnicate"]);
        assert_eq!(c, 3);
        let (c, _, _) = call(&["decide", "--alpha", "2", "--beta", "3", "--mode", "fast", "--expr", "exists x . x = 1"]);
        assert_eq!(c, 3);
        let (c, out, _) = call(&["--help"]);
        assert_eq!(c, 0);
        assert!(out.contains("solve-system"));
    }

    #[test]
    fn oracle_expression() {
        let (c, out, _) = call(&["oracle", "--alpha", "2", "--beta", "3", "--box", "10", "--json", "--expr", "exists x . powA(x) & x = 8"]);
        assert_eq!(c, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["model"]["x"], "8");
        let (c, _, _) = call(&["oracle", "--alpha", "2", "--beta", "3", "--box", "10", "--expr", "exists x . powA(x) & powB(x) & x > 1"]);
        assert_eq!(c, 2);
    }
}

//! Command-line front end. [`run_cli`] does all the work so it can be driven from tests;
//! the `fmc` binary only forwards `argv` and the exit code.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bridge::{encode_cbv, parse_cbv, parse_lambda, print_lambda};
use crate::bridge::cbv::encode_cbv_with;
use crate::bridge::translate::{fmc_to_lambda, lambda_to_fmc};
use crate::equivalence::{machine_equiv, EquivVerdict, TestBudget};
use crate::machine::{run, trace, DeltaRegistry, Memory, RunError, TraceEnd};
use crate::measure::{measure, measure_variant};
use crate::parser::{parse_memory, parse_term, parse_type, print_term, print_type};
use crate::reduction::{normalize, reduction_graph, ReductionError, Strategy};
use crate::syntax::Term;
use crate::types::{check_with, ground_type, infer_with, Context, Derivation, Signature, SimpleType};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_STUCK: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "fmc", version, about = "Functional Machine Calculus toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// A term given as a file path, or inline with `-e`.
#[derive(Args, Debug)]
struct Source {
    /// Source file (`-` for stdin)
    file: Option<PathBuf>,
    /// Inline source text instead of a file
    #[arg(short = 'e', long = "expr")]
    expr: Option<String>,
}

#[derive(Args, Debug)]
struct Typing {
    /// Expected type, e.g. "rnd(Z) c(Z) > c(Z)"; inferred and grounded when absent
    #[arg(long = "type")]
    ty: Option<String>,
    /// Signature file declaring extra base types and constants
    #[arg(long)]
    sig: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum StrategyArg {
    /// leftmost-outermost
    Lo,
    /// rightmost-innermost
    Ri,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse and pretty-print a term
    Fmt(Source),
    /// Check a term against a type
    Check {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        typing: Typing,
    },
    /// Infer a principal type with row variables
    Infer {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        sig: Option<PathBuf>,
    },
    /// Run the machine and print the final memory
    Run {
        #[command(flatten)]
        src: Source,
        /// Initial memory, e.g. "rnd = 9 7 3 ; c = 5"
        #[arg(long, default_value = "")]
        mem: String,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: usize,
        /// Print every configuration
        #[arg(long)]
        trace: bool,
    },
    /// Print every machine configuration
    Trace {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value = "")]
        mem: String,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: usize,
    },
    /// Reduce to normal form
    Normalize {
        #[command(flatten)]
        src: Source,
        #[arg(long, value_enum, default_value = "lo")]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: usize,
        /// Contract eta redexes as well
        #[arg(long)]
        eta: bool,
    },
    /// Build the reduction graph
    Graph {
        #[command(flatten)]
        src: Source,
        /// Node bound
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        /// Print Graphviz instead of a summary
        #[arg(long)]
        dot: bool,
        #[arg(long)]
        eta: bool,
    },
    /// Print the strong-normalisation measure
    Measure {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        typing: Typing,
        /// The run-length variant of the measure
        #[arg(long)]
        variant: bool,
    },
    /// Test two closed terms for machine equivalence
    Equiv {
        left: PathBuf,
        right: PathBuf,
        #[arg(long = "type")]
        ty: String,
        /// Size bound for synthesized arguments
        #[arg(long, default_value_t = 7)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        fuel: usize,
    },
    /// Interpret a main-only typed term as a λ-term
    ToLambda {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        typing: Typing,
    },
    /// Translate a λ-term (`.lam`) to a machine term
    FromLambda(Source),
    /// Encode a call-by-value program (`.cbv`)
    EncodeCbv {
        #[command(flatten)]
        src: Source,
        /// Comma-separated cells to declare; defaults to the cells the program uses
        #[arg(long, value_delimiter = ',')]
        cells: Option<Vec<String>>,
    },
}

/// An error with the exit code it maps to.
struct Fail(i32, String);

type Out<'a> = &'a mut dyn Write;

fn fail(code: i32, e: impl std::fmt::Display) -> Fail {
    Fail(code, e.to_string())
}

fn read_source(s: &Source) -> Result<String, Fail> {
    match (&s.expr, &s.file) {
        (Some(e), None) => Ok(e.clone()),
        (None, Some(p)) if p.as_os_str() == "-" => {
            let mut buf = String::new();
            std::io::Read::read_to_string(&mut std::io::stdin(), &mut buf).map_err(|e| fail(EXIT_USAGE, e))?;
            Ok(buf)
        }
        (None, Some(p)) => read_file(p),
        _ => Err(Fail(EXIT_USAGE, "give exactly one of FILE or --expr".into())),
    }
}

fn read_file(p: &PathBuf) -> Result<String, Fail> {
    std::fs::read_to_string(p).map_err(|e| Fail(EXIT_USAGE, format!("{}: {e}", p.display())))
}

/// Source text with `#` line comments removed.
fn strip_comments(src: &str) -> String {
    src.lines().map(|l| l.split('#').next().unwrap_or("")).collect::<Vec<_>>().join("\n")
}

fn term_of(s: &Source) -> Result<Term, Fail> {
    parse_term(&strip_comments(&read_source(s)?)).map_err(|e| fail(EXIT_INVALID, e))
}

fn signature(p: &Option<PathBuf>) -> Result<Signature, Fail> {
    match p {
        None => Ok(Signature::default()),
        Some(p) => Signature::parse(&read_file(p)?).map_err(|e| fail(EXIT_INVALID, e)),
    }
}

fn derivation(t: &Term, typing: &Typing) -> Result<(SimpleType, Derivation), Fail> {
    let sig = signature(&typing.sig)?;
    match &typing.ty {
        Some(ty) => {
            let ty = parse_type(ty).map_err(|e| fail(EXIT_INVALID, e))?;
            let d = check_with(&sig, &Context::new(), t, &ty).map_err(|e| fail(EXIT_INVALID, e))?;
            Ok((ty, d))
        }
        None if typing.sig.is_none() => ground_type(t).map_err(|e| fail(EXIT_INVALID, e)),
        None => {
            let s = infer_with(&sig, &Context::new(), t).map_err(|e| fail(EXIT_INVALID, e))?;
            let ty = s.ground(&SimpleType::unit_arrow());
            let d = check_with(&sig, &Context::new(), t, &ty).map_err(|e| fail(EXIT_INVALID, e))?;
            Ok((ty, d))
        }
    }
}

fn memory(src: &str) -> Result<Memory, Fail> {
    parse_memory(src).map_err(|e| fail(EXIT_USAGE, format!("--mem: {e}")))
}

fn io(e: std::io::Error) -> Fail {
    fail(1, e)
}

fn show_trace(out: Out, t: &Term, mem: &Memory, fuel: usize) -> Result<(), Fail> {
    let tr = trace(mem, t, &DeltaRegistry::default(), fuel);
    write!(out, "{}", tr.render()).map_err(io)?;
    match tr.end {
        TraceEnd::Terminal => {
            let last = &tr.states.last().expect("nonempty").memory;
            writeln!(out, "final: {last}").map_err(io)?;
            writeln!(out, "steps: {}", tr.states.len() - 1).map_err(io)
        }
        TraceEnd::Stuck(r) => Err(fail(EXIT_STUCK, format!("stuck: {r}"))),
        TraceEnd::FuelExhausted => Err(Fail(EXIT_STUCK, "FuelExhausted".into())),
    }
}

fn dispatch(cmd: Cmd, out: Out) -> Result<i32, Fail> {
    match cmd {
        Cmd::Fmt(src) => {
            writeln!(out, "{}", print_term(&term_of(&src)?)).map_err(io)?;
        }
        Cmd::Check { src, typing } => {
            let t = term_of(&src)?;
            let (ty, _) = derivation(&t, &typing)?;
            writeln!(out, "ok: {}", print_type(&ty)).map_err(io)?;
        }
        Cmd::Infer { src, sig } => {
            let t = term_of(&src)?;
            let s = infer_with(&signature(&sig)?, &Context::new(), &t).map_err(|e| fail(EXIT_INVALID, e))?;
            writeln!(out, "{s}").map_err(io)?;
        }
        Cmd::Run { src, mem, fuel, trace: true } | Cmd::Trace { src, mem, fuel } => {
            let t = term_of(&src)?;
            show_trace(out, &t, &memory(&mem)?, fuel)?;
        }
        Cmd::Run { src, mem, fuel, .. } => {
            let t = term_of(&src)?;
            match run(&memory(&mem)?, &t, &DeltaRegistry::default(), fuel) {
                Ok(r) => {
                    writeln!(out, "{}", r.memory).map_err(io)?;
                    writeln!(out, "steps: {}", r.steps).map_err(io)?;
                }
                Err(RunError::FuelExhausted { steps, .. }) => {
                    return Err(Fail(EXIT_STUCK, format!("FuelExhausted after {steps} steps")))
                }
                Err(e) => return Err(fail(EXIT_STUCK, e)),
            }
        }
        Cmd::Normalize { src, strategy, fuel, eta } => {
            let t = term_of(&src)?;
            let s = match strategy {
                StrategyArg::Lo => Strategy::LeftmostOutermost,
                StrategyArg::Ri => Strategy::RightmostInnermost,
            };
            match normalize(&t, s, fuel, eta) {
                Ok(n) => {
                    writeln!(out, "{}", print_term(&n.term)).map_err(io)?;
                    writeln!(out, "steps: {}", n.steps).map_err(io)?;
                }
                Err(ReductionError::FuelExhausted { steps, .. }) => {
                    return Err(Fail(EXIT_STUCK, format!("FuelExhausted after {steps} steps")))
                }
                Err(e) => return Err(fail(EXIT_STUCK, e)),
            }
        }
        Cmd::Graph { src, budget, dot, eta } => {
            let t = term_of(&src)?;
            let g = reduction_graph(&t, budget, eta).map_err(|e| fail(EXIT_STUCK, e))?;
            if dot {
                write!(out, "{}", g.to_dot()).map_err(io)?;
            } else {
                writeln!(out, "nodes: {}", g.nodes.len()).map_err(io)?;
                writeln!(out, "edges: {}", g.edges.len()).map_err(io)?;
                for i in g.normal_forms() {
                    writeln!(out, "normal: {}", print_term(&g.nodes[i])).map_err(io)?;
                }
            }
        }
        Cmd::Measure { src, typing, variant } => {
            let t = term_of(&src)?;
            let (_, d) = derivation(&t, &typing)?;
            let m = if variant { measure_variant(&d) } else { measure(&d) };
            writeln!(out, "{m}").map_err(io)?;
        }
        Cmd::Equiv { left, right, ty, budget, seed, fuel } => {
            let parse = |p: &PathBuf| -> Result<Term, Fail> {
                parse_term(&strip_comments(&read_file(p)?)).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", p.display())))
            };
            let (a, b) = (parse(&left)?, parse(&right)?);
            let ty = parse_type(&ty).map_err(|e| fail(EXIT_USAGE, e))?;
            let tb = TestBudget { size: budget, seed, fuel, ..TestBudget::default() };
            let v = machine_equiv(&a, &b, &ty, &tb).map_err(|e| fail(2, e))?;
            writeln!(out, "{v}").map_err(io)?;
            return Ok(match v {
                EquivVerdict::NotDistinguished { .. } => 0,
                EquivVerdict::Distinguished(_) => 1,
            });
        }
        Cmd::ToLambda { src, typing } => {
            let t = term_of(&src)?;
            let (_, d) = derivation(&t, &typing)?;
            let l = fmc_to_lambda(&d).map_err(|e| fail(EXIT_INVALID, e))?;
            writeln!(out, "{}", print_lambda(&l)).map_err(io)?;
        }
        Cmd::FromLambda(src) => {
            let l = parse_lambda(&strip_comments(&read_source(&src)?)).map_err(|e| fail(EXIT_INVALID, e))?;
            let r = lambda_to_fmc(&[], &l).map_err(|e| fail(EXIT_INVALID, e))?;
            writeln!(out, "{}", print_term(&r.term)).map_err(io)?;
            writeln!(out, "type: {}", print_type(&r.ty)).map_err(io)?;
        }
        Cmd::EncodeCbv { src, cells } => {
            let p = parse_cbv(&strip_comments(&read_source(&src)?)).map_err(|e| fail(EXIT_INVALID, e))?;
            let t = match cells {
                None => encode_cbv(&p),
                Some(cs) => {
                    let cs: Vec<&str> = cs.iter().map(String::as_str).collect();
                    encode_cbv_with(&p, Some(&cs)).map_err(|e| fail(EXIT_INVALID, e))?
                }
            };
            writeln!(out, "{}", print_term(&t)).map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}

/// Run one invocation. Results go to `out`, diagnostics to `err`; returns the exit code.
pub fn run_cli<I, S>(argv: I, out: Out, err: Out) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.cmd, out) {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

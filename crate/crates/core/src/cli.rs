//! Command-line interface.
//!
//! Exit status is 0 on a conclusive result, 2 when the analysis is
//! inconclusive (order cap, factoring scope, undecided inclusions) and 1 on
//! errors.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::cone::{analyze, max_order_from_env};
use crate::linkage::{parse_linkage, Linkage};
use crate::poly::Var;
use crate::report::{analyze_report, curve_dump};
use crate::scalar::{parse_rational, q_to_f64};
use crate::tracer::{default_params, trace_branch};
use crate::verify::verify_examples;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "tancone", version, about = "Higher-order mobility analysis of closed-loop linkages")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Computes the tangent cone, motion branches and classification.
    Analyze {
        file: PathBuf,
        /// Highest constraint order (default: TANCONE_MAX_ORDER or 6).
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Also trace every branch numerically.
        #[arg(long)]
        trace: bool,
    },
    /// Checks the bundled six-bar and 7R examples against stored structures.
    VerifyExamples {
        #[arg(long)]
        order: Option<usize>,
    },
    /// Traces one branch and prints `t`, `q(t)` and the residual per point.
    Trace {
        file: PathBuf,
        /// Branch number, 1-based, as listed by `analyze`.
        #[arg(long)]
        branch: usize,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        h: f64,
        /// Parameter values `name=value`; order-1 parameters default to 1, others to 0.
        #[arg(long, num_args = 1..)]
        params: Vec<String>,
        #[arg(long)]
        order: Option<usize>,
    },
}

fn load(path: &PathBuf) -> Result<Linkage, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_linkage(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_param(s: &str) -> Result<(Var, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("parameter {s:?} is not name=value"))?;
    let var: Var = name.trim().parse().map_err(|_| format!("unknown parameter name {name:?}"))?;
    let value = value.trim();
    let v = match parse_rational(value) {
        Ok(q) => q_to_f64(&q),
        Err(_) => value.parse::<f64>().map_err(|_| format!("bad value {value:?} for {name}"))?,
    };
    Ok((var, v))
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, String> {
    let io = |e: std::io::Error| e.to_string();
    match command {
        Command::Analyze { file, order, format, trace } => {
            let linkage = load(&file)?;
            let report = analyze_report(&linkage, order.unwrap_or_else(max_order_from_env), trace).map_err(|e| e.to_string())?;
            let text = match format {
                Format::Json => report.to_json(),
                Format::Text => report.to_text(),
            };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(if report.conclusive() { EXIT_OK } else { EXIT_INCONCLUSIVE })
        }
        Command::VerifyExamples { order } => {
            let summary = verify_examples(order.unwrap_or_else(max_order_from_env));
            writeln!(out, "{summary}").map_err(io)?;
            Ok(if summary.failures.is_empty() { EXIT_OK } else { EXIT_ERROR })
        }
        Command::Trace { file, branch, steps, h, params, order } => {
            let linkage = load(&file)?;
            let analysis = analyze(&linkage, order.unwrap_or_else(max_order_from_env)).map_err(|e| e.to_string())?;
            let branches = &analysis.last().branches;
            if branch == 0 || branch > branches.len() {
                return Err(format!("branch {branch} out of range: the analysis found {} branch(es)", branches.len()));
            }
            let b = &branches[branch - 1];
            let mut values: BTreeMap<Var, f64> = default_params(b);
            for p in &params {
                let (v, x) = parse_param(p)?;
                if !b.params.contains(&v) {
                    let names: Vec<String> = b.params.iter().map(ToString::to_string).collect();
                    return Err(format!("branch {branch} has no parameter {v}; its parameters are {}", names.join(" ")));
                }
                values.insert(v, x);
            }
            let curve = trace_branch(&linkage.local_model(), b, &values, steps, h).map_err(|e| e.to_string())?;
            out.write_all(curve_dump(&linkage, &curve).as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
    }
}

//! The `modlang` command-line interface.
//!
//! Exit status is 0 on success, 1 when evaluation fails and 2 for usage,
//! parse, I/O and module-loading errors.

mod repl;

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use modlang::syntax::{parse_expr, parse_module_file, parse_query, Decl, Expr, ModuleName, Program};
use modlang::{emit, eval, weaken_module, ClauseOrder, EngineConfig, EvalError, EvalOutcome, Failure, ModuleRegistry, WeakenRequest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "modlang", version, about = "Evaluate modlang programs")]
struct Cli {
    /// Directory to search for modules; may be repeated. Searched before
    /// MODLANG_PATH and the current directory.
    #[arg(long = "path", value_name = "DIR", global = true)]
    paths: Vec<PathBuf>,

    /// Print the derivation tree to stderr after a successful evaluation.
    #[arg(long, global = true)]
    trace: bool,

    /// Which clauses backchaining tries first.
    #[arg(long, value_name = "newest|oldest", default_value = "newest", global = true)]
    clause_order: ClauseOrder,

    /// Bound on nested calls.
    #[arg(long, value_name = "N", default_value_t = 10_000, global = true,
          value_parser = clap::value_parser!(u64).range(1..))]
    max_depth: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a module file and evaluate an expression against it.
    Run {
        file: PathBuf,
        /// Expression to evaluate.
        #[arg(short, long = "expr", value_name = "EXPR", default_value = "main()")]
        expr: String,
    },
    /// Evaluate an expression, optionally against a module.
    Eval {
        #[arg(short, long, value_name = "MODULE")]
        module: Option<String>,
        expr: String,
    },
    /// Interactive session.
    Repl,
    /// Write a module holding only the facts produced by the given queries.
    Weaken {
        #[arg(short, long = "query", value_name = "QUERY", required = true)]
        queries: Vec<String>,
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
    },
}

/// Error reported on stderr together with its exit status.
struct Exit {
    code: i32,
    message: String,
}

impl Exit {
    fn usage(message: impl Into<String>) -> Self {
        Exit {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

fn eval_error(e: &EvalError) -> Exit {
    Exit {
        code: if e.is_registry_error() { EXIT_USAGE } else { EXIT_FAILURE },
        message: format!("{e} [{}]", e.rule_context()),
    }
}

fn failure(f: &Failure) -> Exit {
    match f {
        Failure::Error(e) => eval_error(e),
        Failure::NoDerivation { .. } => Exit {
            code: EXIT_FAILURE,
            message: f.to_string(),
        },
    }
}

struct Context {
    cfg: EngineConfig,
    registry: ModuleRegistry,
}

impl Context {
    fn new(cli: &Cli, extra: Option<&Path>) -> Self {
        let mut dirs = cli.paths.clone();
        dirs.extend(extra.map(Path::to_path_buf));
        Context {
            cfg: EngineConfig {
                max_depth: cli.max_depth as usize,
                clause_order: cli.clause_order,
                trace: cli.trace,
                ..EngineConfig::default()
            },
            registry: ModuleRegistry::from_env(&dirs),
        }
    }

    /// Evaluate and report: the value on stdout, the trace or diagnostic on
    /// stderr.
    fn evaluate(&self, program: &Program, e: &Expr, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Exit> {
        match eval(&self.cfg, &self.registry, program, e) {
            EvalOutcome::Success { value, trace } => {
                let _ = writeln!(out, "{value}");
                if let Some(t) = trace {
                    let _ = write!(err, "{}", t.render());
                }
                Ok(())
            }
            EvalOutcome::Failure(f) => Err(failure(&f)),
        }
    }
}

fn parse_module_name(s: &str) -> Result<ModuleName, Exit> {
    s.parse().map_err(|e| Exit::usage(format!("{e}")))
}

fn run_file(ctx: &Context, file: &Path, expr: &str, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Exit> {
    let text = fs::read_to_string(file).map_err(|e| Exit::usage(format!("{}: {e}", file.display())))?;
    let (_, program) = parse_module_file(&text).map_err(|e| Exit::usage(format!("{}:{e}", file.display())))?;
    let e = parse_expr(expr).map_err(|e| Exit::usage(format!("expression:{e}")))?;
    ctx.evaluate(&program, &e, out, err)
}

fn run_eval(ctx: &Context, module: Option<&str>, expr: &str, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Exit> {
    let program = match module {
        Some(m) => Program::new(vec![Decl::Import(parse_module_name(m)?)]),
        None => Program::default(),
    };
    let e = parse_expr(expr).map_err(|e| Exit::usage(format!("expression:{e}")))?;
    ctx.evaluate(&program, &e, out, err)
}

fn run_weaken(ctx: &Context, queries: &[String], output: &Path, out: &mut dyn Write) -> Result<(), Exit> {
    let queries = queries
        .iter()
        .map(|q| parse_query(q).map_err(|e| Exit::usage(format!("query `{q}`:{e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let stem = output
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Exit::usage(format!("{}: cannot name a module after this file", output.display())))?;
    let name = parse_module_name(stem)?;
    let request = WeakenRequest { queries, output: name };
    let rm = weaken_module(&request, &ctx.registry, &ctx.cfg).map_err(|e| eval_error(&e))?;
    fs::write(output, emit(&rm)).map_err(|e| Exit::usage(format!("{}: {e}", output.display())))?;
    let n = rm.facts.len();
    let _ = writeln!(out, "wrote {n} fact{} to {}", if n == 1 { "" } else { "s" }, output.display());
    Ok(())
}

/// Run the CLI with the given arguments (including the program name).
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, input, out, err, false)
}

/// As [`run`]; `interactive` makes the REPL print prompts.
pub fn run_with<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write, interactive: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                EXIT_USAGE
            } else {
                let _ = write!(out, "{}", e.render());
                EXIT_OK
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run { file, expr } => {
            let dir = file.parent().filter(|d| !d.as_os_str().is_empty());
            run_file(&Context::new(&cli, dir), file, expr, out, err)
        }
        Command::Eval { module, expr } => run_eval(&Context::new(&cli, None), module.as_deref(), expr, out, err),
        Command::Weaken { queries, output } => run_weaken(&Context::new(&cli, None), queries, output, out),
        Command::Repl => {
            repl::Session::new(Context::new(&cli, None), interactive).run(input, out, err);
            Ok(())
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Exit { code, message }) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

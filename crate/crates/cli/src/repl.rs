use std::io::{BufRead, Write};

use modlang::syntax::{parse_decl, parse_expr, Expr, Program};
use modlang::{eval, EvalOutcome, Failure};

use super::{failure, Context};

const HELP: &str = "\
declarations end with `.` and are added to the session program
any other line is evaluated
:trace on|off   show derivation trees
:program        print the session program
:quit           leave
";

pub(crate) struct Session {
    ctx: Context,
    program: Program,
    prompt: bool,
}

impl Session {
    pub(crate) fn new(ctx: Context, prompt: bool) -> Self {
        Session {
            ctx,
            program: Program::default(),
            prompt,
        }
    }

    pub(crate) fn run(&mut self, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) {
        let mut line = String::new();
        loop {
            if self.prompt {
                let _ = write!(out, "> ");
                let _ = out.flush();
            }
            line.clear();
            match input.read_line(&mut line) {
                Ok(0) => break,
                Ok(_) => {}
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    break;
                }
            }
            if !self.line(line.trim(), out, err) {
                break;
            }
        }
    }

    /// Handle one line; false ends the session.
    fn line(&mut self, line: &str, out: &mut dyn Write, err: &mut dyn Write) -> bool {
        if line.is_empty() || line.starts_with('%') {
            return true;
        }
        if let Some(cmd) = line.strip_prefix(':') {
            return self.command(cmd.trim(), out, err);
        }
        if line.ends_with('.') {
            self.declare(line, err);
        } else {
            match parse_expr(line) {
                Ok(e) => {
                    if let Err(exit) = self.ctx.evaluate(&self.program, &e, out, err) {
                        let _ = writeln!(err, "error: {}", exit.message);
                    }
                }
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                }
            }
        }
        true
    }

    fn declare(&mut self, line: &str, err: &mut dyn Write) {
        let decl = match parse_decl(line) {
            Ok(d) => d,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return;
            }
        };
        let mut candidate = self.program.clone();
        candidate.decls.push(decl);
        // Expanding the program resolves imports and answers queries now
        // rather than at the next evaluation.
        let cfg = self.ctx.cfg.clone().with_trace(false);
        match eval(&cfg, &self.ctx.registry, &candidate, &Expr::Top) {
            EvalOutcome::Failure(f @ Failure::Error(_)) => {
                let _ = writeln!(err, "error: {}", failure(&f).message);
            }
            _ => self.program = candidate,
        }
    }

    fn command(&mut self, cmd: &str, out: &mut dyn Write, err: &mut dyn Write) -> bool {
        match cmd.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["quit"] | ["q"] => return false,
            ["trace", "on"] => self.ctx.cfg.trace = true,
            ["trace", "off"] => self.ctx.cfg.trace = false,
            ["program"] => {
                let _ = write!(out, "{}", self.program);
            }
            ["help"] => {
                let _ = write!(out, "{HELP}");
            }
            _ => {
                let _ = writeln!(err, "error: unknown command `:{cmd}` (try :help)");
            }
        }
        true
    }
}

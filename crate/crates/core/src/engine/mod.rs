//! Evaluation of expressions against programs.
//!
//! The evaluation phase (`eval`) and the backchaining phase (`backchain`)
//! alternate: a call first has its arguments evaluated eagerly, then the
//! program is searched for a clause whose head matches; the clause body is
//! evaluated with the head's variables substituted.
//!
//! Clause search is deterministic. Under [`ClauseOrder::NewestFirst`] (the
//! default) the flattened program is scanned from its end, so declarations
//! added by an enclosing `D -o E` shadow the outer program and later clauses
//! of a module are tried before earlier ones. [`ClauseOrder::OldestFirst`]
//! scans in textual order. In both cases a clause whose body has no
//! derivation is abandoned and the search continues with the next clause;
//! errors such as a type error or an exceeded depth bound abort evaluation.

mod builtins;
mod machine;
mod matching;
mod trace;

use std::fmt;
use std::str::FromStr;

pub use builtins::{builtin, is_builtin, BUILTINS};
pub use matching::{match_head, substitute, substitute_decls, Bindings};
pub use trace::{DerivationTrace, Rule};

pub(crate) use machine::Machine;
use machine::Env;

use crate::error::EvalError;
use crate::registry::ModuleRegistry;
use crate::syntax::{Decl, Expr, Program, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClauseOrder {
    #[default]
    NewestFirst,
    OldestFirst,
}

impl FromStr for ClauseOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "newest" => Ok(ClauseOrder::NewestFirst),
            "oldest" => Ok(ClauseOrder::OldestFirst),
            other => Err(format!("unknown clause order `{other}` (expected newest or oldest)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    /// Bound on nested calls along one derivation path.
    pub max_depth: usize,
    pub clause_order: ClauseOrder,
    pub trace: bool,
    /// Bound on nested module queries and module expansions.
    pub query_hops: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_depth: 10_000,
            clause_order: ClauseOrder::NewestFirst,
            trace: false,
            query_hops: 64,
        }
    }
}

impl EngineConfig {
    pub fn with_trace(mut self, trace: bool) -> Self {
        self.trace = trace;
        self
    }

    pub fn with_order(mut self, order: ClauseOrder) -> Self {
        self.clause_order = order;
        self
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Self {
        assert!(max_depth >= 1, "max_depth must be at least 1");
        self.max_depth = max_depth;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    /// No derivation exists. `context` describes the last call that no
    /// clause could match, when there was one.
    NoDerivation { context: Option<String> },
    Error(EvalError),
}

impl Failure {
    pub fn is_no_derivation(&self) -> bool {
        matches!(self, Failure::NoDerivation { .. })
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::NoDerivation { context: Some(c) } => {
                write!(f, "no derivation [rule 7: {c}]")
            }
            Failure::NoDerivation { context: None } => f.write_str("no derivation"),
            Failure::Error(e) => write!(f, "{e} [{}]", e.rule_context()),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        Failure::Error(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalOutcome {
    Success {
        value: Value,
        trace: Option<DerivationTrace>,
    },
    Failure(Failure),
}

impl EvalOutcome {
    pub fn value(&self) -> Option<&Value> {
        match self {
            EvalOutcome::Success { value, .. } => Some(value),
            EvalOutcome::Failure(_) => None,
        }
    }

    pub fn trace(&self) -> Option<&DerivationTrace> {
        match self {
            EvalOutcome::Success { trace, .. } => trace.as_ref(),
            EvalOutcome::Failure(_) => None,
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, EvalOutcome::Success { .. })
    }

    pub fn into_result(self) -> Result<Value, Failure> {
        match self {
            EvalOutcome::Success { value, .. } => Ok(value),
            EvalOutcome::Failure(f) => Err(f),
        }
    }
}

fn outcome(machine: &Machine<'_>, result: Result<Option<(Value, Option<DerivationTrace>)>, EvalError>) -> EvalOutcome {
    match result {
        Ok(Some((value, trace))) => EvalOutcome::Success { value, trace },
        Ok(None) => EvalOutcome::Failure(Failure::NoDerivation {
            context: machine.last_failure(),
        }),
        Err(e) => EvalOutcome::Failure(Failure::Error(e)),
    }
}

/// Evaluate `e` against `program`.
///
/// Imports in `program` are spliced and its queries instantiated before
/// evaluation starts.
pub fn eval(cfg: &EngineConfig, registry: &ModuleRegistry, program: &Program, e: &Expr) -> EvalOutcome {
    let machine = Machine::new(cfg, registry);
    let result = machine
        .expand(&program.decls, 0)
        .and_then(|clauses| machine.first(&Env::root(clauses.into()), e, 0));
    outcome(&machine, result)
}

/// Resolve the ground call `function(args)` by searching `clauses` and
/// evaluating the selected body against `program`.
pub fn backchain(
    cfg: &EngineConfig,
    registry: &ModuleRegistry,
    clauses: &Program,
    program: &Program,
    function: &str,
    args: &[Value],
) -> EvalOutcome {
    let machine = Machine::new(cfg, registry);
    let result = (|| {
        let clause_env = Env::root(machine.expand(&clauses.decls, 0)?.into());
        let program_env = Env::root(machine.expand(&program.decls, 0)?.into());
        let mut found = None;
        machine.backchain(&clause_env, &program_env, function, args, 0, &mut |v, t| {
            found = Some((v, t));
            Ok(machine::Flow::Done)
        })?;
        Ok(found)
    })();
    outcome(&machine, result)
}

/// Evaluate `decls -o body` against `program`.
pub fn eval_di(
    cfg: &EngineConfig,
    registry: &ModuleRegistry,
    program: &Program,
    decls: &[Decl],
    body: &Expr,
) -> EvalOutcome {
    if decls.is_empty() {
        return eval(cfg, registry, program, body);
    }
    let e = Expr::Di(Program::new(decls.to_vec()), Box::new(body.clone()));
    eval(cfg, registry, program, &e)
}

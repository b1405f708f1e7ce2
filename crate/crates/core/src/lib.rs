//! An eager first-order functional language with local declarations
//! (`D -o E`), module imports (`/m`) and module queries
//! (`(f(args)=v)^/m`), plus module weakening: replacing an import by the
//! handful of facts a program actually needs.
//!
//! ```
//! use modlang::{eval, parse_expr, parse_program, EngineConfig, ModuleName, ModuleRegistry, Program, Value};
//!
//! let mf = parse_program("fib(1) = 1. fib(2) = 1. fib(n+2) = fib(n) + fib(n+1).").unwrap();
//! let registry = ModuleRegistry::default().with_module(ModuleName::new("mf").unwrap(), mf);
//! let e = parse_expr("/mf -o fib(10)").unwrap();
//! let outcome = eval(&EngineConfig::default(), &registry, &Program::default(), &e);
//! assert_eq!(outcome.value(), Some(&Value::int(55)));
//! ```

pub mod engine;
pub mod error;
pub mod registry;
pub mod syntax;
pub mod weaken;

pub use engine::{
    backchain, eval, eval_di, ClauseOrder, DerivationTrace, EngineConfig, EvalOutcome, Failure, Rule,
};
pub use error::{EvalError, ParseError, RegistryError};
pub use registry::ModuleRegistry;
pub use syntax::{
    parse_decl, parse_expr, parse_module_file, parse_program, parse_query, Decl, Expr, FunDef,
    HeadPattern, ModuleName, PatternTerm, Program, Query, Value,
};
pub use weaken::{emit, preprocess, weaken_module, ResidualModule, WeakenRequest};

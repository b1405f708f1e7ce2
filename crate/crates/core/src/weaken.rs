//! Module weakening: replace module queries by the facts they produce.
//!
//! [`preprocess`] instantiates every query of a program in place. A
//! [`ResidualModule`] packages the instantiated facts of a list of queries so
//! that importing it is equivalent to issuing the queries.

use std::fmt::Write;

use crate::engine::{substitute_decls, Bindings, EngineConfig, Machine};
use crate::error::EvalError;
use crate::registry::ModuleRegistry;
use crate::syntax::{Decl, FunDef, ModuleName, Program, Query};

/// Replace each query `(f(args)=v)^/m` by the fact `f(args) = w`, where `w`
/// is the value of `f(args)` in module `m`, and substitute `w` for `v` in
/// the declarations that follow. Imports and definitions are untouched.
pub fn preprocess(cfg: &EngineConfig, registry: &ModuleRegistry, program: &Program) -> Result<Program, EvalError> {
    let machine = Machine::new(cfg, registry);
    Ok(Program::new(instantiate_all(&machine, &program.decls)?.0))
}

/// Returns the rewritten declarations and, for each query, the index of the
/// fact that replaced it.
fn instantiate_all(machine: &Machine<'_>, decls: &[Decl]) -> Result<(Vec<Decl>, Vec<usize>), EvalError> {
    let mut rest = decls.to_vec();
    let mut facts = Vec::new();
    for i in 0..rest.len() {
        let Decl::Query(q) = &rest[i] else { continue };
        let q = q.clone();
        let w = machine.instantiate(&q, 0)?;
        let args = q.head.ground_args().expect("instantiate checked groundness");
        rest[i] = Decl::FunDef(FunDef::fact(&q.head.function, &args, w.clone()));
        facts.push(i);
        let b = Bindings::from([(q.result_var.clone(), w)]);
        let (tail, _) = substitute_decls(&b, &rest[i + 1..]);
        rest.truncate(i + 1);
        rest.extend(tail);
    }
    Ok((rest, facts))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakenRequest {
    pub queries: Vec<Query>,
    pub output: ModuleName,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub module: ModuleName,
    /// The query as originally written, before earlier results were
    /// substituted into it.
    pub query: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualModule {
    pub name: ModuleName,
    pub facts: Vec<FunDef>,
    pub provenance: Vec<Provenance>,
}

impl ResidualModule {
    pub fn program(&self) -> Program {
        self.facts.iter().cloned().map(Decl::FunDef).collect()
    }
}

pub fn weaken_module(
    request: &WeakenRequest,
    registry: &ModuleRegistry,
    cfg: &EngineConfig,
) -> Result<ResidualModule, EvalError> {
    let machine = Machine::new(cfg, registry);
    let decls: Vec<Decl> = request.queries.iter().cloned().map(Decl::Query).collect();
    let (instantiated, _) = instantiate_all(&machine, &decls)?;
    let facts = instantiated
        .into_iter()
        .map(|d| match d {
            Decl::FunDef(f) => f,
            other => unreachable!("queries only instantiate to facts, got {other:?}"),
        })
        .collect();
    let provenance = request
        .queries
        .iter()
        .map(|q| Provenance {
            module: q.module.clone(),
            query: q.to_string(),
        })
        .collect();
    Ok(ResidualModule {
        name: request.output.clone(),
        facts,
        provenance,
    })
}

/// Render a residual module as a `.mod` file, with each fact preceded by a
/// comment naming the query it came from.
pub fn emit(rm: &ResidualModule) -> String {
    let mut out = format!("/{} =\n", rm.name);
    for (i, fact) in rm.facts.iter().enumerate() {
        if let Some(p) = rm.provenance.get(i) {
            let _ = writeln!(out, "% from /{}: {}", p.module, p.query);
        }
        let _ = writeln!(out, "{fact}");
    }
    out
}

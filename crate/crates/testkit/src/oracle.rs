//! Brute-force reference semantics.
//!
//! Enumerates every derivation of an expression, in the order a depth-first
//! search over clauses and argument values would find them, up to the first
//! error. The engine's answer must be the head of that sequence.
//!
//! This evaluator is written independently of the engine: variables live in
//! an environment instead of being substituted, local definitions are
//! closures over that environment, programs are flat clause vectors, and
//! results are materialised as vectors rather than streamed through
//! continuations. Builtins and head matching are reimplemented here.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::rc::Rc;

use modlang::syntax::{Decl, Expr, HeadPattern, ModuleName, PatternTerm, Value};
use modlang::{ClauseOrder, EvalError, EvalOutcome, Failure, ModuleRegistry};
use num_bigint::BigInt;
use num_integer::Integer;

/// Error classes compared between engine and oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    Depth,
    Unbound,
    Type,
    DivZero,
    NonGround,
    QueryCycle,
    QueryHops,
    QueryFailed,
    Registry,
}

impl From<&EvalError> for ErrorKind {
    fn from(e: &EvalError) -> Self {
        match e {
            EvalError::DepthExceeded { .. } => ErrorKind::Depth,
            EvalError::UnboundVariable(_) => ErrorKind::Unbound,
            EvalError::TypeError { .. } => ErrorKind::Type,
            EvalError::DivisionByZero { .. } => ErrorKind::DivZero,
            EvalError::MqNonGround { .. } => ErrorKind::NonGround,
            EvalError::QueryCycle { .. } => ErrorKind::QueryCycle,
            EvalError::QueryDepthExceeded { .. } => ErrorKind::QueryHops,
            EvalError::QueryFailed { .. } => ErrorKind::QueryFailed,
            EvalError::Registry(_) => ErrorKind::Registry,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Value(Value),
    NoDerivation,
    Error(ErrorKind),
}

impl From<&EvalOutcome> for Outcome {
    fn from(o: &EvalOutcome) -> Self {
        match o {
            EvalOutcome::Success { value, .. } => Outcome::Value(value.clone()),
            EvalOutcome::Failure(Failure::NoDerivation { .. }) => Outcome::NoDerivation,
            EvalOutcome::Failure(Failure::Error(e)) => Outcome::Error(e.into()),
        }
    }
}

/// The work budget ran out before the enumeration finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exhausted;

type Scope = Rc<HashMap<String, Value>>;

#[derive(Debug)]
struct Clause {
    head: HeadPattern,
    body: Expr,
    scope: Scope,
}

type Clauses = Vec<Rc<Clause>>;

/// All derivations found, in search order, possibly cut short by an error.
#[derive(Debug, Default)]
pub struct Derivations {
    pub values: Vec<Value>,
    pub error: Option<ErrorKind>,
}

impl Derivations {
    fn fail(kind: ErrorKind) -> Self {
        Derivations {
            values: vec![],
            error: Some(kind),
        }
    }

    fn one(v: Value) -> Self {
        Derivations {
            values: vec![v],
            error: None,
        }
    }

    /// Append `other`; returns true when the search must stop.
    fn absorb(&mut self, other: Derivations) -> bool {
        self.values.extend(other.values);
        self.error = other.error;
        self.error.is_some()
    }

    pub fn head(&self) -> Outcome {
        match (self.values.first(), self.error) {
            (Some(v), _) => Outcome::Value(v.clone()),
            (None, Some(e)) => Outcome::Error(e),
            (None, None) => Outcome::NoDerivation,
        }
    }
}

type R<T> = Result<T, Exhausted>;

pub struct Oracle<'r> {
    registry: &'r ModuleRegistry,
    order: ClauseOrder,
    max_depth: usize,
    query_hops: usize,
    budget: Cell<u64>,
    modules: RefCell<HashMap<ModuleName, Result<Clauses, ErrorKind>>>,
    expanding: RefCell<Vec<ModuleName>>,
    active: RefCell<Vec<String>>,
}

impl<'r> Oracle<'r> {
    pub fn new(registry: &'r ModuleRegistry, order: ClauseOrder, max_depth: usize, budget: u64) -> Self {
        Oracle {
            registry,
            order,
            max_depth,
            query_hops: 64,
            budget: Cell::new(budget),
            modules: RefCell::default(),
            expanding: RefCell::default(),
            active: RefCell::default(),
        }
    }

    fn tick(&self) -> R<()> {
        let left = self.budget.get();
        if left == 0 {
            return Err(Exhausted);
        }
        self.budget.set(left - 1);
        Ok(())
    }

    /// Evaluate `e` against `program`, returning the first outcome of the
    /// full derivation search.
    pub fn run(&self, program: &[Decl], e: &Expr) -> R<Outcome> {
        Ok(self.derivations(program, e)?.head())
    }

    pub fn derivations(&self, program: &[Decl], e: &Expr) -> R<Derivations> {
        let clauses = match self.top_level(program)? {
            Ok(c) => c,
            Err(kind) => return Ok(Derivations::fail(kind)),
        };
        self.eval(&clauses, e, &Scope::default(), 0)
    }

    /// Splice imports and instantiate queries of a top-level declaration list.
    fn top_level(&self, decls: &[Decl]) -> R<Result<Clauses, ErrorKind>> {
        let mut out = Clauses::new();
        let mut scope = Scope::default();
        for d in decls {
            match d {
                Decl::Import(m) => match self.module(m, false)? {
                    Ok(c) => out.extend(c),
                    Err(k) => return Ok(Err(k)),
                },
                Decl::FunDef(def) => out.push(Rc::new(Clause {
                    head: def.head.clone(),
                    body: def.body.clone(),
                    scope: scope.clone(),
                })),
                Decl::Query(q) => {
                    let args = match self.query_args(&q.head, &scope) {
                        Ok(a) => a,
                        Err(k) => return Ok(Err(k)),
                    };
                    match self.query(&q.module, &q.head.function, &args, 0)? {
                        Ok(Some(w)) => {
                            out.push(fact(&q.head.function, &args, w.clone()));
                            let mut s = (*scope).clone();
                            s.insert(q.result_var.clone(), w);
                            scope = Rc::new(s);
                        }
                        Ok(None) => return Ok(Err(ErrorKind::QueryFailed)),
                        Err(k) => return Ok(Err(k)),
                    }
                }
            }
        }
        Ok(Ok(out))
    }

    fn module(&self, m: &ModuleName, via_query: bool) -> R<Result<Clauses, ErrorKind>> {
        if let Some(Ok(c)) = self.modules.borrow().get(m) {
            return Ok(Ok(c.clone()));
        }
        {
            let expanding = self.expanding.borrow();
            if expanding.contains(m) {
                return Ok(Err(if via_query { ErrorKind::QueryCycle } else { ErrorKind::Registry }));
            }
            if expanding.len() >= self.query_hops {
                return Ok(Err(ErrorKind::QueryHops));
            }
        }
        let Ok(raw) = self.registry.resolve(m) else {
            return Ok(Err(ErrorKind::Registry));
        };
        self.expanding.borrow_mut().push(m.clone());
        let r = self.top_level(&raw.decls);
        self.expanding.borrow_mut().pop();
        let r = r?;
        if let Ok(c) = &r {
            self.modules.borrow_mut().insert(m.clone(), Ok(c.clone()));
        }
        Ok(r)
    }

    fn query_args(&self, head: &HeadPattern, scope: &Scope) -> Result<Vec<Value>, ErrorKind> {
        head.params
            .iter()
            .map(|p| match p {
                PatternTerm::Const(c) => Ok(c.clone()),
                PatternTerm::Var(x) => scope.get(x).cloned().ok_or(ErrorKind::NonGround),
                PatternTerm::Succ(..) => Err(ErrorKind::NonGround),
            })
            .collect()
    }

    /// First value of `f(args)` in module `m`.
    fn query(&self, m: &ModuleName, f: &str, args: &[Value], depth: usize) -> R<Result<Option<Value>, ErrorKind>> {
        let key = format!("{m}:{f}:{args:?}");
        {
            let active = self.active.borrow();
            if active.contains(&key) {
                return Ok(Err(ErrorKind::QueryCycle));
            }
            if active.len() >= self.query_hops {
                return Ok(Err(ErrorKind::QueryHops));
            }
        }
        let clauses = match self.module(m, true)? {
            Ok(c) => c,
            Err(k) => return Ok(Err(k)),
        };
        self.active.borrow_mut().push(key);
        let call = Expr::Call(f.to_string(), args.iter().cloned().map(Expr::Const).collect());
        let r = self.eval(&clauses, &call, &Scope::default(), depth);
        self.active.borrow_mut().pop();
        Ok(match r?.head() {
            Outcome::Value(v) => Ok(Some(v)),
            Outcome::NoDerivation => Ok(None),
            Outcome::Error(k) => Err(k),
        })
    }

    fn eval(&self, program: &Clauses, e: &Expr, scope: &Scope, depth: usize) -> R<Derivations> {
        self.tick()?;
        Ok(match e {
            Expr::Top => Derivations::one(Value::top()),
            Expr::Const(c) => Derivations::one(c.clone()),
            Expr::Var(x) => match scope.get(x) {
                Some(v) => Derivations::one(v.clone()),
                None => Derivations::fail(ErrorKind::Unbound),
            },
            Expr::Call(h, args) => {
                let mut out = Derivations::default();
                let mut vals = Vec::new();
                self.args(program, h, args, scope, depth, &mut vals, &mut out)?;
                out
            }
            Expr::Di(decls, body) => self.di(program, &decls.decls, body, scope, depth)?,
        })
    }

    /// Every combination of argument values, leftmost argument varying
    /// slowest. Returns true once an error has been recorded.
    #[allow(clippy::too_many_arguments)]
    fn args(
        &self,
        program: &Clauses,
        h: &str,
        args: &[Expr],
        scope: &Scope,
        depth: usize,
        vals: &mut Vec<Value>,
        out: &mut Derivations,
    ) -> R<bool> {
        if vals.len() == args.len() {
            let d = self.dispatch(program, h, vals, depth)?;
            return Ok(out.absorb(d));
        }
        let first = self.eval(program, &args[vals.len()], scope, depth)?;
        for v in first.values {
            vals.push(v);
            let stop = self.args(program, h, args, scope, depth, vals, out)?;
            vals.pop();
            if stop {
                return Ok(true);
            }
        }
        if let Some(k) = first.error {
            out.error = Some(k);
            return Ok(true);
        }
        Ok(false)
    }

    fn dispatch(&self, program: &Clauses, h: &str, args: &[Value], depth: usize) -> R<Derivations> {
        let depth = depth + 1;
        if depth > self.max_depth {
            return Ok(Derivations::fail(ErrorKind::Depth));
        }
        let order: Box<dyn Iterator<Item = &Rc<Clause>>> = match self.order {
            ClauseOrder::NewestFirst => Box::new(program.iter().rev()),
            ClauseOrder::OldestFirst => Box::new(program.iter()),
        };
        let mut out = Derivations::default();
        let mut matched = false;
        for clause in order {
            let Some(bound) = bind(&clause.head, h, args) else { continue };
            matched = true;
            let mut scope = (*clause.scope).clone();
            scope.extend(bound);
            let d = self.eval(program, &clause.body, &Rc::new(scope), depth)?;
            if out.absorb(d) {
                return Ok(out);
            }
        }
        if !matched {
            if let Some(r) = primitive(h, args) {
                return Ok(match r {
                    Ok(v) => Derivations::one(v),
                    Err(k) => Derivations::fail(k),
                });
            }
        }
        Ok(out)
    }

    fn di(&self, program: &Clauses, decls: &[Decl], body: &Expr, scope: &Scope, depth: usize) -> R<Derivations> {
        let mut extended = program.clone();
        let mut scope = scope.clone();
        for d in decls {
            match d {
                Decl::Import(m) => match self.module(m, false)? {
                    Ok(c) => extended.extend(c),
                    Err(k) => return Ok(Derivations::fail(k)),
                },
                Decl::FunDef(def) => extended.push(Rc::new(Clause {
                    head: def.head.clone(),
                    body: def.body.clone(),
                    scope: scope.clone(),
                })),
                Decl::Query(q) => {
                    let args = match self.query_args(&q.head, &scope) {
                        Ok(a) => a,
                        Err(k) => return Ok(Derivations::fail(k)),
                    };
                    match self.query(&q.module, &q.head.function, &args, depth)? {
                        Ok(Some(w)) => {
                            extended.push(fact(&q.head.function, &args, w.clone()));
                            let mut s = (*scope).clone();
                            s.insert(q.result_var.clone(), w);
                            scope = Rc::new(s);
                        }
                        Ok(None) => return Ok(Derivations::default()),
                        Err(k) => return Ok(Derivations::fail(k)),
                    }
                }
            }
        }
        self.eval(&extended, body, &scope, depth)
    }
}

fn fact(f: &str, args: &[Value], w: Value) -> Rc<Clause> {
    Rc::new(Clause {
        head: HeadPattern::ground(f, args),
        body: Expr::Const(w),
        scope: Scope::default(),
    })
}

fn bind(head: &HeadPattern, h: &str, args: &[Value]) -> Option<Vec<(String, Value)>> {
    if head.function != h || head.params.len() != args.len() {
        return None;
    }
    let mut out = Vec::new();
    for (p, a) in head.params.iter().zip(args) {
        match (p, a) {
            (PatternTerm::Const(c), a) if c == a => {}
            (PatternTerm::Var(x), a) => out.push((x.clone(), a.clone())),
            (PatternTerm::Succ(x, k), Value::Int(n)) if *n >= BigInt::from(*k) => {
                out.push((x.clone(), Value::Int(n - BigInt::from(*k))))
            }
            _ => return None,
        }
    }
    Some(out)
}

fn primitive(h: &str, args: &[Value]) -> Option<Result<Value, ErrorKind>> {
    let [a, b] = args else { return None };
    if !["+", "-", "*", "<", "<=", "==", "mod", "div"].contains(&h) {
        return None;
    }
    Some(match (h, a, b) {
        ("==", Value::Int(x), Value::Int(y)) => Ok(Value::Bool(x == y)),
        ("==", Value::Bool(x), Value::Bool(y)) => Ok(Value::Bool(x == y)),
        ("==", Value::Sym(x), Value::Sym(y)) => Ok(Value::Bool(x == y)),
        (_, Value::Int(x), Value::Int(y)) => match h {
            "+" => Ok(Value::Int(x + y)),
            "-" => Ok(Value::Int(x - y)),
            "*" => Ok(Value::Int(x * y)),
            "<" => Ok(Value::Bool(x < y)),
            "<=" => Ok(Value::Bool(x <= y)),
            _ if *y == BigInt::from(0) => Err(ErrorKind::DivZero),
            "mod" => Ok(Value::Int(x.mod_floor(y))),
            _ => Ok(Value::Int(x.div_floor(y))),
        },
        _ => Err(ErrorKind::Type),
    })
}

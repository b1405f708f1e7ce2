//! The evaluation machine.
//!
//! Evaluation is a depth-first search over derivations written in
//! continuation-passing style: every successful derivation of a
//! subexpression is handed to a continuation, which either accepts it
//! (`Flow::Done`) or rejects it (`Flow::More`), in which case the search
//! resumes with the next alternative. This gives full backtracking through
//! clause selection and through argument evaluation. Hard errors abort the
//! whole search.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use super::builtins::builtin;
use super::matching::{match_head, substitute, substitute_decls, Bindings};
use super::trace::{DerivationTrace, Rule};
use super::{ClauseOrder, EngineConfig};
use crate::error::{EvalError, RegistryError};
use crate::registry::ModuleRegistry;
use crate::syntax::{Decl, Expr, FunDef, ModuleName, Query, Value};

const RED_ZONE: usize = 128 * 1024;
const STACK_CHUNK: usize = 4 * 1024 * 1024;

pub(crate) enum Flow {
    /// Keep searching for further derivations.
    More,
    /// A derivation was accepted; stop.
    Done,
}

pub(crate) type Step = Result<Flow, EvalError>;
type Trace = Option<DerivationTrace>;
type Cont<'k> = dyn FnMut(Value, Trace) -> Step + 'k;

/// A program as a chain of clause segments. Extending with local
/// declarations pushes a segment; nothing is ever copied or mutated.
#[derive(Clone, Default)]
pub(crate) struct Env(Option<Rc<Frame>>);

struct Frame {
    clauses: Arc<[FunDef]>,
    parent: Env,
    len: usize,
}

impl Env {
    pub(crate) fn root(clauses: Arc<[FunDef]>) -> Env {
        Env::default().extend(clauses)
    }

    pub(crate) fn extend(&self, clauses: Arc<[FunDef]>) -> Env {
        if clauses.is_empty() {
            return self.clone();
        }
        let len = self.len() + clauses.len();
        Env(Some(Rc::new(Frame {
            clauses,
            parent: self.clone(),
            len,
        })))
    }

    pub(crate) fn len(&self) -> usize {
        self.0.as_ref().map_or(0, |f| f.len)
    }

    /// Clauses in search order, paired with their 1-based position in the
    /// flattened program.
    fn ordered(&self, order: ClauseOrder) -> Vec<(usize, &FunDef)> {
        let mut frames = Vec::new();
        let mut cur = self;
        while let Some(frame) = &cur.0 {
            frames.push(frame.as_ref());
            cur = &frame.parent;
        }
        let mut out = Vec::with_capacity(self.len());
        match order {
            ClauseOrder::NewestFirst => {
                for frame in frames {
                    let base = frame.parent.len();
                    out.extend(frame.clauses.iter().enumerate().rev().map(|(i, c)| (base + i + 1, c)));
                }
            }
            ClauseOrder::OldestFirst => {
                for frame in frames.into_iter().rev() {
                    let base = frame.parent.len();
                    out.extend(frame.clauses.iter().enumerate().map(|(i, c)| (base + i + 1, c)));
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Via {
    Import,
    Query,
}

pub(crate) struct Machine<'a> {
    cfg: &'a EngineConfig,
    registry: &'a ModuleRegistry,
    /// Fully expanded clauses of each module seen so far.
    modules: RefCell<HashMap<ModuleName, Arc<[FunDef]>>>,
    /// Modules currently being expanded, outermost first.
    expanding: RefCell<Vec<ModuleName>>,
    /// Module queries currently being answered.
    queries: RefCell<Vec<String>>,
    last_failure: RefCell<Option<String>>,
}

fn call_text(function: &str, args: &[Value]) -> String {
    Expr::Call(function.to_string(), args.iter().cloned().map(Expr::Const).collect()).to_string()
}

impl<'a> Machine<'a> {
    pub(crate) fn new(cfg: &'a EngineConfig, registry: &'a ModuleRegistry) -> Self {
        Machine {
            cfg,
            registry,
            modules: RefCell::default(),
            expanding: RefCell::default(),
            queries: RefCell::default(),
            last_failure: RefCell::default(),
        }
    }

    pub(crate) fn last_failure(&self) -> Option<String> {
        self.last_failure.borrow().clone()
    }

    fn note_failure(&self, what: String) {
        *self.last_failure.borrow_mut() = Some(what);
    }

    fn tracing(&self) -> bool {
        self.cfg.trace
    }

    fn wrap(&self, rule: Rule, child: Trace, conclusion: impl FnOnce() -> String) -> Trace {
        child.map(|c| DerivationTrace::node(rule, conclusion(), c))
    }

    fn leaf(&self, rule: Rule, conclusion: impl FnOnce() -> String) -> Trace {
        self.tracing().then(|| DerivationTrace::leaf(rule, conclusion()))
    }

    /// First derivation of `e`, if any.
    pub(crate) fn first(&self, env: &Env, e: &Expr, depth: usize) -> Result<Option<(Value, Trace)>, EvalError> {
        let mut found = None;
        self.eval(env, e, depth, &mut |v, t| {
            found = Some((v, t));
            Ok(Flow::Done)
        })?;
        Ok(found)
    }

    pub(crate) fn eval(&self, env: &Env, e: &Expr, depth: usize, k: &mut Cont<'_>) -> Step {
        stacker::maybe_grow(RED_ZONE, STACK_CHUNK, || self.eval_inner(env, e, depth, k))
    }

    fn eval_inner(&self, env: &Env, e: &Expr, depth: usize, k: &mut Cont<'_>) -> Step {
        match e {
            Expr::Top => {
                let t = self.leaf(Rule::Top, || "eval(D, T) => T".to_string());
                k(Value::top(), t)
            }
            Expr::Const(v) => {
                let t = self.leaf(Rule::Const, || format!("eval(D, {e}) => {e}"));
                k(v.clone(), t)
            }
            Expr::Var(x) => Err(EvalError::UnboundVariable(x.clone())),
            Expr::Call(h, args) => {
                let consts: Option<Vec<Value>> = args
                    .iter()
                    .map(|a| match a {
                        Expr::Const(v) => Some(v.clone()),
                        _ => None,
                    })
                    .collect();
                match consts {
                    Some(values) => self.call(env, h, values, depth, k),
                    None => {
                        let mut vals = Vec::with_capacity(args.len());
                        let mut traces = Vec::with_capacity(args.len());
                        self.eval_args(env, e, h, args, &mut vals, &mut traces, depth, k)
                    }
                }
            }
            Expr::Di(decls, body) => self.eval_di(env, &decls.decls, body, depth, k),
        }
    }

    /// Rule 8: evaluate arguments left to right, then make the call.
    #[allow(clippy::too_many_arguments)]
    fn eval_args(
        &self,
        env: &Env,
        original: &Expr,
        h: &str,
        args: &[Expr],
        vals: &mut Vec<Value>,
        traces: &mut Vec<Trace>,
        depth: usize,
        k: &mut Cont<'_>,
    ) -> Step {
        let i = vals.len();
        if i == args.len() {
            let call_args = vals.clone();
            return self.call(env, h, call_args, depth, &mut |v, t| {
                let t = t.map(|t| {
                    let mut children: Vec<DerivationTrace> = traces.iter().flatten().cloned().collect();
                    children.push(t);
                    DerivationTrace {
                        rule: Rule::Args,
                        conclusion: format!("eval(D, {original}) => {v}"),
                        children,
                    }
                });
                k(v, t)
            });
        }
        self.eval(env, &args[i], depth, &mut |v, t| {
            vals.push(v);
            traces.push(t);
            let r = self.eval_args(env, original, h, args, vals, traces, depth, k);
            vals.pop();
            traces.pop();
            r
        })
    }

    /// Rule 7: a call with constant arguments switches to backchaining over
    /// the whole program.
    fn call(&self, env: &Env, h: &str, args: Vec<Value>, depth: usize, k: &mut Cont<'_>) -> Step {
        // Continuations run on top of the stack of the derivation that
        // produced their value, so growth is checked here as well as in eval.
        stacker::maybe_grow(RED_ZONE, STACK_CHUNK, || self.call_inner(env, h, args, depth, k))
    }

    fn call_inner(&self, env: &Env, h: &str, args: Vec<Value>, depth: usize, k: &mut Cont<'_>) -> Step {
        let depth = depth + 1;
        if depth > self.cfg.max_depth {
            return Err(EvalError::DepthExceeded {
                limit: self.cfg.max_depth,
                call: call_text(h, &args),
            });
        }
        self.backchain(env, env, h, &args, depth, &mut |v, t| {
            let t = self.wrap(Rule::Call, t, || format!("eval(D, {}) => {v}", call_text(h, &args)));
            k(v, t)
        })
    }

    /// Rules 1-4: try each clause of `clauses` whose head matches, evaluating
    /// the instantiated body in `program`. Builtins are the fallback when no
    /// head matches at all.
    pub(crate) fn backchain(
        &self,
        clauses: &Env,
        program: &Env,
        h: &str,
        args: &[Value],
        depth: usize,
        k: &mut Cont<'_>,
    ) -> Step {
        let total = clauses.len();
        let mut matched = false;
        for (index, clause) in clauses.ordered(self.cfg.clause_order) {
            let Some(bindings) = match_head(&clause.head, h, args) else {
                continue;
            };
            matched = true;
            let body = substitute(&bindings, &clause.body);
            let flow = self.eval(program, &body, depth, &mut |v, t| {
                let t = t.map(|t| self.clause_trace(clause, &bindings, &body, h, args, index, total, &v, t));
                k(v, t)
            })?;
            if let Flow::Done = flow {
                return Ok(Flow::Done);
            }
        }
        if !matched {
            if let Some(result) = builtin(h, args) {
                let v = result?;
                let t = self.leaf(Rule::Builtin, || format!("{} => {v}", call_text(h, args)));
                return k(v, t);
            }
            self.note_failure(format!("no clause matches {}", call_text(h, args)));
        }
        Ok(Flow::More)
    }

    #[allow(clippy::too_many_arguments)]
    fn clause_trace(
        &self,
        clause: &FunDef,
        bindings: &Bindings,
        body: &Expr,
        h: &str,
        args: &[Value],
        index: usize,
        total: usize,
        v: &Value,
        t: DerivationTrace,
    ) -> DerivationTrace {
        let call = call_text(h, args);
        let mut node = DerivationTrace::node(Rule::BcGround, format!("bc({call} = {body}, D, {call}) => {v}"), t);
        if !clause.head.is_ground() {
            let passing = bindings
                .iter()
                .map(|(x, c)| format!("{c}/{x}"))
                .collect::<Vec<_>>()
                .join(", ");
            node = DerivationTrace::node(
                Rule::BcBind,
                format!("bc({} = {}, D, {call}) => {v} [{passing}]", clause.head, clause.body),
                node,
            );
        }
        if total > 1 {
            let rule = if index == 1 { Rule::BcLeft } else { Rule::BcRight };
            node = DerivationTrace::node(
                rule,
                format!("bc(D, D, {call}) => {v} [clause {index} of {total}]"),
                node,
            );
        }
        node
    }

    /// Rules 9-11: process the antecedent left to right, splicing imports
    /// and instantiating queries, then evaluate the body in the extended
    /// program.
    fn eval_di(&self, env: &Env, decls: &[Decl], body: &Expr, depth: usize, k: &mut Cont<'_>) -> Step {
        let mut segments: Vec<Arc<[FunDef]>> = Vec::new();
        let mut local: Vec<FunDef> = Vec::new();
        let mut added: Vec<String> = Vec::new();
        let mut steps: Vec<(Rule, String)> = Vec::new();
        let mut rest: Vec<Decl> = decls.to_vec();
        let mut body = body.clone();

        let mut i = 0;
        while i < rest.len() {
            match &rest[i] {
                Decl::Import(m) => {
                    let clauses = self.module_clauses(m, Via::Import)?;
                    if self.tracing() {
                        added.push(format!("/{m}"));
                        steps.push((
                            Rule::Import,
                            format!(
                                "eval(D, {}) splices {} declaration{} of /{m}",
                                di_text(&rest[i..], &body),
                                clauses.len(),
                                if clauses.len() == 1 { "" } else { "s" }
                            ),
                        ));
                    }
                    if !local.is_empty() {
                        segments.push(std::mem::take(&mut local).into());
                    }
                    segments.push(clauses);
                }
                Decl::FunDef(def) => {
                    if self.tracing() {
                        added.push(def.to_string());
                    }
                    local.push(def.clone());
                }
                Decl::Query(q) => {
                    let q = q.clone();
                    let args = ground_args(&q)?;
                    let Some(w) = self.query(&q.module, &q.head.function, &args, depth)? else {
                        return Ok(Flow::More);
                    };
                    let fact = FunDef::fact(&q.head.function, &args, w.clone());
                    if self.tracing() {
                        added.push(fact.to_string());
                        steps.push((
                            Rule::Query,
                            format!(
                                "eval(D, {}) with {} from /{}",
                                di_text(&rest[i..], &body),
                                fact.to_string().trim_end_matches('.'),
                                q.module
                            ),
                        ));
                    }
                    local.push(fact);
                    let b = Bindings::from([(q.result_var.clone(), w)]);
                    let (tail, scope) = substitute_decls(&b, &rest[i + 1..]);
                    body = substitute(&scope, &body);
                    rest.truncate(i + 1);
                    rest.extend(tail);
                }
            }
            i += 1;
        }
        if !local.is_empty() {
            segments.push(local.into());
        }

        let extended = segments.into_iter().fold(env.clone(), |e, s| e.extend(s));
        let body_ref = &body;
        self.eval(&extended, body_ref, depth, &mut |v, t| {
            let t = t.map(|t| {
                let mut node = DerivationTrace::node(
                    Rule::Di,
                    format!("eval(D & {{{}}}, {body_ref}) => {v}", added.join(" ")),
                    t,
                );
                for (rule, text) in steps.iter().rev() {
                    node = DerivationTrace::node(*rule, format!("{text} => {v}"), node);
                }
                node
            });
            k(v, t)
        })
    }

    /// Rule 11 side condition: evaluate `f(args)` with respect to module `m`.
    /// `Ok(None)` means the query has no derivation.
    pub(crate) fn query(&self, m: &ModuleName, f: &str, args: &[Value], depth: usize) -> Result<Option<Value>, EvalError> {
        let key = format!("{}^/{m}", call_text(f, args));
        {
            let active = self.queries.borrow();
            if let Some(pos) = active.iter().position(|q| *q == key) {
                let mut chain = active[pos..].to_vec();
                chain.push(key);
                return Err(EvalError::QueryCycle { chain });
            }
            if active.len() >= self.cfg.query_hops {
                return Err(EvalError::QueryDepthExceeded { limit: self.cfg.query_hops });
            }
        }
        let clauses = self.module_clauses(m, Via::Query)?;
        let env = Env::root(clauses);
        self.queries.borrow_mut().push(key);
        let call = Expr::Call(f.to_string(), args.iter().cloned().map(Expr::Const).collect());
        let result = self.first(&env, &call, depth);
        self.queries.borrow_mut().pop();
        if let Ok(None) = result {
            self.note_failure(format!("module query {} has no derivation in /{m}", call_text(f, args)));
        }
        Ok(result?.map(|(v, _)| v))
    }

    /// Instantiate a query, treating an absent derivation as an error.
    pub(crate) fn instantiate(&self, q: &Query, depth: usize) -> Result<Value, EvalError> {
        let args = ground_args(q)?;
        self.query(&q.module, &q.head.function, &args, depth)?
            .ok_or_else(|| EvalError::QueryFailed { query: q.to_string() })
    }

    /// The clauses of module `m` after splicing its imports and
    /// instantiating its top-level queries.
    fn module_clauses(&self, m: &ModuleName, via: Via) -> Result<Arc<[FunDef]>, EvalError> {
        if let Some(c) = self.modules.borrow().get(m) {
            return Ok(c.clone());
        }
        {
            let expanding = self.expanding.borrow();
            if let Some(pos) = expanding.iter().position(|x| x == m) {
                let mut chain = expanding[pos..].to_vec();
                chain.push(m.clone());
                return Err(match via {
                    Via::Import => RegistryError::CyclicImport { chain }.into(),
                    Via::Query => EvalError::QueryCycle {
                        chain: chain.iter().map(|m| format!("/{m}")).collect(),
                    },
                });
            }
            if expanding.len() >= self.cfg.query_hops {
                return Err(EvalError::QueryDepthExceeded { limit: self.cfg.query_hops });
            }
        }
        let raw = self.registry.resolve(m)?;
        self.expanding.borrow_mut().push(m.clone());
        let result = self.expand(&raw.decls, 0);
        self.expanding.borrow_mut().pop();
        let clauses: Arc<[FunDef]> = result?.into();
        self.modules.borrow_mut().insert(m.clone(), clauses.clone());
        Ok(clauses)
    }

    /// Expand a top-level declaration list into plain clauses.
    pub(crate) fn expand(&self, decls: &[Decl], depth: usize) -> Result<Vec<FunDef>, EvalError> {
        let mut out = Vec::with_capacity(decls.len());
        let mut rest = decls.to_vec();
        let mut i = 0;
        while i < rest.len() {
            match &rest[i] {
                Decl::Import(m) => out.extend(self.module_clauses(m, Via::Import)?.iter().cloned()),
                Decl::FunDef(def) => out.push(def.clone()),
                Decl::Query(q) => {
                    let q = q.clone();
                    let w = self.instantiate(&q, depth)?;
                    out.push(FunDef::fact(&q.head.function, &ground_args(&q)?, w.clone()));
                    let b = Bindings::from([(q.result_var.clone(), w)]);
                    let (tail, _) = substitute_decls(&b, &rest[i + 1..]);
                    rest.truncate(i + 1);
                    rest.extend(tail);
                }
            }
            i += 1;
        }
        Ok(out)
    }
}

fn ground_args(q: &Query) -> Result<Vec<Value>, EvalError> {
    q.head
        .ground_args()
        .ok_or_else(|| EvalError::MqNonGround { query: q.to_string() })
}

fn di_text(decls: &[Decl], body: &Expr) -> String {
    Expr::Di(decls.to_vec().into(), Box::new(body.clone())).to_string()
}

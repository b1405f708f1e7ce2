//! One-way matching of clause heads against ground calls, and substitution
//! of bound variables into expressions.

use std::borrow::Cow;
use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::syntax::{Decl, Expr, FunDef, HeadPattern, PatternTerm, Program, Query, Value};

pub type Bindings = BTreeMap<String, Value>;

/// Match `pattern` against the call `function(args)`.
///
/// `n+k` matches integers `m >= k` and binds `n` to `m - k`, so pattern
/// variables range over the naturals.
pub fn match_head(pattern: &HeadPattern, function: &str, args: &[Value]) -> Option<Bindings> {
    if pattern.function != function || pattern.params.len() != args.len() {
        return None;
    }
    let mut bindings = Bindings::new();
    for (param, arg) in pattern.params.iter().zip(args) {
        match param {
            PatternTerm::Const(c) => {
                if c != arg {
                    return None;
                }
            }
            PatternTerm::Var(x) => {
                bindings.insert(x.clone(), arg.clone());
            }
            PatternTerm::Succ(x, k) => {
                let Value::Int(n) = arg else { return None };
                let rest = n - BigInt::from(*k);
                if rest < BigInt::from(0) {
                    return None;
                }
                bindings.insert(x.clone(), Value::Int(rest));
            }
        }
    }
    Some(bindings)
}

/// Replace free occurrences of bound variables in `e`.
///
/// Inside a DI antecedent, a local definition's head variables shadow the
/// bindings within its own body, and a query's result variable shadows them
/// in every later declaration and in the DI body.
pub fn substitute(bindings: &Bindings, e: &Expr) -> Expr {
    if bindings.is_empty() {
        return e.clone();
    }
    match e {
        Expr::Var(x) => match bindings.get(x) {
            Some(v) => Expr::Const(v.clone()),
            None => e.clone(),
        },
        Expr::Call(h, args) => {
            Expr::Call(h.clone(), args.iter().map(|a| substitute(bindings, a)).collect())
        }
        Expr::Di(decls, body) => {
            let (decls, inner) = substitute_decls(bindings, &decls.decls);
            Expr::Di(Program::new(decls), Box::new(substitute(&inner, body)))
        }
        Expr::Const(_) | Expr::Top => e.clone(),
    }
}

/// Substitute into a declaration sequence. Returns the rewritten sequence and
/// the bindings still visible after it.
pub fn substitute_decls<'b>(bindings: &'b Bindings, decls: &[Decl]) -> (Vec<Decl>, Cow<'b, Bindings>) {
    let mut scope = Cow::Borrowed(bindings);
    let out = decls
        .iter()
        .map(|d| match d {
            Decl::Import(_) => d.clone(),
            Decl::FunDef(def) => Decl::FunDef(substitute_fundef(&scope, def)),
            Decl::Query(q) => {
                let head = HeadPattern {
                    function: q.head.function.clone(),
                    params: q
                        .head
                        .params
                        .iter()
                        .map(|p| match p {
                            PatternTerm::Var(x) => match scope.get(x) {
                                Some(v) => PatternTerm::Const(v.clone()),
                                None => p.clone(),
                            },
                            other => other.clone(),
                        })
                        .collect(),
                };
                if scope.contains_key(&q.result_var) {
                    scope.to_mut().remove(&q.result_var);
                }
                Decl::Query(Query {
                    head,
                    result_var: q.result_var.clone(),
                    module: q.module.clone(),
                })
            }
        })
        .collect();
    (out, scope)
}

fn substitute_fundef(bindings: &Bindings, def: &FunDef) -> FunDef {
    let shadowed: Vec<&str> = def
        .head
        .variables()
        .filter(|v| bindings.contains_key(*v))
        .collect();
    let body = if shadowed.is_empty() {
        substitute(bindings, &def.body)
    } else {
        let mut inner = bindings.clone();
        for v in shadowed {
            inner.remove(v);
        }
        substitute(&inner, &def.body)
    };
    FunDef {
        head: def.head.clone(),
        body,
    }
}

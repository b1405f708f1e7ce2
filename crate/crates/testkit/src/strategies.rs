//! Proptest strategies for syntax trees.

use modlang::syntax::{
    Decl, Expr, FunDef, HeadPattern, ModuleName, PatternTerm, Program, Query, Value, BINARY_OPERATORS, RESERVED,
};
use proptest::prelude::*;

pub fn identifier() -> impl Strategy<Value = String> {
    "[a-z_][a-z0-9_]{0,5}".prop_filter("reserved word", |s| !RESERVED.contains(&s.as_str()))
}

pub fn module_name() -> impl Strategy<Value = ModuleName> {
    identifier().prop_map(|s| ModuleName::new(s).expect("identifiers are valid module names"))
}

pub fn value() -> impl Strategy<Value = Value> {
    prop_oneof![
        4 => (-1000i64..1000).prop_map(Value::int),
        1 => any::<i128>().prop_map(Value::int),
        1 => any::<bool>().prop_map(Value::Bool),
        1 => identifier().prop_map(Value::Sym),
    ]
}

/// Parameters with pairwise distinct variable names.
fn params(allow_succ: bool) -> impl Strategy<Value = Vec<PatternTerm>> {
    let term = (0u8..3, value(), 1u64..5);
    (identifier(), prop::collection::vec(term, 0..4)).prop_map(move |(base, terms)| {
        terms
            .into_iter()
            .enumerate()
            .map(|(i, (kind, c, k))| match kind {
                0 => PatternTerm::Const(c),
                1 if allow_succ => PatternTerm::Succ(format!("{base}{i}"), k),
                _ => PatternTerm::Var(format!("{base}{i}")),
            })
            .collect()
    })
}

fn head(allow_succ: bool) -> impl Strategy<Value = HeadPattern> {
    (identifier(), params(allow_succ)).prop_map(|(f, params)| HeadPattern { function: f, params })
}

pub fn query() -> impl Strategy<Value = Query> {
    (head(false), module_name()).prop_map(|(head, module)| {
        // head variables all end in a digit, so this name is fresh
        let result_var = format!("{}_r", head.function);
        Query {
            head,
            result_var,
            module,
        }
    })
}

fn decl_with(expr: BoxedStrategy<Expr>) -> impl Strategy<Value = Decl> {
    prop_oneof![
        module_name().prop_map(Decl::Import),
        (head(true), expr).prop_map(|(head, body)| Decl::FunDef(FunDef { head, body })),
        query().prop_map(Decl::Query),
    ]
}

pub fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        value().prop_map(Expr::Const),
        identifier().prop_map(Expr::Var),
        Just(Expr::Top),
    ];
    leaf.prop_recursive(4, 48, 4, |inner| {
        let inner_boxed = inner.clone().boxed();
        prop_oneof![
            (identifier(), prop::collection::vec(inner.clone(), 0..4)).prop_map(|(h, args)| Expr::Call(h, args)),
            (
                prop::sample::select(BINARY_OPERATORS),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, b)| Expr::call(op, vec![a, b])),
            (
                prop::collection::vec(decl_with(inner_boxed), 1..3),
                inner
            )
                .prop_map(|(decls, body)| Expr::di(decls, body)),
        ]
    })
}

pub fn decl() -> impl Strategy<Value = Decl> {
    decl_with(expr().boxed())
}

pub fn program() -> impl Strategy<Value = Program> {
    prop::collection::vec(decl(), 0..6).prop_map(Program::new)
}

/// Strings drawn mostly from the language's own tokens.
pub fn source_text() -> impl Strategy<Value = String> {
    let token = prop_oneof![
        prop::sample::select(vec![
            "/", "=", "==", "<", "<=", "+", "-", "*", "(", ")", ",", ".", "^", "&", "-o", "T", "true", "false", "%",
            "\n", " ", "'", "fib", "n", "x", "0", "1", "-1", "mod", "/mf",
        ])
        .prop_map(str::to_string),
        "[ -~]{1,3}",
    ];
    prop::collection::vec(token, 0..40).prop_map(|ts| ts.concat())
}

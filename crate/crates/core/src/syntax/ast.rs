//! Abstract syntax: expressions, declarations, programs and ground values.

use std::fmt;

use num_bigint::BigInt;

use crate::error::NameError;

/// Words that the lexer treats as literals and that can never be identifiers.
pub const RESERVED: &[&str] = &["T", "true", "false"];

/// Infix operators accepted as sugar for two-argument builtin calls.
pub const BINARY_OPERATORS: &[&str] = &["+", "-", "*", "<", "<=", "=="];

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !RESERVED.contains(&s)
}

/// A ground constant. Evaluation only ever produces these.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
    Sym(String),
}

impl Value {
    pub fn int(n: impl Into<BigInt>) -> Self {
        Value::Int(n.into())
    }

    /// The value of `T`.
    pub fn top() -> Self {
        Value::Sym("T".to_string())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Sym(_) => "symbol",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Sym(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Int(n.into())
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

/// Name of a module, stored without the leading slash.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModuleName(String);

impl ModuleName {
    pub fn new(name: impl Into<String>) -> Result<Self, NameError> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(ModuleName(name))
        } else {
            Err(NameError(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Accepts the name with or without its leading slash.
impl std::str::FromStr for ModuleName {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModuleName::new(s.strip_prefix('/').unwrap_or(s))
    }
}

impl fmt::Display for ModuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(Value),
    Var(String),
    Call(String, Vec<Expr>),
    /// `D -o E`: evaluate the body with the declarations added locally.
    /// The declaration list is never empty.
    Di(Program, Box<Expr>),
    Top,
}

impl Expr {
    pub fn int(n: i64) -> Self {
        Expr::Const(Value::int(n))
    }

    pub fn var(name: &str) -> Self {
        Expr::Var(name.to_string())
    }

    pub fn call(head: &str, args: Vec<Expr>) -> Self {
        Expr::Call(head.to_string(), args)
    }

    pub fn di(decls: Vec<Decl>, body: Expr) -> Self {
        debug_assert!(!decls.is_empty());
        Expr::Di(Program::new(decls), Box::new(body))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Top => true,
            Expr::Var(_) | Expr::Di(..) => false,
            Expr::Call(_, args) => args.iter().all(Expr::is_ground),
        }
    }
}

impl From<Value> for Expr {
    fn from(v: Value) -> Self {
        Expr::Const(v)
    }
}

/// One parameter position in a definition or query head.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternTerm {
    Const(Value),
    Var(String),
    /// `n+k`: matches an integer `m >= k`, binding `n` to `m - k`.
    Succ(String, u64),
}

impl PatternTerm {
    pub fn var_name(&self) -> Option<&str> {
        match self {
            PatternTerm::Const(_) => None,
            PatternTerm::Var(v) | PatternTerm::Succ(v, _) => Some(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeadPattern {
    pub function: String,
    pub params: Vec<PatternTerm>,
}

impl HeadPattern {
    pub fn new(function: &str, params: Vec<PatternTerm>) -> Self {
        HeadPattern {
            function: function.to_string(),
            params,
        }
    }

    /// A head whose parameters are all constants.
    pub fn ground(function: &str, args: &[Value]) -> Self {
        HeadPattern {
            function: function.to_string(),
            params: args.iter().cloned().map(PatternTerm::Const).collect(),
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.params.iter().filter_map(PatternTerm::var_name)
    }

    pub fn is_ground(&self) -> bool {
        self.params
            .iter()
            .all(|p| matches!(p, PatternTerm::Const(_)))
    }

    /// The constant arguments of a ground head.
    pub fn ground_args(&self) -> Option<Vec<Value>> {
        self.params
            .iter()
            .map(|p| match p {
                PatternTerm::Const(v) => Some(v.clone()),
                _ => None,
            })
            .collect()
    }
}

/// `f(t1,...,tn) = E`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunDef {
    pub head: HeadPattern,
    pub body: Expr,
}

impl FunDef {
    pub fn new(head: HeadPattern, body: Expr) -> Self {
        FunDef { head, body }
    }

    /// A ground fact `f(c1,...,cn) = w`.
    pub fn fact(function: &str, args: &[Value], value: Value) -> Self {
        FunDef {
            head: HeadPattern::ground(function, args),
            body: Expr::Const(value),
        }
    }
}

/// `(f(t1,...,tn) = v)^/m`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub head: HeadPattern,
    pub result_var: String,
    pub module: ModuleName,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Import(ModuleName),
    FunDef(FunDef),
    Query(Query),
}

/// An ordered conjunction of declarations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub decls: Vec<Decl>,
}

impl Program {
    pub fn new(decls: Vec<Decl>) -> Self {
        Program { decls }
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Decl> {
        self.decls.iter()
    }

    pub fn has_queries(&self) -> bool {
        self.decls.iter().any(|d| matches!(d, Decl::Query(_)))
    }
}

impl From<Vec<Decl>> for Program {
    fn from(decls: Vec<Decl>) -> Self {
        Program { decls }
    }
}

impl FromIterator<Decl> for Program {
    fn from_iter<I: IntoIterator<Item = Decl>>(iter: I) -> Self {
        Program {
            decls: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a Program {
    type Item = &'a Decl;
    type IntoIter = std::slice::Iter<'a, Decl>;

    fn into_iter(self) -> Self::IntoIter {
        self.decls.iter()
    }
}

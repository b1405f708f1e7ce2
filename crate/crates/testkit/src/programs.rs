//! Seeded random program generators.

use modlang::syntax::{Decl, Expr, FunDef, HeadPattern, ModuleName, PatternTerm, Program, Query, Value};
use modlang::{parse_program, ClauseOrder, ModuleRegistry};
use rand::seq::SliceRandom;
use rand::Rng;

fn name(s: &str) -> ModuleName {
    ModuleName::new(s).expect("generator module names are valid")
}

fn var(x: &str) -> PatternTerm {
    PatternTerm::Var(x.to_string())
}

fn int(n: i64) -> PatternTerm {
    PatternTerm::Const(Value::int(n))
}

/// Modules available to conformance programs.
pub fn conformance_registry() -> ModuleRegistry {
    let src = [
        ("lib", "inc(x) = x + 1. dbl(x) = x * 2. pick(0) = 1. pick(n+1) = n. pick(x) = 3."),
        ("lib2", "/lib. (inc(2)=v)^/lib. twice(x) = inc(inc(x)) + v."),
        ("cyca", "/cycb. a1(x) = x."),
        ("cycb", "/cyca. b1(x) = x."),
        ("qa", "(qb1(1)=v)^/qb. qa1(x) = v."),
        ("qb", "(qa1(1)=v)^/qa. qb1(x) = v."),
        ("broken", "/missing. c(x) = x."),
    ];
    src.iter().fold(ModuleRegistry::default(), |r, (m, text)| {
        r.with_module(name(m), parse_program(text).expect("conformance module parses"))
    })
}

#[derive(Debug, Clone)]
pub struct ConformanceCase {
    pub program: Program,
    pub expr: Expr,
    pub order: ClauseOrder,
    pub max_depth: usize,
}

const FUNCTIONS: [&str; 3] = ["f", "g", "h"];
const LIB_CALLS: [(&str, usize); 4] = [("inc", 1), ("dbl", 1), ("pick", 1), ("twice", 1)];
const OPERATORS: [&str; 8] = ["+", "-", "*", "<", "==", "<=", "mod", "div"];

struct Conformance {
    arity: [usize; 3],
    /// Functions that have at least one top-level clause.
    defined: Vec<usize>,
}

impl Conformance {
    fn constant(&self, rng: &mut impl Rng) -> Value {
        if rng.gen_ratio(1, 8) {
            Value::Bool(rng.gen())
        } else {
            Value::int(rng.gen_range(0..=3))
        }
    }

    fn pattern(&self, rng: &mut impl Rng, arity: usize) -> Vec<PatternTerm> {
        let names = ["x", "y", "z"];
        (0..arity)
            .map(|i| match rng.gen_range(0..4) {
                0 => PatternTerm::Const(self.constant(rng)),
                1 => PatternTerm::Succ(names[i].to_string(), rng.gen_range(1..=2)),
                _ => var(names[i]),
            })
            .collect()
    }

    fn function(&self, rng: &mut impl Rng) -> usize {
        match self.defined.choose(rng) {
            Some(&f) if rng.gen_ratio(4, 5) => f,
            _ => rng.gen_range(0..FUNCTIONS.len()),
        }
    }

    fn fundef(&self, rng: &mut impl Rng, which: usize, depth: usize, outer: &[String]) -> FunDef {
        let params = self.pattern(rng, self.arity[which]);
        let mut scope: Vec<String> = outer.to_vec();
        scope.extend(params.iter().filter_map(|p| p.var_name().map(str::to_string)));
        let body = self.expr(rng, depth, &scope);
        FunDef::new(HeadPattern::new(FUNCTIONS[which], params), body)
    }

    fn leaf(&self, rng: &mut impl Rng, scope: &[String]) -> Expr {
        match rng.gen_range(0..20) {
            0 | 1 => Expr::Top,
            2 => Expr::var("w"),
            3..=10 if !scope.is_empty() => Expr::var(scope.choose(rng).expect("non-empty")),
            _ => Expr::Const(self.constant(rng)),
        }
    }

    fn expr(&self, rng: &mut impl Rng, depth: usize, scope: &[String]) -> Expr {
        if depth == 0 || rng.gen_ratio(1, 4) {
            return self.leaf(rng, scope);
        }
        let d = depth - 1;
        match rng.gen_range(0..10) {
            0..=3 => {
                let which = self.function(rng);
                let args = (0..self.arity[which]).map(|_| self.expr(rng, d, scope)).collect();
                Expr::call(FUNCTIONS[which], args)
            }
            4..=6 => {
                let op = OPERATORS.choose(rng).expect("non-empty");
                Expr::call(op, vec![self.expr(rng, d, scope), self.expr(rng, d, scope)])
            }
            7 => {
                let (f, arity) = LIB_CALLS.choose(rng).expect("non-empty");
                Expr::call(f, (0..*arity).map(|_| self.expr(rng, d, scope)).collect())
            }
            _ => self.di(rng, d, scope),
        }
    }

    fn di(&self, rng: &mut impl Rng, depth: usize, scope: &[String]) -> Expr {
        let mut scope = scope.to_vec();
        let mut decls = Vec::new();
        for i in 0..rng.gen_range(1..=2) {
            let decl = match rng.gen_range(0..10) {
                0..=4 => {
                    let which = self.function(rng);
                    Decl::FunDef(self.fundef(rng, which, depth, &scope))
                }
                5 | 6 => Decl::Import(name(["lib", "lib", "lib", "lib2", "cyca", "qa", "broken"].choose(rng).expect("non-empty"))),
                _ => {
                    let arg = match scope.choose(rng) {
                        Some(x) if rng.gen_bool(0.5) => var(x),
                        _ if rng.gen_ratio(1, 10) => var("u"),
                        _ => int(rng.gen_range(0..=3)),
                    };
                    let (f, m) = [("inc", "lib"), ("pick", "lib"), ("twice", "lib2"), ("qa1", "qa")]
                        .choose(rng)
                        .copied()
                        .expect("non-empty");
                    let result = format!("v{i}");
                    scope.push(result.clone());
                    Decl::Query(Query {
                        head: HeadPattern::new(f, vec![arg]),
                        result_var: result,
                        module: name(m),
                    })
                }
            };
            decls.push(decl);
        }
        let body = self.expr(rng, depth, &scope);
        Expr::di(decls, body)
    }
}

/// A program of at most four definitions over `f`, `g` and `h`, with
/// integer constants 0 to 3 and expressions nested at most three deep.
pub fn conformance_case(rng: &mut impl Rng) -> ConformanceCase {
    let heads: Vec<usize> = (0..rng.gen_range(0..=4)).map(|_| rng.gen_range(0..FUNCTIONS.len())).collect();
    let gen = Conformance {
        arity: [rng.gen_range(0..=2), rng.gen_range(0..=2), rng.gen_range(0..=2)],
        defined: heads.clone(),
    };
    let mut decls = Vec::new();
    if rng.gen_ratio(1, 4) {
        decls.push(Decl::Import(name("lib")));
    }
    for which in heads {
        decls.push(Decl::FunDef(gen.fundef(rng, which, 3, &[])));
    }
    if rng.gen_ratio(1, 10) {
        decls.push(Decl::Query(Query {
            head: HeadPattern::new("pick", vec![int(rng.gen_range(0..=3))]),
            result_var: "v".to_string(),
            module: name("lib"),
        }));
    }
    decls.shuffle(rng);
    let expr = if rng.gen_bool(0.6) {
        let which = gen.function(rng);
        Expr::call(
            FUNCTIONS[which],
            (0..gen.arity[which]).map(|_| Expr::Const(gen.constant(rng))).collect(),
        )
    } else {
        gen.expr(rng, 3, &[])
    };
    let order = if rng.gen_bool(0.5) {
        ClauseOrder::NewestFirst
    } else {
        ClauseOrder::OldestFirst
    };
    ConformanceCase {
        program: Program::new(decls),
        expr,
        order,
        max_depth: rng.gen_range(1..=12),
    }
}

/// A unary function of a generated module.
#[derive(Debug, Clone)]
pub struct Function {
    pub name: String,
    /// Whether results are booleans rather than integers.
    pub boolean: bool,
}

/// A module of unary functions over the naturals that terminate on every
/// argument, built from recurrences and compositions of earlier functions.
/// The module has exactly `decls` declarations (at least one).
pub fn natural_module(rng: &mut impl Rng, decls: usize) -> (Program, Vec<Function>) {
    assert!(decls >= 1);
    let mut out: Vec<Decl> = Vec::new();
    let mut fns: Vec<Function> = Vec::new();
    let n = || var("n");
    while decls - out.len() >= 3 || (fns.is_empty() && decls - out.len() >= 1) {
        let f = format!("p{}", fns.len());
        let ints: Vec<&Function> = fns.iter().filter(|g| !g.boolean).collect();
        let room = decls - out.len();
        let call = |g: &str, a: Expr| Expr::call(g, vec![a]);
        let c = |rng: &mut dyn rand::RngCore| Expr::int(rng.gen_range(0..=4));
        let mut clauses: Vec<FunDef> = match rng.gen_range(0..5) {
            // fib-like
            0 if room >= 3 => vec![
                FunDef::new(HeadPattern::new(&f, vec![int(0)]), c(rng)),
                FunDef::new(HeadPattern::new(&f, vec![int(1)]), c(rng)),
                FunDef::new(
                    HeadPattern::new(&f, vec![PatternTerm::Succ("n".into(), 2)]),
                    Expr::call("+", vec![call(&f, Expr::var("n")), call(&f, Expr::call("+", vec![Expr::var("n"), Expr::int(1)]))]),
                ),
            ],
            // first-order recurrence
            1 | 2 if room >= 2 => {
                let prev = call(&f, Expr::var("n"));
                let step = match (rng.gen_range(0..3), ints.choose(rng)) {
                    (0, Some(g)) => Expr::call("+", vec![prev, call(&g.name, Expr::var("n"))]),
                    (1, _) => Expr::call("-", vec![Expr::call("*", vec![prev, Expr::int(2)]), Expr::var("n")]),
                    _ => Expr::call("+", vec![prev, c(rng)]),
                };
                vec![
                    FunDef::new(HeadPattern::new(&f, vec![int(0)]), c(rng)),
                    FunDef::new(HeadPattern::new(&f, vec![PatternTerm::Succ("n".into(), 1)]), step),
                ]
            }
            // boolean test of an earlier function
            3 if !ints.is_empty() => {
                let g = &ints.choose(rng).expect("non-empty").name;
                let body = if rng.gen_bool(0.5) {
                    Expr::call("==", vec![Expr::call("mod", vec![call(g, Expr::var("n")), Expr::int(2)]), Expr::int(0)])
                } else {
                    Expr::call("<", vec![call(g, Expr::var("n")), c(rng)])
                };
                vec![FunDef::new(HeadPattern::new(&f, vec![n()]), body)]
            }
            // closed form
            _ => {
                let base = match ints.choose(rng) {
                    Some(g) if rng.gen_bool(0.7) => call(&g.name, Expr::var("n")),
                    _ => Expr::var("n"),
                };
                let body = Expr::call("+", vec![Expr::call("*", vec![base, c(rng)]), Expr::var("n")]);
                vec![FunDef::new(HeadPattern::new(&f, vec![n()]), body)]
            }
        };
        let boolean = matches!(&clauses[0].body, Expr::Call(op, _) if op == "==" || op == "<");
        if rng.gen_bool(0.5) {
            clauses.reverse();
        }
        out.extend(clauses.into_iter().map(Decl::FunDef));
        fns.push(Function { name: f, boolean });
    }
    let mut k = 0;
    while out.len() < decls {
        let fact = FunDef::fact(&format!("t{k}"), &[], Value::int(rng.gen_range(0..=9)));
        out.push(Decl::FunDef(fact));
        fns.push(Function {
            name: format!("t{k}"),
            boolean: false,
        });
        k += 1;
    }
    (Program::new(out), fns)
}

fn ground_call(f: &Function, arg: Option<i64>) -> (String, Vec<Value>) {
    let args = if f.name.starts_with('t') { vec![] } else { vec![Value::int(arg.unwrap_or(0))] };
    (f.name.clone(), args)
}

/// Queries on distinct ground calls of `fns`.
pub fn ground_queries(rng: &mut impl Rng, module: &ModuleName, fns: &[Function], count: usize) -> Vec<Query> {
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for _ in 0..count * 8 {
        if out.len() == count {
            break;
        }
        let f = fns.choose(rng).expect("module has functions");
        let call = ground_call(f, Some(rng.gen_range(0..=8)));
        if seen.contains(&call) {
            continue;
        }
        out.push(Query {
            head: HeadPattern::ground(&call.0, &call.1),
            result_var: format!("v{}", out.len()),
            module: module.clone(),
        });
        seen.push(call);
    }
    out
}

#[derive(Debug, Clone)]
pub struct DifferentialCase {
    pub module_name: ModuleName,
    pub module: Program,
    /// `queries -o body`, where the body's calls into the module are
    /// answered by the queries and some are replaced by result variables.
    pub with_queries: Expr,
    /// `/m -o body` with every call left in place.
    pub with_import: Expr,
}

struct Body<'a> {
    fns: &'a [Function],
    /// Calls made so far, with the result variable of their query.
    calls: Vec<((String, Vec<Value>), String)>,
}

impl Body<'_> {
    /// Returns the import form and the query form of one subexpression.
    fn call(&mut self, rng: &mut impl Rng, boolean: bool) -> Option<(Expr, Expr)> {
        let candidates: Vec<&Function> = self.fns.iter().filter(|f| f.boolean == boolean).collect();
        let f = *candidates.choose(rng)?;
        let n = rng.gen_range(0..=8);
        let key = ground_call(f, Some(n));
        let arg_expr = if key.1.is_empty() {
            vec![]
        } else if rng.gen_bool(0.3) && n > 0 {
            let a = rng.gen_range(0..n);
            vec![Expr::call("+", vec![Expr::int(a), Expr::int(n - a)])]
        } else {
            vec![Expr::int(n)]
        };
        let v = match self.calls.iter().find(|(k, _)| *k == key) {
            Some((_, v)) => v.clone(),
            None => {
                let v = format!("v{}", self.calls.len());
                self.calls.push((key.clone(), v.clone()));
                v
            }
        };
        let direct = Expr::call(&key.0, arg_expr);
        let answered = if rng.gen_bool(0.5) { Expr::var(&v) } else { direct.clone() };
        Some((direct, answered))
    }

    fn int(&mut self, rng: &mut impl Rng, depth: usize) -> (Expr, Expr) {
        if depth == 0 || rng.gen_ratio(1, 3) {
            if rng.gen_ratio(1, 4) {
                let c = Expr::int(rng.gen_range(0..=9));
                return (c.clone(), c);
            }
            return self.call(rng, false).expect("every module has an integer function");
        }
        let op = ["+", "-", "*"].choose(rng).expect("non-empty");
        let (a1, a2) = self.int(rng, depth - 1);
        let (b1, b2) = self.int(rng, depth - 1);
        (Expr::call(op, vec![a1, b1]), Expr::call(op, vec![a2, b2]))
    }

    fn top(&mut self, rng: &mut impl Rng) -> (Expr, Expr) {
        if rng.gen_ratio(1, 4) {
            if let Some(pair) = self.call(rng, true) {
                return pair;
            }
        }
        if rng.gen_ratio(1, 4) {
            let op = ["<", "=="].choose(rng).expect("non-empty");
            let (a1, a2) = self.int(rng, 2);
            let (b1, b2) = self.int(rng, 2);
            return (Expr::call(op, vec![a1, b1]), Expr::call(op, vec![a2, b2]));
        }
        self.int(rng, 3)
    }
}

pub fn differential_case(rng: &mut impl Rng) -> DifferentialCase {
    let module_name = name("src");
    let size = rng.gen_range(3..=12);
    let (module, fns) = natural_module(rng, size);
    let mut body = Body { fns: &fns, calls: vec![] };
    let (mut direct, mut answered) = body.top(rng);
    while body.calls.is_empty() {
        (direct, answered) = body.top(rng);
    }
    let mut queries: Vec<Decl> = body
        .calls
        .into_iter()
        .map(|((f, args), v)| {
            Decl::Query(Query {
                head: HeadPattern::ground(&f, &args),
                result_var: v,
                module: module_name.clone(),
            })
        })
        .collect();
    queries.shuffle(rng);
    DifferentialCase {
        with_queries: Expr::di(queries, answered),
        with_import: Expr::di(vec![Decl::Import(module_name.clone())], direct),
        module_name,
        module,
    }
}

#[derive(Debug, Clone)]
pub struct WeakenCase {
    pub module_name: ModuleName,
    pub module: Program,
    pub queries: Vec<Query>,
}

/// A source module of exactly `decls` declarations and between one and ten
/// distinct ground queries against it.
pub fn weaken_case(rng: &mut impl Rng, decls: usize) -> WeakenCase {
    let module_name = name("src");
    let (module, fns) = natural_module(rng, decls);
    let count = rng.gen_range(1..=10);
    let queries = ground_queries(rng, &module_name, &fns, count);
    WeakenCase {
        module_name,
        module,
        queries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn natural_module_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=100 {
            let (p, fns) = natural_module(&mut rng, n);
            assert_eq!(p.len(), n);
            assert!(fns.iter().any(|f| !f.boolean));
        }
    }

    #[test]
    fn conformance_programs_are_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let case = conformance_case(&mut rng);
            let defs = case.program.iter().filter(|d| matches!(d, Decl::FunDef(_))).count();
            assert!(defs <= 4);
        }
    }
}

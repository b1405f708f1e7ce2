//! Backtracking recursive-descent parser.
//!
//! The only real ambiguity in the grammar is at the start of an expression,
//! where a DI antecedent (`f(x) = ... -o`, `(f(1)=v)^/m -o`) and an ordinary
//! call or parenthesised expression share a prefix. The parser tries the
//! antecedent first and rewinds on failure. Once a definition head has been
//! followed by `=`, or a query by `^`, the parse is committed and semantic
//! problems (non-linear heads, bad offsets) become hard errors.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::ast::{Decl, Expr, FunDef, HeadPattern, ModuleName, PatternTerm, Program, Query, Value};
use super::lexer::{tokenize, Spanned, Token};
use crate::error::{ParseError, Position};

enum Fail {
    Backtrack,
    Fatal(ParseError),
}

type PResult<T> = Result<T, Fail>;

/// Head parameter as written, before the head is known to be a definition.
enum RawParam {
    Const(Value),
    Var(String),
    Succ(String, BigInt, Position),
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    furthest: usize,
    expected: BTreeSet<String>,
}

impl Parser {
    fn new(source: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            tokens: tokenize(source)?,
            pos: 0,
            furthest: 0,
            expected: BTreeSet::new(),
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos].token
    }

    fn peek_at(&self, offset: usize) -> &Token {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].token
    }

    fn position(&self) -> Position {
        self.tokens[self.pos].position
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos].token.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn note(&mut self, what: &str) {
        if self.pos > self.furthest {
            self.furthest = self.pos;
            self.expected.clear();
        }
        if self.pos == self.furthest {
            self.expected.insert(what.to_string());
        }
    }

    fn eat(&mut self, token: Token) -> bool {
        if *self.peek() == token {
            self.advance();
            true
        } else {
            let desc = format!("`{}`", token.text());
            self.note(&desc);
            false
        }
    }

    fn expect(&mut self, token: Token) -> PResult<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(Fail::Backtrack)
        }
    }

    fn ident(&mut self) -> PResult<String> {
        if let Token::Ident(name) = self.peek() {
            let name = name.clone();
            self.advance();
            Ok(name)
        } else {
            self.note("identifier");
            Err(Fail::Backtrack)
        }
    }

    fn module_name(&mut self) -> PResult<ModuleName> {
        let name = self.ident()?;
        Ok(ModuleName::new(name).expect("lexer identifiers are valid names"))
    }

    fn error(&self) -> ParseError {
        let tok = &self.tokens[self.furthest];
        ParseError::Unexpected {
            position: tok.position,
            expected: self.expected.iter().cloned().collect(),
            found: tok.token.to_string(),
        }
    }

    fn finish<T>(&mut self, result: PResult<T>) -> Result<T, ParseError> {
        match result {
            Ok(v) => Ok(v),
            Err(Fail::Fatal(e)) => Err(e),
            Err(Fail::Backtrack) => Err(self.error()),
        }
    }

    fn invalid(position: Position, message: impl Into<String>) -> Fail {
        Fail::Fatal(ParseError::Invalid {
            position,
            message: message.into(),
        })
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        let save = self.pos;
        match self.antecedent() {
            Ok(decls) => {
                if self.eat(Token::Lolli) {
                    let body = self.expr()?;
                    return Ok(Expr::Di(Program::new(decls), Box::new(body)));
                }
            }
            Err(Fail::Fatal(e)) => return Err(Fail::Fatal(e)),
            Err(Fail::Backtrack) => {}
        }
        self.pos = save;
        self.comparison()
    }

    fn antecedent(&mut self) -> PResult<Vec<Decl>> {
        let mut decls = vec![self.decl(false)?];
        while self.eat(Token::Amp) {
            decls.push(self.decl(false)?);
        }
        Ok(decls)
    }

    fn binary(
        &mut self,
        ops: &[(Token, &str)],
        operand: fn(&mut Self) -> PResult<Expr>,
    ) -> PResult<Expr> {
        let mut lhs = operand(self)?;
        'outer: loop {
            for (tok, name) in ops {
                if self.eat(tok.clone()) {
                    let rhs = operand(self)?;
                    lhs = Expr::Call(name.to_string(), vec![lhs, rhs]);
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn comparison(&mut self) -> PResult<Expr> {
        self.binary(
            &[(Token::Le, "<="), (Token::Lt, "<"), (Token::EqEq, "==")],
            Self::additive,
        )
    }

    fn additive(&mut self) -> PResult<Expr> {
        self.binary(&[(Token::Plus, "+"), (Token::Minus, "-")], Self::multiplicative)
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        self.binary(&[(Token::Star, "*")], Self::atom)
    }

    fn literal(&mut self) -> PResult<Value> {
        let value = match self.peek().clone() {
            Token::Int(n) => Value::Int(n),
            Token::Minus => {
                if let Token::Int(n) = self.peek_at(1).clone() {
                    self.advance();
                    Value::Int(-n)
                } else {
                    self.note("literal");
                    return Err(Fail::Backtrack);
                }
            }
            Token::True => Value::Bool(true),
            Token::False => Value::Bool(false),
            Token::Sym(s) => Value::Sym(s),
            _ => {
                self.note("literal");
                return Err(Fail::Backtrack);
            }
        };
        self.advance();
        Ok(value)
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Token::Top => {
                self.advance();
                Ok(Expr::Top)
            }
            Token::Ident(name) => {
                self.advance();
                if self.eat(Token::LParen) {
                    let mut args = Vec::new();
                    if !self.eat(Token::RParen) {
                        args.push(self.expr()?);
                        while self.eat(Token::Comma) {
                            args.push(self.expr()?);
                        }
                        self.expect(Token::RParen)?;
                    }
                    Ok(Expr::Call(name, args))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Token::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            _ => {
                self.note("expression");
                self.literal().map(Expr::Const)
            }
        }
    }

    // ---- declarations ----

    /// One declaration. `top_level` selects the body grammar of definitions:
    /// inside an antecedent a body stops before `&` and `-o`.
    fn decl(&mut self, top_level: bool) -> PResult<Decl> {
        match self.peek() {
            Token::Slash => {
                self.advance();
                Ok(Decl::Import(self.module_name()?))
            }
            Token::LParen => self.query().map(Decl::Query),
            _ => self.fundef(top_level).map(Decl::FunDef),
        }
    }

    fn raw_param(&mut self) -> PResult<RawParam> {
        if let Token::Ident(name) = self.peek().clone() {
            self.advance();
            if *self.peek() == Token::Plus {
                if let Token::Int(k) = self.peek_at(1).clone() {
                    let position = self.position();
                    self.advance();
                    self.advance();
                    return Ok(RawParam::Succ(name, k, position));
                }
            }
            return Ok(RawParam::Var(name));
        }
        if *self.peek() == Token::Top {
            self.advance();
            return Ok(RawParam::Const(Value::top()));
        }
        self.note("pattern");
        self.literal().map(RawParam::Const)
    }

    fn raw_params(&mut self) -> PResult<Vec<(RawParam, Position)>> {
        let mut params = Vec::new();
        self.expect(Token::LParen)?;
        if self.eat(Token::RParen) {
            return Ok(params);
        }
        loop {
            let position = self.position();
            params.push((self.raw_param()?, position));
            if self.eat(Token::Comma) {
                continue;
            }
            self.expect(Token::RParen)?;
            return Ok(params);
        }
    }

    fn head(
        function: String,
        raw: Vec<(RawParam, Position)>,
        allow_succ: bool,
    ) -> PResult<HeadPattern> {
        let mut seen = BTreeSet::new();
        let mut params = Vec::with_capacity(raw.len());
        for (param, position) in raw {
            let term = match param {
                RawParam::Const(v) => PatternTerm::Const(v),
                RawParam::Var(v) => PatternTerm::Var(v),
                RawParam::Succ(v, k, pos) => {
                    if !allow_succ {
                        return Err(Self::invalid(
                            pos,
                            "query arguments must be variables or constants",
                        ));
                    }
                    match k.to_u64() {
                        Some(k) if !k.is_zero() => PatternTerm::Succ(v, k),
                        _ => {
                            return Err(Self::invalid(
                                pos,
                                format!("offset in `{v}+{k}` must be a positive integer"),
                            ))
                        }
                    }
                }
            };
            if let Some(v) = term.var_name() {
                if !seen.insert(v.to_string()) {
                    return Err(Self::invalid(
                        position,
                        format!("variable `{v}` repeats in the head of `{function}`"),
                    ));
                }
            }
            params.push(term);
        }
        Ok(HeadPattern { function, params })
    }

    fn fundef(&mut self, top_level: bool) -> PResult<FunDef> {
        let function = self.ident()?;
        let raw = if *self.peek() == Token::LParen {
            self.raw_params()?
        } else {
            Vec::new()
        };
        self.expect(Token::Eq)?;
        let head = Self::head(function, raw, true)?;
        let body = if top_level {
            self.expr()?
        } else {
            self.comparison()?
        };
        Ok(FunDef { head, body })
    }

    fn query(&mut self) -> PResult<Query> {
        self.expect(Token::LParen)?;
        let function = self.ident()?;
        let raw = self.raw_params()?;
        self.expect(Token::Eq)?;
        let result_position = self.position();
        let result_var = self.ident()?;
        self.expect(Token::RParen)?;
        self.expect(Token::Caret)?;
        let head = Self::head(function, raw, false)?;
        if head.variables().any(|v| v == result_var) {
            return Err(Self::invalid(
                result_position,
                format!("result variable `{result_var}` also occurs in the query arguments"),
            ));
        }
        self.expect(Token::Slash)?;
        let module = self.module_name()?;
        Ok(Query {
            head,
            result_var,
            module,
        })
    }

    fn end(&mut self) -> PResult<()> {
        self.expect(Token::Eof)
    }

    fn at_header(&self) -> bool {
        *self.peek() == Token::Slash
            && matches!(self.peek_at(1), Token::Ident(_))
            && *self.peek_at(2) == Token::Eq
    }

    fn decl_list(&mut self) -> PResult<Vec<Decl>> {
        let mut decls = Vec::new();
        loop {
            if *self.peek() == Token::Eof {
                return Ok(decls);
            }
            if self.at_header() {
                let position = self.position();
                let Token::Ident(name) = self.peek_at(1).clone() else {
                    unreachable!()
                };
                return Err(Fail::Fatal(ParseError::DuplicateHeader { position, name }));
            }
            self.note("end of input");
            decls.push(self.decl(true)?);
            self.expect(Token::Dot)?;
        }
    }

    fn module_file(&mut self) -> PResult<(ModuleName, Program)> {
        self.expect(Token::Slash)?;
        let name = self.module_name()?;
        self.expect(Token::Eq)?;
        let decls = self.decl_list()?;
        Ok((name, Program::new(decls)))
    }
}

/// Parse a single expression.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(source)?;
    let result = p.expr().and_then(|e| p.end().map(|_| e));
    p.finish(result)
}

/// Parse a `.mod` file: a `/name =` header followed by `.`-terminated
/// declarations.
pub fn parse_module_file(source: &str) -> Result<(ModuleName, Program), ParseError> {
    let mut p = Parser::new(source)?;
    let result = p.module_file();
    p.finish(result)
}

/// Parse a header-less sequence of `.`-terminated declarations.
pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(source)?;
    let result = p.decl_list().map(Program::new);
    p.finish(result)
}

/// Parse one declaration. The terminating `.` is optional.
pub fn parse_decl(source: &str) -> Result<Decl, ParseError> {
    let mut p = Parser::new(source)?;
    let result = p.decl(true).and_then(|d| {
        p.eat(Token::Dot);
        p.end().map(|_| d)
    });
    p.finish(result)
}

/// Parse a module query `(f(args)=v)^/m`.
pub fn parse_query(source: &str) -> Result<Query, ParseError> {
    let mut p = Parser::new(source)?;
    let result = p.query().and_then(|q| {
        p.eat(Token::Dot);
        p.end().map(|_| q)
    });
    p.finish(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(name: &str) -> ModuleName {
        ModuleName::new(name).unwrap()
    }

    #[test]
    fn literal_constant() {
        assert_eq!(parse_expr("42").unwrap(), Expr::int(42));
        assert_eq!(parse_expr("-7").unwrap(), Expr::int(-7));
        assert_eq!(parse_expr("T").unwrap(), Expr::Top);
        assert_eq!(parse_expr("'red").unwrap(), Expr::Const(Value::Sym("red".into())));
    }

    #[test]
    fn nested_imports() {
        let e = parse_expr("/mf -o /mp -o prime(fib(n))").unwrap();
        let expected = Expr::di(
            vec![Decl::Import(m("mf"))],
            Expr::di(
                vec![Decl::Import(m("mp"))],
                Expr::call("prime", vec![Expr::call("fib", vec![Expr::var("n")])]),
            ),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn module_query_expression() {
        let e = parse_expr("(fib(n)=v)^/mf -o prime(v)").unwrap();
        let q = Query {
            head: HeadPattern::new("fib", vec![PatternTerm::Var("n".into())]),
            result_var: "v".into(),
            module: m("mf"),
        };
        assert_eq!(
            e,
            Expr::di(vec![Decl::Query(q)], Expr::call("prime", vec![Expr::var("v")]))
        );
    }

    #[test]
    fn conjunction_and_local_definitions() {
        let e = parse_expr("k = 5 & /lib -o k()").unwrap();
        let Expr::Di(decls, body) = e else { panic!() };
        assert_eq!(decls.len(), 2);
        assert_eq!(*body, Expr::call("k", vec![]));
        assert_eq!(
            decls.decls[0],
            Decl::FunDef(FunDef::new(HeadPattern::new("k", vec![]), Expr::int(5)))
        );
    }

    #[test]
    fn operator_precedence() {
        let e = parse_expr("1 + 2 * 3 < 4 - 5 - 6").unwrap();
        let lhs = Expr::call("+", vec![Expr::int(1), Expr::call("*", vec![Expr::int(2), Expr::int(3)])]);
        let rhs = Expr::call(
            "-",
            vec![Expr::call("-", vec![Expr::int(4), Expr::int(5)]), Expr::int(6)],
        );
        assert_eq!(e, Expr::call("<", vec![lhs, rhs]));
        assert_eq!(
            parse_expr("n - -1").unwrap(),
            Expr::call("-", vec![Expr::var("n"), Expr::int(-1)])
        );
    }

    #[test]
    fn parenthesised_call_is_not_a_query() {
        let e = parse_expr("(f(1) + 2)").unwrap();
        assert_eq!(
            e,
            Expr::call("+", vec![Expr::call("f", vec![Expr::int(1)]), Expr::int(2)])
        );
    }

    #[test]
    fn zero_ary_call_differs_from_variable() {
        assert_eq!(parse_expr("h()").unwrap(), Expr::call("h", vec![]));
        assert_eq!(parse_expr("h").unwrap(), Expr::var("h"));
    }

    #[test]
    fn fibonacci_module() {
        let (name, prog) =
            parse_module_file("/mf = fib(1) = 1. fib(2) = 1. fib(n+2) = fib(n) + fib(n+1).")
                .unwrap();
        assert_eq!(name, m("mf"));
        assert_eq!(prog.len(), 3);
        let Decl::FunDef(third) = &prog.decls[2] else { panic!() };
        assert_eq!(third.head.params, vec![PatternTerm::Succ("n".into(), 2)]);
        assert_eq!(
            third.body,
            Expr::call(
                "+",
                vec![
                    Expr::call("fib", vec![Expr::var("n")]),
                    Expr::call("fib", vec![Expr::call("+", vec![Expr::var("n"), Expr::int(1)])])
                ]
            )
        );
    }

    #[test]
    fn empty_module() {
        assert_eq!(parse_module_file("/empty =").unwrap(), (m("empty"), Program::default()));
    }

    #[test]
    fn prime_module_head() {
        let (name, prog) = parse_module_file("/mp = prime(n) = prime_aux(n, n - 1).").unwrap();
        assert_eq!(name, m("mp"));
        let Decl::FunDef(def) = &prog.decls[0] else { panic!() };
        assert_eq!(def.head, HeadPattern::new("prime", vec![PatternTerm::Var("n".into())]));
        assert_eq!(
            def.body,
            Expr::call(
                "prime_aux",
                vec![Expr::var("n"), Expr::call("-", vec![Expr::var("n"), Expr::int(1)])]
            )
        );
    }

    #[test]
    fn duplicate_header() {
        let err = parse_module_file("/a = f = 1.\n/b = g = 2.").unwrap_err();
        assert!(matches!(err, ParseError::DuplicateHeader { ref name, .. } if name == "b"));
        assert_eq!(err.position(), Position { line: 2, column: 1 });
    }

    #[test]
    fn top_level_import_and_query() {
        let prog = parse_program("/mf. (fib(3)=v)^/mf. g(x) = x + v.").unwrap();
        assert!(matches!(prog.decls[0], Decl::Import(_)));
        assert!(matches!(prog.decls[1], Decl::Query(_)));
        assert!(matches!(prog.decls[2], Decl::FunDef(_)));
    }

    #[test]
    fn semantic_errors() {
        assert!(matches!(
            parse_decl("f(x, x) = x."),
            Err(ParseError::Invalid { .. })
        ));
        assert!(matches!(
            parse_decl("f(n+0) = n."),
            Err(ParseError::Invalid { .. })
        ));
        assert!(matches!(
            parse_query("(f(v)=v)^/m"),
            Err(ParseError::Invalid { .. })
        ));
        assert!(matches!(
            parse_query("(f(n+1)=v)^/m"),
            Err(ParseError::Invalid { .. })
        ));
    }

    #[test]
    fn error_position_and_expectations() {
        let err = parse_expr("f(1,").unwrap_err();
        let ParseError::Unexpected {
            position, found, ..
        } = err
        else {
            panic!("{err:?}")
        };
        assert_eq!(position, Position { line: 1, column: 5 });
        assert_eq!(found, "end of input");

        let err = parse_module_file("/m =\nf(x) = x\ng(y) = y.").unwrap_err();
        assert_eq!(err.position().line, 3);
    }

    #[test]
    fn di_body_extends_right() {
        let e = parse_expr("/m -o f(1) + 2").unwrap();
        let Expr::Di(_, body) = e else { panic!() };
        assert_eq!(
            *body,
            Expr::call("+", vec![Expr::call("f", vec![Expr::int(1)]), Expr::int(2)])
        );
    }
}

//! Pretty-printer. Output re-parses to the same AST.

use std::fmt::{self, Display, Formatter, Write};

use super::ast::{Decl, Expr, FunDef, HeadPattern, ModuleName, PatternTerm, Program, Query, Value};

const PREC_DI: u8 = 0;
const PREC_CMP: u8 = 1;

fn operator_prec(head: &str) -> Option<u8> {
    match head {
        "<" | "<=" | "==" => Some(1),
        "+" | "-" => Some(2),
        "*" => Some(3),
        _ => None,
    }
}

fn write_literal(out: &mut impl Write, v: &Value) -> fmt::Result {
    match v {
        Value::Sym(s) => write!(out, "'{s}"),
        other => write!(out, "{other}"),
    }
}

fn write_list<T>(
    out: &mut Formatter<'_>,
    items: &[T],
    mut each: impl FnMut(&mut Formatter<'_>, &T) -> fmt::Result,
) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.write_str(", ")?;
        }
        each(out, item)?;
    }
    Ok(())
}

fn write_expr(out: &mut Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    match e {
        Expr::Const(v) => write_literal(out, v),
        Expr::Var(x) => out.write_str(x),
        Expr::Top => out.write_str("T"),
        Expr::Call(head, args) => match (operator_prec(head), args.as_slice()) {
            (Some(prec), [lhs, rhs]) => {
                let paren = prec < min_prec;
                if paren {
                    out.write_str("(")?;
                }
                write_expr(out, lhs, prec)?;
                write!(out, " {head} ")?;
                write_expr(out, rhs, prec + 1)?;
                if paren {
                    out.write_str(")")?;
                }
                Ok(())
            }
            _ => {
                write!(out, "{head}(")?;
                write_list(out, args, |out, a| write_expr(out, a, PREC_DI))?;
                out.write_str(")")
            }
        },
        Expr::Di(decls, body) => {
            let paren = min_prec > PREC_DI;
            if paren {
                out.write_str("(")?;
            }
            for (i, d) in decls.iter().enumerate() {
                if i > 0 {
                    out.write_str(" & ")?;
                }
                write_decl(out, d, false)?;
            }
            out.write_str(" -o ")?;
            write_expr(out, body, PREC_DI)?;
            if paren {
                out.write_str(")")?;
            }
            Ok(())
        }
    }
}

fn write_pattern(out: &mut Formatter<'_>, p: &PatternTerm) -> fmt::Result {
    match p {
        PatternTerm::Const(v) => write_literal(out, v),
        PatternTerm::Var(x) => out.write_str(x),
        PatternTerm::Succ(x, k) => write!(out, "{x}+{k}"),
    }
}

fn write_head(out: &mut Formatter<'_>, h: &HeadPattern) -> fmt::Result {
    write!(out, "{}(", h.function)?;
    write_list(out, &h.params, write_pattern)?;
    out.write_str(")")
}

fn write_decl(out: &mut Formatter<'_>, d: &Decl, top_level: bool) -> fmt::Result {
    match d {
        Decl::Import(m) => write!(out, "/{m}"),
        Decl::Query(q) => write!(out, "{q}"),
        Decl::FunDef(def) => {
            write_head(out, &def.head)?;
            out.write_str(" = ")?;
            let min = if top_level { PREC_DI } else { PREC_CMP };
            write_expr(out, &def.body, min)
        }
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_expr(f, self, PREC_DI)
    }
}

impl Display for HeadPattern {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_head(f, self)
    }
}

impl Display for Query {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        write_head(f, &self.head)?;
        write!(f, "={})^/{}", self.result_var, self.module)
    }
}

/// Renders a top-level declaration including its terminating `.`.
impl Display for Decl {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_decl(f, self, true)?;
        f.write_str(".")
    }
}

impl Display for FunDef {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_head(f, &self.head)?;
        f.write_str(" = ")?;
        write_expr(f, &self.body, PREC_DI)?;
        f.write_str(".")
    }
}

/// One declaration per line.
impl Display for Program {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Render a ground value as an expression literal (symbols get a quote).
pub fn literal(v: &Value) -> String {
    let mut s = String::new();
    write_literal(&mut s, v).expect("writing to a String");
    s
}

/// Render a whole module file.
pub fn pretty_module(name: &ModuleName, program: &Program) -> String {
    format!("/{name} =\n{program}")
}

#[cfg(test)]
mod tests {
    use super::super::parser::{parse_decl, parse_expr, parse_module_file};
    use super::*;

    #[test]
    fn simple_forms() {
        assert_eq!(Expr::int(7).to_string(), "7");
        assert_eq!(Expr::Top.to_string(), "T");
        let fact = Decl::FunDef(FunDef::fact("fib", &[Value::int(3)], Value::int(2)));
        assert_eq!(fact.to_string(), "fib(3) = 2.");
        assert_eq!(parse_decl(&fact.to_string()).unwrap(), fact);
    }

    #[test]
    fn minimal_parentheses() {
        for src in [
            "fib(n) + fib(n + 1)",
            "(1 + 2) * 3",
            "1 - (2 - 3)",
            "a - -1",
            "(/m -o f(1)) + 2",
            "f(/m -o g(1), 2)",
            "g(y) = (/m -o y) & (f(1)=v)^/m -o g(v)",
            "a < (b == true)",
            "'sym",
            "k() = 5 -o k()",
        ] {
            let e = parse_expr(src).unwrap();
            assert_eq!(e.to_string(), src);
            assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
        }
    }

    #[test]
    fn module_round_trip() {
        let src = "/mf =\nfib(1) = 1.\nfib(2) = 1.\nfib(n+2) = fib(n) + fib(n + 1).\n";
        let (name, prog) = parse_module_file(src).unwrap();
        assert_eq!(pretty_module(&name, &prog), src);
    }
}

//! Abstract syntax, concrete grammar, parser and pretty-printer.

mod ast;
mod lexer;
mod parser;
mod pretty;

pub use ast::{
    is_identifier, Decl, Expr, FunDef, HeadPattern, ModuleName, PatternTerm, Program, Query,
    Value, BINARY_OPERATORS, RESERVED,
};
pub use parser::{parse_decl, parse_expr, parse_module_file, parse_program, parse_query};
pub use pretty::{literal, pretty_module};

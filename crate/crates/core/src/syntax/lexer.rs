use std::fmt;

use num_bigint::BigInt;

use crate::error::{ParseError, Position};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Int(BigInt),
    /// `'name`
    Sym(String),
    True,
    False,
    Top,
    Slash,
    Eq,
    EqEq,
    Lt,
    Le,
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    Comma,
    Dot,
    Caret,
    Amp,
    /// `-o`
    Lolli,
    Eof,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "identifier `{s}`"),
            Token::Int(n) => write!(f, "integer `{n}`"),
            Token::Sym(s) => write!(f, "symbol `'{s}`"),
            Token::True => f.write_str("`true`"),
            Token::False => f.write_str("`false`"),
            Token::Top => f.write_str("`T`"),
            Token::Eof => f.write_str("end of input"),
            other => write!(f, "`{}`", other.text()),
        }
    }
}

impl Token {
    pub(crate) fn text(&self) -> &'static str {
        match self {
            Token::Slash => "/",
            Token::Eq => "=",
            Token::EqEq => "==",
            Token::Lt => "<",
            Token::Le => "<=",
            Token::Plus => "+",
            Token::Minus => "-",
            Token::Star => "*",
            Token::LParen => "(",
            Token::RParen => ")",
            Token::Comma => ",",
            Token::Dot => ".",
            Token::Caret => "^",
            Token::Amp => "&",
            Token::Lolli => "-o",
            Token::True => "true",
            Token::False => "false",
            Token::Top => "T",
            Token::Ident(_) | Token::Int(_) | Token::Sym(_) | Token::Eof => "",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub token: Token,
    pub position: Position,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn tokenize(source: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut column) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let position = Position { line, column };
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }

        let start = i;
        let token = if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            Token::Int(digits.parse().expect("digit run parses"))
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match word.as_str() {
                "T" => Token::Top,
                "true" => Token::True,
                "false" => Token::False,
                _ => Token::Ident(word),
            }
        } else if c == '\'' {
            i += 1;
            if i >= chars.len() || !(chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                return Err(ParseError::Invalid {
                    position,
                    message: "expected a symbol name after `'`".to_string(),
                });
            }
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            Token::Sym(chars[start + 1..i].iter().collect())
        } else {
            let next = chars.get(i + 1).copied();
            let (token, width) = match (c, next) {
                ('-', Some('o')) if !chars.get(i + 2).is_some_and(|&c| is_ident_char(c)) => {
                    (Token::Lolli, 2)
                }
                ('=', Some('=')) => (Token::EqEq, 2),
                ('<', Some('=')) => (Token::Le, 2),
                ('=', _) => (Token::Eq, 1),
                ('<', _) => (Token::Lt, 1),
                ('-', _) => (Token::Minus, 1),
                ('+', _) => (Token::Plus, 1),
                ('*', _) => (Token::Star, 1),
                ('/', _) => (Token::Slash, 1),
                ('(', _) => (Token::LParen, 1),
                (')', _) => (Token::RParen, 1),
                (',', _) => (Token::Comma, 1),
                ('.', _) => (Token::Dot, 1),
                ('^', _) => (Token::Caret, 1),
                ('&', _) => (Token::Amp, 1),
                _ => {
                    return Err(ParseError::Invalid {
                        position,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            i += width;
            token
        };
        column += i - start;
        tokens.push(Spanned { token, position });
    }

    tokens.push(Spanned {
        token: Token::Eof,
        position: Position { line, column },
    });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Token> {
        tokenize(src).unwrap().into_iter().map(|s| s.token).collect()
    }

    #[test]
    fn lolli_versus_minus() {
        assert_eq!(
            kinds("/m -o x - o"),
            vec![
                Token::Slash,
                Token::Ident("m".into()),
                Token::Lolli,
                Token::Ident("x".into()),
                Token::Minus,
                Token::Ident("o".into()),
                Token::Eof
            ]
        );
        assert_eq!(
            kinds("n-o1"),
            vec![
                Token::Ident("n".into()),
                Token::Minus,
                Token::Ident("o1".into()),
                Token::Eof
            ]
        );
    }

    #[test]
    fn comments_and_crlf() {
        let toks = tokenize("% header\r\nfib(1) = 1. % one\r\n").unwrap();
        assert_eq!(toks[0].token, Token::Ident("fib".into()));
        assert_eq!(toks[0].position, Position { line: 2, column: 1 });
        assert_eq!(toks.len(), 8);
    }

    #[test]
    fn bad_character() {
        let err = tokenize("f(x) = x $ 1").unwrap_err();
        assert_eq!(err.position(), Position { line: 1, column: 10 });
    }
}

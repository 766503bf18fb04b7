use std::fmt;

use super::ast::Pos;
use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Class,
    Extends,
    Super,
    Lt,
    Gt,
    Comma,
    LBrace,
    RBrace,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Class => f.write_str("`class`"),
            Tok::Extends => f.write_str("`extends`"),
            Tok::Super => f.write_str("`super`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1u32, 1u32);

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '/' {
            chars.next();
            if chars.peek() == Some(&'/') {
                // line comment
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
                continue;
            }
            return Err(ParseError::new(pos, vec!["`//`".into()], "`/`"));
        }
        if c.is_alphabetic() {
            let mut ident = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_alphanumeric() || c == '_' {
                    ident.push(c);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            let tok = match ident.as_str() {
                "class" => Tok::Class,
                "extends" => Tok::Extends,
                "super" => Tok::Super,
                _ => Tok::Ident(ident),
            };
            out.push(Token { tok, pos });
            continue;
        }
        let tok = match c {
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            ',' => Tok::Comma,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            other => {
                return Err(ParseError::new(
                    pos,
                    vec!["a token".into()],
                    format!("`{other}`"),
                ));
            }
        };
        chars.next();
        col += 1;
        out.push(Token { tok, pos });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}

//! Class-declaration language: lexer, recursive-descent parser and renderer.
//!
//! ```text
//! program := decl* ;
//! decl    := "class" ID params? ("extends" type)? "{" "}" ;
//! params  := "<" param ("," param)* ">" ;
//! param   := type "extends" ID "extends" type
//!          | ID ("extends" type)? ("super" type)? ;
//! type    := ID ("<" type ("," type)* ">")? ;
//! ```
//!
//! Both bound notations produce the same [`TypeParamDecl`]; rendering always
//! uses the keyword form.

mod ast;
mod lexer;

use std::collections::HashSet;
use std::fmt;

pub use ast::{render, ClassDecl, Pos, Program, TypeExpr, TypeParamDecl};
use lexer::{tokenize, Tok, Token};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub pos: Pos,
    pub expected: Vec<String>,
    pub found: String,
}

impl ParseError {
    pub(crate) fn new(pos: Pos, expected: Vec<String>, found: impl Into<String>) -> Self {
        ParseError {
            pos,
            expected,
            found: found.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: expected ", self.pos)?;
        match self.expected.as_slice() {
            [one] => f.write_str(one)?,
            many => write!(f, "one of {}", many.join(", "))?,
        }
        write!(f, ", found {}", self.found)
    }
}

/// Parses a whole source file.
pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(source)?;
    let mut decls = Vec::new();
    while p.peek() != &Tok::Eof {
        decls.push(p.class_decl()?);
    }
    Ok(Program { decls })
}

/// Parses a single type with an empty variable scope: every bare identifier
/// becomes a nullary class reference.
pub fn parse_type(source: &str) -> Result<TypeExpr, ParseError> {
    parse_type_in_scope(source, &[])
}

/// Parses a single type; bare identifiers listed in `vars` become variables.
pub fn parse_type_in_scope(source: &str, vars: &[&str]) -> Result<TypeExpr, ParseError> {
    let mut p = Parser::new(source)?;
    let t = p.ty()?;
    p.expect(Tok::Eof, "end of input")?;
    let scope: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
    Ok(bind_vars(t, &scope))
}

fn bind_vars(t: TypeExpr, scope: &[String]) -> TypeExpr {
    match t {
        TypeExpr::App(name, args) if args.is_empty() && scope.contains(&name) => {
            TypeExpr::Var(name)
        }
        TypeExpr::App(name, args) => TypeExpr::App(
            name,
            args.into_iter().map(|a| bind_vars(a, scope)).collect(),
        ),
        v @ TypeExpr::Var(_) => v,
    }
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    fn new(source: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: tokenize(source)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if t.tok != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError::new(
            self.pos(),
            expected.iter().map(|s| s.to_string()).collect(),
            self.peek().to_string(),
        )
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.error(&[what]))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let pos = self.bump().pos;
                Ok((name, pos))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    /// Parses a type with every bare identifier as a nullary application;
    /// variables are bound afterwards once the parameter list is known.
    fn ty(&mut self) -> Result<TypeExpr, ParseError> {
        let (name, _) = self.ident()?;
        let mut args = Vec::new();
        if self.eat(&Tok::Lt) {
            args.push(self.ty()?);
            loop {
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                        args.push(self.ty()?);
                    }
                    Tok::Gt => {
                        self.bump();
                        break;
                    }
                    _ => return Err(self.error(&["`,`", "`>`"])),
                }
            }
        }
        Ok(TypeExpr::App(name, args))
    }

    fn class_decl(&mut self) -> Result<ClassDecl, ParseError> {
        let pos = self.expect(Tok::Class, "`class`")?.pos;
        let (name, _) = self.ident()?;

        let mut params = Vec::new();
        if self.eat(&Tok::Lt) {
            let mut seen = HashSet::new();
            loop {
                let param_pos = self.pos();
                let param = self.param()?;
                if !seen.insert(param.name.clone()) {
                    return Err(ParseError::new(
                        param_pos,
                        vec!["a distinct parameter name".into()],
                        format!("duplicate parameter `{}`", param.name),
                    ));
                }
                params.push(param);
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::Gt => {
                        self.bump();
                        break;
                    }
                    _ => return Err(self.error(&["`,`", "`>`"])),
                }
            }
        }

        let extends_clause = if self.eat(&Tok::Extends) {
            Some(self.ty()?)
        } else {
            None
        };
        self.expect(Tok::LBrace, "`{`")?;
        self.expect(Tok::RBrace, "`}`")?;

        let scope: Vec<String> = params
            .iter()
            .map(|p: &TypeParamDecl| p.name.clone())
            .collect();
        let bind = |t: Option<TypeExpr>| t.map(|t| bind_vars(t, &scope));
        let params = params
            .into_iter()
            .map(|p| TypeParamDecl {
                name: p.name,
                lower: bind(p.lower),
                upper: bind(p.upper),
            })
            .collect();
        Ok(ClassDecl {
            name,
            params,
            extends_clause: bind(extends_clause),
            pos,
        })
    }

    fn param(&mut self) -> Result<TypeParamDecl, ParseError> {
        let first_pos = self.pos();
        let first = self.ty()?;
        if !self.eat(&Tok::Extends) {
            let name = bare_name(first).ok_or_else(|| {
                ParseError::new(
                    self.pos(),
                    vec!["`extends`".into()],
                    self.peek().to_string(),
                )
            })?;
            let lower = if self.eat(&Tok::Super) {
                Some(self.ty()?)
            } else {
                None
            };
            return Ok(TypeParamDecl {
                name,
                lower,
                upper: None,
            });
        }

        let second_pos = self.pos();
        let second = self.ty()?;
        if self.eat(&Tok::Extends) {
            // sandwich form: LOWER extends T extends UPPER
            let name = bare_name(second).ok_or_else(|| {
                ParseError::new(
                    second_pos,
                    vec!["type parameter name".into()],
                    "a generic type",
                )
            })?;
            let upper = self.ty()?;
            return Ok(TypeParamDecl {
                name,
                lower: Some(first),
                upper: Some(upper),
            });
        }

        // keyword form: T extends UPPER (super LOWER)?
        let name = bare_name(first).ok_or_else(|| {
            ParseError::new(
                first_pos,
                vec!["type parameter name".into()],
                "a generic type",
            )
        })?;
        let lower = if self.eat(&Tok::Super) {
            Some(self.ty()?)
        } else {
            None
        };
        Ok(TypeParamDecl {
            name,
            lower,
            upper: Some(second),
        })
    }
}

fn bare_name(t: TypeExpr) -> Option<String> {
    match t {
        TypeExpr::App(name, args) if args.is_empty() => Some(name),
        _ => None,
    }
}

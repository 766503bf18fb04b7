use std::fmt;

use super::RealError;

/// Arithmetic over the variable `x`. `SelfRef` stands for `f(x)`, the
/// function being defined, and may only appear in bounds.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    X,
    SelfRef,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn has_self_ref(&self) -> bool {
        match self {
            Expr::SelfRef => true,
            Expr::Const(_) | Expr::X => false,
            Expr::Neg(e) | Expr::Pow(e, _) => e.has_self_ref(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.has_self_ref() || b.has_self_ref()
            }
        }
    }

    fn map_self_ref(&self, body: &Expr) -> Expr {
        let go = |e: &Expr| Box::new(e.map_self_ref(body));
        match self {
            Expr::SelfRef => body.clone(),
            Expr::Const(_) | Expr::X => self.clone(),
            Expr::Neg(e) => Expr::Neg(go(e)),
            Expr::Pow(e, n) => Expr::Pow(go(e), *n),
            Expr::Add(a, b) => Expr::Add(go(a), go(b)),
            Expr::Sub(a, b) => Expr::Sub(go(a), go(b)),
            Expr::Mul(a, b) => Expr::Mul(go(a), go(b)),
            Expr::Div(a, b) => Expr::Div(go(a), go(b)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if *c < 0.0 => 3,
            Expr::Const(_) | Expr::X | Expr::SelfRef => 5,
        }
    }
}

/// Replaces every `f(x)` in `bound` by `body`.
pub fn resolve_self_reference(bound: &Expr, body: &Expr) -> Result<Expr, RealError> {
    if body.has_self_ref() {
        return Err(RealError::SelfReferenceInBody);
    }
    Ok(bound.map_self_ref(body))
}

/// Evaluates `e` at `x` in IEEE double precision.
pub fn eval(e: &Expr, x: f64) -> Result<f64, RealError> {
    Ok(match e {
        Expr::Const(c) => *c,
        Expr::X => x,
        Expr::SelfRef => return Err(RealError::UnresolvedSelfReference),
        Expr::Neg(a) => -eval(a, x)?,
        Expr::Add(a, b) => eval(a, x)? + eval(b, x)?,
        Expr::Sub(a, b) => eval(a, x)? - eval(b, x)?,
        Expr::Mul(a, b) => eval(a, x)? * eval(b, x)?,
        Expr::Div(a, b) => {
            let d = eval(b, x)?;
            if d == 0.0 {
                return Err(RealError::DivisionByZero(x));
            }
            eval(a, x)? / d
        }
        Expr::Pow(a, n) => powu(eval(a, x)?, *n),
    })
}

fn powu(base: f64, n: u32) -> f64 {
    match i32::try_from(n) {
        Ok(n) => base.powi(n),
        Err(_) => base.powf(n as f64),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = self.precedence();
        let child = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::X => f.write_str("x"),
            Expr::SelfRef => f.write_str("f(x)"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                child(f, e, 4)
            }
            Expr::Pow(e, n) => {
                child(f, e, 5)?;
                write!(f, "^{n}")
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let op = match self {
                    Expr::Add(..) => "+",
                    Expr::Sub(..) => "-",
                    Expr::Mul(..) => "*",
                    _ => "/",
                };
                child(f, a, prec)?;
                f.write_str(op)?;
                // left-associative: an equal-precedence right operand needs parentheses
                child(f, b, prec + 1)
            }
        }
    }
}

/// Parses an expression over `x`.
///
/// Precedence, loosest first: `+ -`, `* /`, unary `-`, `^`. Exponents are
/// nonnegative integer literals; `f(x)` is the self-reference.
pub fn parse_expr(text: &str) -> Result<Expr, RealError> {
    let mut p = ExprParser {
        src: text.as_bytes(),
        at: 0,
    };
    let e = p.sum()?;
    p.skip_ws();
    if p.at < p.src.len() {
        return Err(p.error("an operator or end of input"));
    }
    Ok(e)
}

struct ExprParser<'a> {
    src: &'a [u8],
    at: usize,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.at < self.src.len() && self.src[self.at].is_ascii_whitespace() {
            self.at += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.at).copied()
    }

    fn error(&self, expected: &str) -> RealError {
        let found = match self.src.get(self.at) {
            Some(&c) => format!("`{}`", c as char),
            None => "end of input".to_string(),
        };
        RealError::Parse {
            offset: self.at,
            expected: expected.to_string(),
            found,
        }
    }

    fn sum(&mut self) -> Result<Expr, RealError> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.at += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Some(b'-') => {
                    self.at += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, RealError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.at += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(b'/') => {
                    self.at += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, RealError> {
        if self.peek() == Some(b'-') {
            self.at += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, RealError> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.at += 1;
        self.skip_ws();
        let start = self.at;
        while self.at < self.src.len() && self.src[self.at].is_ascii_digit() {
            self.at += 1;
        }
        if start == self.at {
            return Err(self.error("a nonnegative integer exponent"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.at]).expect("ascii digits");
        let n: u32 = digits.parse().map_err(|_| RealError::Parse {
            offset: start,
            expected: "an exponent that fits in 32 bits".into(),
            found: digits.to_string(),
        })?;
        if self.peek() == Some(b'^') {
            return Err(self.error("parentheses around a repeated power"));
        }
        Ok(Expr::Pow(Box::new(base), n))
    }

    fn atom(&mut self) -> Result<Expr, RealError> {
        match self.peek() {
            Some(b'(') => {
                self.at += 1;
                let e = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("`)`"));
                }
                self.at += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.at;
                while self.at < self.src.len()
                    && (self.src[self.at].is_ascii_alphanumeric() || self.src[self.at] == b'_')
                {
                    self.at += 1;
                }
                match &self.src[start..self.at] {
                    b"x" => Ok(Expr::X),
                    b"f" => {
                        for (tok, what) in [(b'(', "`(`"), (b'x', "`x`"), (b')', "`)`")] {
                            if self.peek() != Some(tok) {
                                return Err(self.error(what));
                            }
                            self.at += 1;
                        }
                        Ok(Expr::SelfRef)
                    }
                    _ => {
                        self.at = start;
                        Err(self.error("`x`, `f(x)`, a number or `(`"))
                    }
                }
            }
            _ => Err(self.error("`x`, `f(x)`, a number or `(`")),
        }
    }

    fn number(&mut self) -> Result<Expr, RealError> {
        let start = self.at;
        let digits = |p: &mut Self| {
            while p.at < p.src.len() && p.src[p.at].is_ascii_digit() {
                p.at += 1;
            }
        };
        digits(self);
        if self.src.get(self.at) == Some(&b'.') {
            self.at += 1;
            digits(self);
        }
        if matches!(self.src.get(self.at), Some(b'e' | b'E')) {
            let save = self.at;
            self.at += 1;
            if matches!(self.src.get(self.at), Some(b'+' | b'-')) {
                self.at += 1;
            }
            let exp_start = self.at;
            digits(self);
            if exp_start == self.at {
                self.at = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.at]).expect("ascii number");
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| RealError::Parse {
                offset: start,
                expected: "a number".into(),
                found: format!("`{text}`"),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    fn c(v: f64) -> Box<Expr> {
        Box::new(Expr::Const(v))
    }

    #[test]
    fn cube() {
        assert_eq!(p("x^3"), Expr::Pow(Box::new(Expr::X), 3));
    }

    #[test]
    fn negated_square_plus_constant() {
        let sq = Expr::Pow(Box::new(Expr::Sub(Box::new(Expr::X), c(2.0))), 2);
        assert_eq!(
            p("-(x-2)^2+3"),
            Expr::Add(Box::new(Expr::Neg(Box::new(sq))), c(3.0))
        );
    }

    #[test]
    fn self_reference_token() {
        assert_eq!(p("f(x)"), Expr::SelfRef);
        assert_eq!(
            p(" f ( x ) + 1"),
            Expr::Add(Box::new(Expr::SelfRef), c(1.0))
        );
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval(&p("10-4-3"), 0.0).unwrap(), 3.0);
        assert_eq!(eval(&p("24/4/3"), 0.0).unwrap(), 2.0);
        assert_eq!(eval(&p("-x^2"), 3.0).unwrap(), -9.0);
        assert_eq!(eval(&p("2*-x"), 3.0).unwrap(), -6.0);
        assert_eq!(eval(&p("1+2*3"), 0.0).unwrap(), 7.0);
        assert_eq!(eval(&p("1.5e1"), 0.0).unwrap(), 15.0);
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval(&p("x^3"), 2.0).unwrap(), 8.0);
        assert_eq!(eval(&p("(x-2)^2+1"), 2.0).unwrap(), 1.0);
        assert_eq!(eval(&p("x/2"), 3.0).unwrap(), 1.5);
        assert_eq!(eval(&p("x^0"), 5.0).unwrap(), 1.0);
    }

    #[test]
    fn division_by_zero_is_reported() {
        assert_eq!(eval(&p("1/x"), 0.0), Err(RealError::DivisionByZero(0.0)));
        assert_eq!(
            eval(&p("f(x)"), 0.0),
            Err(RealError::UnresolvedSelfReference)
        );
    }

    #[test]
    fn resolution() {
        assert_eq!(
            resolve_self_reference(&p("f(x)"), &p("x^3")).unwrap(),
            p("x^3")
        );
        assert_eq!(
            resolve_self_reference(&p("x/2"), &p("x^3")).unwrap(),
            p("x/2")
        );
        assert_eq!(
            resolve_self_reference(&p("f(x)+1"), &p("x")).unwrap(),
            p("x+1")
        );
        assert_eq!(
            resolve_self_reference(&p("x"), &p("f(x)")),
            Err(RealError::SelfReferenceInBody)
        );
    }

    #[test]
    fn parse_errors_have_offsets() {
        for (src, offset) in [
            ("x^", 2),
            ("(x", 2),
            ("x + y", 4),
            ("x^2^3", 3),
            ("3x", 1),
            ("f(y)", 2),
            ("", 0),
            ("x^-1", 2),
        ] {
            match parse_expr(src) {
                Err(RealError::Parse { offset: o, .. }) => assert_eq!(o, offset, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "x^3",
            "-(x-2)^2+3",
            "(x-5)^3-10*x+65",
            "x/2",
            "3*x",
            "x-(1-x)",
            "f(x)+1",
            "(-x)^2",
            "1/(x*x)",
        ] {
            let e = p(src);
            assert_eq!(p(&e.to_string()), e, "{src} -> {e}");
        }
    }
}

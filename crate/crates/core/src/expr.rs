//! Small real-valued expression language for user-supplied `(Φ, χ)` data.
//!
//! Variables: `rho`/`ρ`, `phi`/`φ` (polar coordinates of `w`), `u`, `v`.
//! Constants: `pi`/`π`, `e`. Functions: `ln`, `exp`, `sin`, `cos`, `sqrt`,
//! `atan2(y, x)`, `pow(x, y)`. Operators: `+ - * / ^` with the usual
//! precedence; `^` is right-associative and binds tighter than unary minus.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Var {
    Rho,
    Phi,
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Ln,
    Exp,
    Sin,
    Cos,
    Sqrt,
    Atan2,
    Pow,
}

impl Func {
    fn lookup(name: &str) -> Option<(Self, usize)> {
        Some(match name {
            "ln" => (Func::Ln, 1),
            "exp" => (Func::Exp, 1),
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "sqrt" => (Func::Sqrt, 1),
            "atan2" => (Func::Atan2, 2),
            "pow" => (Func::Pow, 2),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// Values of the variables an expression may refer to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vars {
    pub rho: f64,
    pub phi: f64,
    pub u: f64,
    pub v: f64,
}

/// Parsed expression; keeps its source text for display and serialization.
#[derive(Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self> {
        let tokens = tokenize(source)?;
        let mut p = Parser { tokens, pos: 0 };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expression(format!("unexpected trailing input in {source:?}")));
        }
        Ok(Self { source: source.trim().to_string(), root })
    }

    /// Constant expression.
    pub fn constant(value: f64) -> Self {
        Self { source: format!("{value:?}"), root: Node::Num(value) }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, vars: &Vars) -> f64 {
        eval(&self.root, vars)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Expr::parse(&s).map_err(serde::de::Error::custom)
    }
}

fn eval(node: &Node, x: &Vars) -> f64 {
    match node {
        Node::Num(c) => *c,
        Node::Var(Var::Rho) => x.rho,
        Node::Var(Var::Phi) => x.phi,
        Node::Var(Var::U) => x.u,
        Node::Var(Var::V) => x.v,
        Node::Neg(a) => -eval(a, x),
        Node::Add(a, b) => eval(a, x) + eval(b, x),
        Node::Sub(a, b) => eval(a, x) - eval(b, x),
        Node::Mul(a, b) => eval(a, x) * eval(b, x),
        Node::Div(a, b) => eval(a, x) / eval(b, x),
        Node::Pow(a, b) => power(eval(a, x), eval(b, x)),
        Node::Call(f, args) => {
            let a = eval(&args[0], x);
            match f {
                Func::Ln => a.ln(),
                Func::Exp => a.exp(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Sqrt => a.sqrt(),
                Func::Atan2 => a.atan2(eval(&args[1], x)),
                Func::Pow => power(a, eval(&args[1], x)),
            }
        }
    }
}

/// Integer exponents use repeated multiplication so that e.g. `u^2` is exact.
fn power(base: f64, exponent: f64) -> f64 {
    if exponent.fract() == 0.0 && exponent.abs() <= 64.0 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                k += 1;
            }
            // exponent part, e.g. 1e-3
            if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                let mut m = k + 1;
                if m < chars.len() && (chars[m] == '+' || chars[m] == '-') {
                    m += 1;
                }
                if m < chars.len() && chars[m].is_ascii_digit() {
                    k = m;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                }
            }
            let text: String = chars[start..k].iter().collect();
            let value = text
                .parse::<f64>()
                .map_err(|_| Error::Expression(format!("bad number {text:?}")))?;
            out.push(Token::Num(value));
        } else if c.is_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].is_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            out.push(Token::Ident(chars[start..k].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Token::Op(c));
            k += 1;
        } else {
            return Err(Error::Expression(format!("unexpected character {c:?} in {src:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.peek_op() == Some(op) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Expression(format!("expected {op:?}")))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Expression("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(c) => Ok(Node::Num(c)),
            Token::Op('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Token::Op(c) => Err(Error::Expression(format!("unexpected {c:?}"))),
            Token::Ident(name) => match name.as_str() {
                "rho" | "ρ" => Ok(Node::Var(Var::Rho)),
                "phi" | "φ" => Ok(Node::Var(Var::Phi)),
                "u" => Ok(Node::Var(Var::U)),
                "v" => Ok(Node::Var(Var::V)),
                "pi" | "π" => Ok(Node::Num(std::f64::consts::PI)),
                "e" => Ok(Node::Num(std::f64::consts::E)),
                _ => {
                    let (func, arity) = Func::lookup(&name)
                        .ok_or_else(|| Error::Expression(format!("unknown identifier {name:?}")))?;
                    self.expect('(')?;
                    let mut args = vec![self.expr()?];
                    while self.peek_op() == Some(',') {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    if args.len() != arity {
                        return Err(Error::Expression(format!(
                            "{name} takes {arity} argument(s), got {}",
                            args.len()
                        )));
                    }
                    Ok(Node::Call(func, args))
                }
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(rho: f64, phi: f64) -> Vars {
        Vars { rho, phi, u: rho * phi.cos(), v: rho * phi.sin() }
    }

    #[test]
    fn precedence_and_associativity() {
        let x = at(2.0, 0.5);
        let cases = [
            ("1 + 2 * 3", 7.0),
            ("(1 + 2) * 3", 9.0),
            ("2 ^ 3 ^ 2", 512.0),
            ("-2 ^ 2", -4.0),
            ("8 / 4 / 2", 1.0),
            ("1e-3 * 1000", 1.0),
            ("rho * 3 - phi", 5.5),
            ("pow(rho, 3)", 8.0),
        ];
        for (src, expected) in cases {
            let e = Expr::parse(src).unwrap();
            assert!((e.eval(&x) - expected).abs() < 1e-14, "{src}");
        }
    }

    #[test]
    fn functions_and_unicode_names() {
        let x = at(1.5, -0.3);
        let e = Expr::parse("0.5*ln(ρ) + sin(φ)^2 + cos(phi)^2").unwrap();
        assert!((e.eval(&x) - (0.5 * 1.5f64.ln() + 1.0)).abs() < 1e-14);
        let e = Expr::parse("u^2 - v^2").unwrap();
        assert!((e.eval(&x) - (x.u * x.u - x.v * x.v)).abs() < 1e-14);
        let e = Expr::parse("atan2(v, u) - phi").unwrap();
        assert!(e.eval(&x).abs() < 1e-14);
    }

    #[test]
    fn errors() {
        for bad in ["", "1 +", "foo(1)", "sin(1, 2)", "(1", "1 $ 2", "rho rho"] {
            assert!(matches!(Expr::parse(bad), Err(Error::Expression(_))), "{bad}");
        }
    }

    #[test]
    fn serde_uses_source_text() {
        let e = Expr::parse("2*ln(rho)").unwrap();
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, "\"2*ln(rho)\"");
        let back: Expr = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
    }
}

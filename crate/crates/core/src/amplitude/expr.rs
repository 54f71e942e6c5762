//! A small arithmetic language over the variables `p` and `q`.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'p' | 'q' | func '(' expr ')' | '(' expr ')'
//! func  := exp | sin | cos | sinc | sqrt | abs
//! ```
//!
//! `^` binds tighter than unary minus, so `-(p+q)^2` is `−((p+q)²)`. Parsed
//! expressions compile to a postfix program evaluated with a fixed-size stack.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    P,
    Q,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sinc,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinc" => Func::Sinc,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinc => "sinc",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => math::exp(x),
            Func::Sin => math::sin(x),
            Func::Cos => math::cos(x),
            Func::Sinc => math::sinc(x),
            Func::Sqrt => math::sqrt(x),
            Func::Abs => x.abs(),
        }
    }
}

/// Syntax tree. `Display` renders it back to source that parses to an equal
/// tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Neg(_) => 3,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Var(Var::P) => f.write_str("p"),
            Expr::Var(Var::Q) => f.write_str("q"),
            Expr::Neg(inner) => {
                f.write_str("-")?;
                wrapped(f, inner, inner.precedence() < 3)
            }
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
            Expr::Binary(op, lhs, rhs) => {
                let prec = op.precedence();
                if *op == BinOp::Pow {
                    wrapped(f, lhs, lhs.precedence() <= prec)?;
                    write!(f, "{}", op.symbol())?;
                    wrapped(f, rhs, rhs.precedence() < 3)
                } else {
                    wrapped(f, lhs, lhs.precedence() < prec)?;
                    write!(f, "{}", op.symbol())?;
                    wrapped(f, rhs, rhs.precedence() <= prec)
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push((i, Token::Op(c as char)));
                i += 1;
            }
            b'(' => {
                out.push((i, Token::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Token::RParen));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                if !value.is_finite() {
                    return Err(Error::Syntax {
                        offset: start,
                        message: format!("number `{text}` is out of range"),
                    });
                }
                out.push((start, Token::Num(value)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Token::Ident(src[start..i].to_string())));
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    offset: i,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.offset(),
            message: message.to_string(),
        }
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Token::Op(c)) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c) = self.eat_op(&['+', '-']) {
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.eat_op(&['*', '/']) {
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.eat_op(&['-', '+']) {
            Some('-') => Ok(Expr::Neg(Box::new(self.unary()?))),
            Some(_) => self.unary(),
            None => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat_op(&['^']).is_some() {
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let offset = self.offset();
        let token = match self.tokens.get(self.pos) {
            Some((_, t)) => t.clone(),
            None => return Err(self.error("unexpected end of input, expected an operand")),
        };
        match token {
            Token::Num(x) => {
                self.pos += 1;
                Ok(Expr::Num(x))
            }
            Token::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::Ident(name) => {
                self.pos += 1;
                match name.as_str() {
                    "p" => return Ok(Expr::Var(Var::P)),
                    "q" => return Ok(Expr::Var(Var::Q)),
                    _ => {}
                }
                let func = Func::from_name(&name).ok_or(Error::UnknownIdentifier { name, offset })?;
                if self.peek() != Some(&Token::LParen) {
                    return Err(self.error("expected `(` after function name"));
                }
                self.pos += 1;
                let arg = self.expr()?;
                self.expect_rparen()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Token::Op(_) | Token::RParen => Err(self.error("expected an operand")),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.peek() == Some(&Token::RParen) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error("expected `)`"))
        }
    }
}

/// Parses `src` into a syntax tree.
pub fn parse(src: &str) -> Result<Expr> {
    let tokens = tokenize(src)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: src.len(),
    };
    let expr = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(expr)
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Instr {
    Const(f64),
    Load(Var),
    Neg,
    Bin(BinOp),
    Call(Func),
}

/// Postfix form of an [`Expr`]; evaluation is linear in its length.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    code: Vec<Instr>,
    max_depth: usize,
}

impl Program {
    pub fn compile(expr: &Expr) -> Self {
        fn emit(e: &Expr, code: &mut Vec<Instr>, depth: usize, max: &mut usize) {
            *max = (*max).max(depth + 1);
            match e {
                Expr::Num(x) => code.push(Instr::Const(*x)),
                Expr::Var(v) => code.push(Instr::Load(*v)),
                Expr::Neg(a) => {
                    emit(a, code, depth, max);
                    code.push(Instr::Neg);
                }
                Expr::Call(func, a) => {
                    emit(a, code, depth, max);
                    code.push(Instr::Call(*func));
                }
                Expr::Binary(op, a, b) => {
                    emit(a, code, depth, max);
                    emit(b, code, depth + 1, max);
                    code.push(Instr::Bin(*op));
                }
            }
        }
        let mut code = Vec::new();
        let mut max_depth = 0;
        emit(expr, &mut code, 0, &mut max_depth);
        Program { code, max_depth }
    }

    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    /// Evaluates at `(p, q)`. A zero divisor is an error; other non-finite
    /// results (e.g. `sqrt(-1)`) are returned as-is for the caller to judge.
    pub fn eval(&self, p: f64, q: f64) -> Result<f64> {
        let mut stack: Vec<f64> = Vec::with_capacity(self.max_depth);
        for instr in &self.code {
            match *instr {
                Instr::Const(x) => stack.push(x),
                Instr::Load(Var::P) => stack.push(p),
                Instr::Load(Var::Q) => stack.push(q),
                Instr::Neg => {
                    let top = stack.last_mut().expect("compiled program underflow");
                    *top = -*top;
                }
                Instr::Call(func) => {
                    let top = stack.last_mut().expect("compiled program underflow");
                    *top = func.apply(*top);
                }
                Instr::Bin(op) => {
                    let b = stack.pop().expect("compiled program underflow");
                    let a = stack.last_mut().expect("compiled program underflow");
                    *a = match op {
                        BinOp::Add => *a + b,
                        BinOp::Sub => *a - b,
                        BinOp::Mul => *a * b,
                        BinOp::Div => {
                            if b == 0.0 {
                                return Err(Error::DivisionByZero);
                            }
                            *a / b
                        }
                        BinOp::Pow => pow_value(*a, b),
                    };
                }
            }
        }
        Ok(stack.pop().expect("compiled program leaves one value"))
    }
}

fn pow_value(base: f64, exponent: f64) -> f64 {
    // Small integer powers are plain products, so parity survives exactly.
    if libm::trunc(exponent) == exponent && exponent.abs() <= 64.0 {
        math::powi(base, exponent as i32)
    } else {
        math::pow(base, exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, p: f64, q: f64) -> f64 {
        Program::compile(&parse(src).unwrap()).eval(p, q).unwrap()
    }

    #[test]
    fn product_of_variables() {
        assert_eq!(eval("p*q", 2.0, 3.0), 6.0);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("1+2*3", 0.0, 0.0), 7.0);
        assert_eq!(eval("8-4-2", 0.0, 0.0), 2.0);
        assert_eq!(eval("2^3^2", 0.0, 0.0), 512.0);
        assert_eq!(eval("-2^2", 0.0, 0.0), -4.0);
        assert_eq!(eval("2^-1", 0.0, 0.0), 0.5);
        assert_eq!(eval("-(p+q)^2", 1.0, 2.0), -9.0);
        assert_eq!(eval("12/3/2", 0.0, 0.0), 2.0);
        assert_eq!(eval("1.5e1 + .5", 0.0, 0.0), 15.5);
    }

    #[test]
    fn functions() {
        assert_eq!(eval("sinc(0)", 0.0, 0.0), 1.0);
        assert_eq!(eval("abs(p-q)", 1.0, 4.0), 3.0);
        assert!((eval("exp(1)", 0.0, 0.0) - core::f64::consts::E).abs() < 1e-15);
        assert_eq!(eval("sqrt(16)", 0.0, 0.0), 4.0);
    }

    #[test]
    fn dangling_operator_reports_offset() {
        match parse("p**") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse("(p+q") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse(""), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse("p q"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("exp p"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("p # q"), Err(Error::Syntax { offset: 2, .. })));
    }

    #[test]
    fn unknown_identifier() {
        match parse("2*x") {
            Err(Error::UnknownIdentifier { name, offset }) => {
                assert_eq!(name, "x");
                assert_eq!(offset, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn division_by_zero_is_an_evaluation_error() {
        let prog = Program::compile(&parse("1/(p-q)").unwrap());
        assert_eq!(prog.eval(1.0, 1.0), Err(Error::DivisionByZero));
        assert_eq!(prog.eval(2.0, 1.0), Ok(1.0));
    }

    #[test]
    fn render_keeps_structure() {
        for src in ["a", "p-(q-1)", "(p+q)+1", "p+(q+1)", "(-p)^2", "-p^2", "2^(p+1)", "p/(q*2)", "-(-p)"] {
            let Ok(tree) = parse(src) else { continue };
            let rendered = tree.to_string();
            assert_eq!(parse(&rendered).unwrap(), tree, "{src} -> {rendered}");
        }
        assert_eq!(parse("p-(q-1)").unwrap().to_string(), "p-(q-1.0)");
        assert_eq!(parse("(p+q)+1").unwrap().to_string(), "p+q+1.0");
    }
}

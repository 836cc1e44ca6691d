//! Infix arithmetic expressions over the variables `x1, ..., xd`.
//!
//! Precedence, loosest first: `+ -`, `* /`, unary minus, `^`. The exponent
//! of `^`, `pow`, `tpow_plus` and `tpow_minus` must be an integer literal.

use std::fmt;

use crate::error::{Error, EvalError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// 0-based variable index.
    Var(usize),
    Neg(Box<Expr>),
    Exp(Box<Expr>),
    Abs(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    TpowPlus(Box<Expr>, u32),
    TpowMinus(Box<Expr>, u32),
}

/// `e^k` if `e >= 0`, else 0. With `k = 0` this is the indicator of `e >= 0`.
pub fn tpow_plus(e: f64, k: u32) -> f64 {
    if e >= 0.0 {
        e.powi(k as i32)
    } else {
        0.0
    }
}

/// `(-e)^k` if `e <= 0`, else 0.
pub fn tpow_minus(e: f64, k: u32) -> f64 {
    if e <= 0.0 {
        (-e).powi(k as i32)
    } else {
        0.0
    }
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Exp(e) => e.eval(x)?.exp(),
            Expr::Abs(e) => e.eval(x)?.abs(),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x)?, b.eval(x)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                }
            }
            Expr::Pow(e, k) => {
                let v = e.eval(x)?;
                if v == 0.0 && *k < 0 {
                    return Err(EvalError::DivisionByZero);
                }
                v.powi(*k)
            }
            Expr::TpowPlus(e, k) => tpow_plus(e.eval(x)?, *k),
            Expr::TpowMinus(e, k) => tpow_minus(e.eval(x)?, *k),
        })
    }

    /// Largest variable index used, 1-based (0 when the expression is constant).
    pub fn max_variable(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(e) | Expr::Exp(e) | Expr::Abs(e) | Expr::Pow(e, _) => e.max_variable(),
            Expr::TpowPlus(e, _) | Expr::TpowMinus(e, _) => e.max_variable(),
            Expr::Bin(_, a, b) => a.max_variable().max(b.max_variable()),
        }
    }
}

/// Canonical printer: every compound node is parenthesized, so printing and
/// re-parsing reproduces the tree exactly.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                    write!(f, "(-{:?})", -c)
                } else {
                    write!(f, "{c:?}")
                }
            }
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Exp(e) => write!(f, "exp({e})"),
            Expr::Abs(e) => write!(f, "abs({e})"),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                write!(f, "({a} {sym} {b})")
            }
            Expr::Pow(e, k) => write!(f, "pow({e}, {k})"),
            Expr::TpowPlus(e, k) => write!(f, "tpow_plus({e}, {k})"),
            Expr::TpowMinus(e, k) => write!(f, "tpow_minus({e}, {k})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    /// 1-based character column.
    pos: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s
                .parse()
                .map_err(|_| Error::Syntax { pos, msg: format!("malformed number `{s}`") })?;
            if !v.is_finite() {
                return Err(Error::Syntax { pos, msg: format!("number `{s}` is not finite") });
            }
            out.push(Token { tok: Tok::Num(v), pos });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), pos });
        } else if "+-*/^(),".contains(c) {
            out.push(Token { tok: Tok::Op(c), pos });
            i += 1;
        } else {
            return Err(Error::Syntax { pos, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
    arity: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.pos)
    }

    fn eat_op(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, c: char) -> Result<()> {
        if self.eat_op(c) {
            Ok(())
        } else {
            Err(Error::Syntax { pos: self.pos(), msg: format!("expected `{c}`") })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat_op('+') {
                BinOp::Add
            } else if self.eat_op('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat_op('*') {
                BinOp::Mul
            } else if self.eat_op('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_op('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat_op('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat_op('^') {
            let k = self.int_literal()?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn int_literal(&mut self) -> Result<i32> {
        let pos = self.pos();
        let neg = self.eat_op('-');
        let paren = !neg && self.eat_op('(');
        let inner_neg = paren && self.eat_op('-');
        let v = match self.peek() {
            Some(Tok::Num(v)) => *v,
            _ => return Err(Error::Syntax { pos, msg: "exponent must be an integer literal".into() }),
        };
        self.at += 1;
        if paren {
            self.expect_op(')')?;
        }
        if v.fract() != 0.0 || v.abs() > i32::MAX as f64 {
            return Err(Error::Syntax { pos, msg: format!("exponent {v} is not an integer") });
        }
        let k = v as i32;
        Ok(if neg || inner_neg { -k } else { k })
    }

    fn args(&mut self) -> Result<Vec<Vec<Token>>> {
        // Split the argument list at top-level commas without parsing yet.
        self.expect_op('(')?;
        let mut args = vec![Vec::new()];
        let mut depth = 0usize;
        loop {
            let Some(tok) = self.toks.get(self.at).cloned() else {
                return Err(Error::Syntax { pos: self.end, msg: "unclosed `(`".into() });
            };
            self.at += 1;
            match tok.tok {
                Tok::Op('(') => depth += 1,
                Tok::Op(')') if depth == 0 => break,
                Tok::Op(')') => depth -= 1,
                Tok::Op(',') if depth == 0 => {
                    args.push(Vec::new());
                    continue;
                }
                _ => {}
            }
            args.last_mut().unwrap().push(tok);
        }
        if args.len() == 1 && args[0].is_empty() {
            args.clear();
        }
        Ok(args)
    }

    fn sub_expr(&self, toks: Vec<Token>, pos: usize) -> Result<Expr> {
        if toks.is_empty() {
            return Err(Error::Syntax { pos, msg: "empty argument".into() });
        }
        let end = toks.last().map_or(pos, |t| t.pos + 1);
        let mut p = Parser { toks, at: 0, arity: self.arity, end };
        let e = p.expr()?;
        p.finish()?;
        Ok(e)
    }

    fn sub_int(&self, toks: Vec<Token>, pos: usize) -> Result<i32> {
        let end = toks.last().map_or(pos, |t| t.pos + 1);
        let mut p = Parser { toks, at: 0, arity: self.arity, end };
        let k = p.int_literal()?;
        p.finish()?;
        Ok(k)
    }

    fn call(&mut self, name: &str, pos: usize) -> Result<Expr> {
        let expected = match name {
            "exp" | "abs" => 1,
            "pow" | "tpow_plus" | "tpow_minus" => 2,
            _ => return Err(Error::UnknownIdentifier { pos, name: name.to_string() }),
        };
        let mut args = self.args()?;
        if args.len() != expected {
            return Err(Error::ArityMismatch { name: name.into(), expected, got: args.len() });
        }
        if expected == 1 {
            let e = Box::new(self.sub_expr(args.remove(0), pos)?);
            return Ok(if name == "exp" { Expr::Exp(e) } else { Expr::Abs(e) });
        }
        let k_toks = args.pop().unwrap();
        let e = Box::new(self.sub_expr(args.pop().unwrap(), pos)?);
        let k = self.sub_int(k_toks, pos)?;
        match name {
            "pow" => Ok(Expr::Pow(e, k)),
            _ if k < 0 => Err(Error::Syntax { pos, msg: format!("{name} exponent must be >= 0") }),
            "tpow_plus" => Ok(Expr::TpowPlus(e, k as u32)),
            _ => Ok(Expr::TpowMinus(e, k as u32)),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let Some(tok) = self.peek().cloned() else {
            return Err(Error::Syntax { pos, msg: "unexpected end of input".into() });
        };
        self.at += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect_op(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek() == Some(&Tok::Op('(')) {
                    return self.call(&name, pos);
                }
                if let Some(digits) = name.strip_prefix('x') {
                    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                        let index: usize = digits.parse().unwrap_or(usize::MAX);
                        if index == 0 || index > self.arity {
                            return Err(Error::VariableOutOfRange { pos, index, arity: self.arity });
                        }
                        return Ok(Expr::Var(index - 1));
                    }
                }
                Err(Error::UnknownIdentifier { pos, name })
            }
            Tok::Op(c) => Err(Error::Syntax { pos, msg: format!("unexpected `{c}`") }),
        }
    }

    fn finish(&self) -> Result<()> {
        if self.at < self.toks.len() {
            return Err(Error::Syntax { pos: self.pos(), msg: "trailing input".into() });
        }
        Ok(())
    }
}

/// Parses `text` as an expression in the variables `x1, ..., x{arity}`.
pub fn parse_expression(text: &str, arity: usize) -> Result<Expr> {
    if arity == 0 {
        return Err(Error::Invalid("arity must be at least 1".into()));
    }
    let toks = tokenize(text)?;
    let end = text.chars().count() + 1;
    let mut p = Parser { toks, at: 0, arity, end };
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

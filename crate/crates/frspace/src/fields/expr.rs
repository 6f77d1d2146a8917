//! Small analytic expression language for field definitions.
//!
//! Grammar (calculator precedence, `^` binds tightest and is
//! right-associative with constant integer exponents):
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?        -- exponent must fold to an integer
//! atom   := NUMBER | 'x'<index> | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | exp | log | sqrt | atan
//! ```

use crate::dual::Scalar;
use crate::error::{Error, Result};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Atan,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }
}

/// Expression AST over constants, coordinates `x1..xN`, arithmetic, integer
/// powers, and the six elementary functions.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based coordinate index (`x1` is index 0).
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Largest coordinate index used, plus one.
    pub fn max_dim(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.max_dim(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_dim().max(b.max_dim())
            }
        }
    }

    /// Evaluate over any scalar; domain violations are decided by the
    /// innermost real value so dual sweeps fail exactly where values do.
    pub fn eval<T: Scalar>(&self, xs: &[T]) -> std::result::Result<T, String> {
        match self {
            Expr::Num(v) => Ok(T::from_f64(*v)),
            Expr::Var(i) => Ok(xs[*i]),
            Expr::Neg(e) => Ok(-e.eval(xs)?),
            Expr::Add(a, b) => Ok(a.eval(xs)? + b.eval(xs)?),
            Expr::Sub(a, b) => Ok(a.eval(xs)? - b.eval(xs)?),
            Expr::Mul(a, b) => Ok(a.eval(xs)? * b.eval(xs)?),
            Expr::Div(a, b) => {
                let den = b.eval(xs)?;
                if den.value() == 0.0 {
                    return Err("division by zero".into());
                }
                Ok(a.eval(xs)? / den)
            }
            Expr::Pow(e, n) => {
                let base = e.eval(xs)?;
                if *n < 0 && base.value() == 0.0 {
                    return Err("zero raised to a negative power".into());
                }
                Ok(base.powi(*n))
            }
            Expr::Call(f, e) => {
                let v = e.eval(xs)?;
                match f {
                    Func::Sin => Ok(v.sin()),
                    Func::Cos => Ok(v.cos()),
                    Func::Exp => Ok(v.exp()),
                    Func::Atan => Ok(v.atan()),
                    Func::Log => {
                        if v.value() <= 0.0 {
                            Err(format!("log of non-positive value {}", v.value()))
                        } else {
                            Ok(v.ln())
                        }
                    }
                    Func::Sqrt => {
                        if v.value() <= 0.0 {
                            Err(format!("sqrt of non-positive value {}", v.value()))
                        } else {
                            Ok(v.sqrt())
                        }
                    }
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }

    fn fmt_child(&self, child: &Expr, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if child.precedence() < min_prec {
            write!(f, "({})", child)
        } else {
            write!(f, "{}", child)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{}", v),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => {
                write!(f, "-")?;
                self.fmt_child(e, 3, f)
            }
            Expr::Add(a, b) => {
                self.fmt_child(a, 1, f)?;
                write!(f, " + ")?;
                self.fmt_child(b, 2, f)
            }
            Expr::Sub(a, b) => {
                self.fmt_child(a, 1, f)?;
                write!(f, " - ")?;
                self.fmt_child(b, 2, f)
            }
            Expr::Mul(a, b) => {
                self.fmt_child(a, 2, f)?;
                write!(f, " * ")?;
                self.fmt_child(b, 3, f)
            }
            Expr::Div(a, b) => {
                self.fmt_child(a, 2, f)?;
                write!(f, " / ")?;
                self.fmt_child(b, 3, f)
            }
            Expr::Pow(e, n) => {
                self.fmt_child(e, 5, f)?;
                if *n < 0 {
                    write!(f, "^({})", n)
                } else {
                    write!(f, "^{}", n)
                }
            }
            Expr::Call(func, e) => write!(f, "{}({})", func.name(), e),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    location: String,
}

impl<'a> Lexer<'a> {
    fn err(&self, pos: usize, message: impl Into<String>) -> Error {
        Error::Syntax {
            location: self.location.clone(),
            column: pos + 1,
            message: message.into(),
        }
    }

    fn tokens(&mut self) -> Result<Vec<(Tok, usize)>> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let start = self.pos;
            let c = self.src[self.pos];
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    self.pos += 1;
                }
                b'+' => {
                    out.push((Tok::Plus, start));
                    self.pos += 1;
                }
                b'-' => {
                    out.push((Tok::Minus, start));
                    self.pos += 1;
                }
                b'*' => {
                    out.push((Tok::Star, start));
                    self.pos += 1;
                }
                b'/' => {
                    out.push((Tok::Slash, start));
                    self.pos += 1;
                }
                b'^' => {
                    out.push((Tok::Caret, start));
                    self.pos += 1;
                }
                b'(' => {
                    out.push((Tok::LParen, start));
                    self.pos += 1;
                }
                b')' => {
                    out.push((Tok::RParen, start));
                    self.pos += 1;
                }
                b'0'..=b'9' | b'.' => {
                    let mut end = self.pos;
                    let mut seen_e = false;
                    while end < self.src.len() {
                        let d = self.src[end];
                        if d.is_ascii_digit() || d == b'.' {
                            end += 1;
                        } else if (d == b'e' || d == b'E') && !seen_e {
                            seen_e = true;
                            end += 1;
                            if end < self.src.len() && (self.src[end] == b'+' || self.src[end] == b'-') {
                                end += 1;
                            }
                        } else {
                            break;
                        }
                    }
                    let text = std::str::from_utf8(&self.src[start..end]).unwrap();
                    let v: f64 = text
                        .parse()
                        .map_err(|_| self.err(start, format!("invalid number '{}'", text)))?;
                    out.push((Tok::Num(v), start));
                    self.pos = end;
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let mut end = self.pos;
                    while end < self.src.len()
                        && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                    {
                        end += 1;
                    }
                    let text = std::str::from_utf8(&self.src[start..end]).unwrap().to_string();
                    out.push((Tok::Ident(text), start));
                    self.pos = end;
                }
                other => {
                    return Err(self.err(start, format!("unexpected character '{}'", other as char)));
                }
            }
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    location: String,
    len: usize,
}

impl Parser {
    fn err_at(&self, message: impl Into<String>) -> Error {
        let column = self
            .toks
            .get(self.idx)
            .map(|(_, p)| p + 1)
            .unwrap_or(self.len + 1);
        Error::Syntax {
            location: self.location.clone(),
            column,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.idx += 1;
            Ok(())
        } else {
            Err(self.err_at(format!("expected {}", what)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.idx += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.idx += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.idx += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.idx += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Minus) {
            self.idx += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.idx += 1;
            // the exponent subtree must fold to an integer constant; parsing
            // it as a factor makes chained ^ right-associative
            let at = self.idx;
            let exp_expr = self.factor()?;
            let folded = fold_integer(&exp_expr).ok_or_else(|| {
                let column = self.toks.get(at).map(|(_, p)| p + 1).unwrap_or(self.len + 1);
                Error::Syntax {
                    location: self.location.clone(),
                    column,
                    message: "exponent must be an integer constant".into(),
                }
            })?;
            return Ok(Expr::Pow(Box::new(base), folded));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::Ident(name)) => {
                if let Some(rest) = name.strip_prefix('x') {
                    if let Ok(i) = rest.parse::<usize>() {
                        if i == 0 {
                            self.idx -= 1;
                            return Err(self.err_at("coordinates are numbered from x1"));
                        }
                        return Ok(Expr::Var(i - 1));
                    }
                }
                let func = match name.as_str() {
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    "log" => Func::Log,
                    "sqrt" => Func::Sqrt,
                    "atan" => Func::Atan,
                    _ => {
                        self.idx -= 1;
                        return Err(self.err_at(format!("unknown identifier '{}'", name)));
                    }
                };
                self.expect(Tok::LParen, "'(' after function name")?;
                let arg = self.expr()?;
                self.expect(Tok::RParen, "closing ')'")?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "closing ')'")?;
                Ok(e)
            }
            Some(_) => {
                self.idx -= 1;
                Err(self.err_at("expected a number, coordinate, function, or '('"))
            }
            None => Err(self.err_at("unexpected end of expression")),
        }
    }
}

fn fold_integer(e: &Expr) -> Option<i32> {
    match e {
        Expr::Num(v) => {
            if v.fract() == 0.0 && v.abs() <= 64.0 {
                Some(*v as i32)
            } else {
                None
            }
        }
        Expr::Neg(inner) => fold_integer(inner).map(|n| -n),
        Expr::Pow(base, n) => {
            let b = fold_integer(base)?;
            if *n < 0 || *n > 16 {
                return None;
            }
            let v = (b as i64).checked_pow(*n as u32)?;
            i32::try_from(v).ok().filter(|x| x.abs() <= 64)
        }
        _ => None,
    }
}

/// Parse one expression; `location` names the source slot for diagnostics.
pub fn parse_expr(text: &str, location: &str) -> Result<Expr> {
    let mut lexer = Lexer {
        src: text.as_bytes(),
        pos: 0,
        location: location.to_string(),
    };
    let toks = lexer.tokens()?;
    let mut parser = Parser {
        toks,
        idx: 0,
        location: location.to_string(),
        len: text.len(),
    };
    let e = parser.expr()?;
    if parser.idx != parser.toks.len() {
        return Err(parser.err_at("trailing input after expression"));
    }
    Ok(e)
}

//! Recursive-descent parser for entry formulas.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := base ('^' unary)?
//! base  := number | var | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-2^2 = -4`
//! and `2^-1 = 0.5`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    I,
    J,
    X,
    Y,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::I => "i",
            Var::J => "j",
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Min,
    Max,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Exp => 1,
            Func::Min | Func::Max => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    /// Evaluates with `a` bound to `i`/`x` and `b` bound to `j`/`y`.
    pub fn eval(&self, a: f64, b: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::I | Var::X) => a,
            Expr::Var(Var::J | Var::Y) => b,
            Expr::Neg(e) => -e.eval(a, b),
            Expr::Bin(op, l, r) => {
                let (l, r) = (l.eval(a, b), r.eval(a, b));
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                    BinOp::Pow => l.powf(r),
                }
            }
            Expr::Call(f, args) => {
                let v: Vec<f64> = args.iter().map(|e| e.eval(a, b)).collect();
                match f {
                    Func::Exp => v[0].exp(),
                    Func::Min => v[0].min(v[1]),
                    Func::Max => v[0].max(v[1]),
                }
            }
        }
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Neg(e) => e.visit_vars(f),
            Expr::Bin(_, l, r) => {
                l.visit_vars(f);
                r.visit_vars(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|e| e.visit_vars(f)),
        }
    }

    /// Fully parenthesized rendering that parses back to the same tree.
    pub fn pretty(&self) -> String {
        match self {
            Expr::Num(v) => format!("{v:?}"),
            Expr::Var(v) => v.name().to_string(),
            Expr::Neg(e) => format!("(-{})", e.pretty()),
            Expr::Bin(op, l, r) => format!("({} {} {})", l.pretty(), op.symbol(), r.pretty()),
            Expr::Call(f, args) => format!(
                "{}({})",
                f.name(),
                args.iter().map(Expr::pretty).collect::<Vec<_>>().join(", ")
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = bytes[pos];
        if c.is_ascii_whitespace() {
            pos += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = pos;
            while pos < bytes.len() && (bytes[pos].is_ascii_digit() || bytes[pos] == b'.') {
                pos += 1;
            }
            if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
                let mut q = pos + 1;
                if q < bytes.len() && (bytes[q] == b'+' || bytes[q] == b'-') {
                    q += 1;
                }
                if q < bytes.len() && bytes[q].is_ascii_digit() {
                    while q < bytes.len() && bytes[q].is_ascii_digit() {
                        q += 1;
                    }
                    pos = q;
                }
            }
            let text = &src[start..pos];
            let v: f64 = text.parse().map_err(|_| Error::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("number `{text}` is out of range"),
                });
            }
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = pos;
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            out.push((Tok::Ident(src[start..pos].to_string()), start));
        } else if b"+-*/^(),".contains(&c) {
            out.push((Tok::Sym(c as char), pos));
            pos += 1;
        } else {
            let ch = src[pos..].chars().next().unwrap_or('?');
            return Err(Error::Syntax {
                offset: pos,
                message: format!("unexpected character `{ch}`"),
            });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Sym('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        let offset = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let var = match name.as_str() {
                    "i" => Some(Var::I),
                    "j" => Some(Var::J),
                    "x" => Some(Var::X),
                    "y" => Some(Var::Y),
                    _ => None,
                };
                if let Some(v) = var {
                    return Ok(Expr::Var(v));
                }
                let func = match name.as_str() {
                    "exp" => Func::Exp,
                    "min" => Func::Min,
                    "max" => Func::Max,
                    _ => return Err(Error::UnknownIdentifier { name, offset }),
                };
                self.expect('(')?;
                let mut args = vec![self.expr()?];
                while *self.peek() == Tok::Sym(',') {
                    self.bump();
                    args.push(self.expr()?);
                }
                if args.len() != func.arity() {
                    return Err(Error::Syntax {
                        offset,
                        message: format!(
                            "{} takes {} argument(s), got {}",
                            func.name(),
                            func.arity(),
                            args.len()
                        ),
                    });
                }
                self.expect(')')?;
                Ok(Expr::Call(func, args))
            }
            Tok::End => Err(Error::Syntax {
                offset,
                message: "unexpected end of input".into(),
            }),
            Tok::Sym(c) => Err(Error::Syntax {
                offset,
                message: format!("unexpected `{c}`"),
            }),
        }
    }
}

/// Parses `src` into an expression tree without any domain checks.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: tokenize(src)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

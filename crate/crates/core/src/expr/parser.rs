//! Recursive-descent parser for the component grammar:
//!
//! ```text
//! function  := component (";" component)*
//! expr      := term (("+" | "-") term)*
//! term      := factor (("*" | "/") factor)*
//! factor    := "-" factor | base ("^" integer)?
//! base      := number | "x" integer | "(" expr ")" | func "(" expr ")"
//! func      := "sin" | "cos" | "exp" | "log" | "sqrt"
//! ```
//!
//! Offsets in errors count characters from the start of the source.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based variable index.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
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
    Semi,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        offset,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<(Vec<Token>, usize)> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            // ASCII hyphen and the Unicode minus sign are both accepted.
            '-' | '\u{2212}' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ';' => Tok::Semi,
            c if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text: String = chars[i..j].iter().collect();
                let value: f64 = text
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{text}`")))?;
                i = j;
                out.push(Token {
                    tok: Tok::Num(value),
                    offset: start,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_alphanumeric() {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                i = j;
                out.push(Token {
                    tok: Tok::Ident(text),
                    offset: start,
                });
                continue;
            }
            other => return Err(syntax(start, format!("unexpected character `{other}`"))),
        };
        i += 1;
        out.push(Token { tok, offset: start });
    }
    Ok((out, chars.len()))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.offset)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(syntax(self.offset(), format!("expected {what}"))),
            None => Err(syntax(self.end, format!("expected {what}, found end of input"))),
        }
    }

    fn function(&mut self) -> Result<Vec<Expr>> {
        let mut comps = vec![self.expr()?];
        while let Some(Tok::Semi) = self.peek() {
            self.pos += 1;
            comps.push(self.expr()?);
        }
        if self.pos < self.tokens.len() {
            return Err(syntax(self.offset(), "unexpected token"));
        }
        Ok(comps)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
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
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let negative = if let Some(Tok::Minus) = self.peek() {
                self.pos += 1;
                true
            } else {
                false
            };
            let at = self.offset();
            match self.bump() {
                Some(Token {
                    tok: Tok::Num(v), ..
                }) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => {
                    let n = v as i32;
                    return Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }));
                }
                Some(_) => return Err(syntax(at, "exponent must be an integer literal")),
                None => return Err(syntax(self.end, "expected integer exponent, found end of input")),
            }
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.bump() {
            Some(Token {
                tok: Tok::Num(v), ..
            }) => Ok(Expr::Num(v)),
            Some(Token {
                tok: Tok::LParen, ..
            }) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Token {
                tok: Tok::Ident(name),
                offset,
            }) => {
                if let Some(f) = Func::from_name(&name) {
                    self.expect(Tok::LParen, "`(` after function name")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                if let Some(idx) = name.strip_prefix('x') {
                    if let Ok(k) = idx.parse::<usize>() {
                        if k >= 1 && k <= self.dim && !idx.starts_with('0') {
                            return Ok(Expr::Var(k - 1));
                        }
                    }
                }
                Err(Error::UnknownIdentifier { name, offset })
            }
            Some(_) => Err(syntax(at, "expected number, variable, function or `(`")),
            None => Err(syntax(self.end, "unexpected end of input")),
        }
    }
}

/// Parses `src` into one expression per `;`-separated component.
pub fn parse_components(src: &str, dim: usize) -> Result<Vec<Expr>> {
    let (tokens, end) = lex(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end,
        dim,
    };
    p.function()
}

//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" "-"? integer)?
//! primary := number | ident | ident "(" expr ")" | "(" expr ")"
//! ident   := [A-Za-z_][A-Za-z0-9_]*
//! number  := digits ("." digits)? (("e" | "E") ("+" | "-")? digits)?
//! ```
//!
//! Functions: `exp log sin cos sqrt` (real or complex argument) and the
//! complex surface forms `re im abs2 conj`. An identifier is either a complex
//! coordinate name or one of its real/imaginary aliases.

use super::ast::{Builder, Cx, ExprAst, Op};
use crate::error::{GkError, Result};

/// A complex coordinate as seen by the parser.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordSpec {
    pub name: String,
    pub re_alias: Option<String>,
    pub im_alias: Option<String>,
}

impl CoordSpec {
    pub fn new(name: &str) -> Self {
        CoordSpec {
            name: name.to_string(),
            re_alias: None,
            im_alias: None,
        }
    }

    pub fn with_aliases(name: &str, re: &str, im: &str) -> Self {
        CoordSpec {
            name: name.to_string(),
            re_alias: Some(re.to_string()),
            im_alias: Some(im.to_string()),
        }
    }
}

/// Names of the real variables, two per complex coordinate.
pub fn real_var_names(coords: &[CoordSpec]) -> Vec<String> {
    let mut names = Vec::with_capacity(2 * coords.len());
    for c in coords {
        names.push(c.re_alias.clone().unwrap_or_else(|| format!("re({})", c.name)));
        names.push(c.im_alias.clone().unwrap_or_else(|| format!("im({})", c.name)));
    }
    names
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(u8),
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, usize)> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || c == b'.' {
            let mut end = self.pos;
            while end < self.src.len() && (self.src[end].is_ascii_digit() || self.src[end] == b'.')
            {
                end += 1;
            }
            if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
                let mut k = end + 1;
                if k < self.src.len() && (self.src[k] == b'+' || self.src[k] == b'-') {
                    k += 1;
                }
                if k < self.src.len() && self.src[k].is_ascii_digit() {
                    while k < self.src.len() && self.src[k].is_ascii_digit() {
                        k += 1;
                    }
                    end = k;
                }
            }
            let text = std::str::from_utf8(&self.src[start..end]).unwrap_or("");
            let v: f64 = text.parse().map_err(|_| GkError::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            self.pos = end;
            return Ok((Tok::Num(v), start));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut end = self.pos;
            while end < self.src.len()
                && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
            {
                end += 1;
            }
            let name = String::from_utf8_lossy(&self.src[start..end]).into_owned();
            self.pos = end;
            return Ok((Tok::Ident(name), start));
        }
        if b"+-*/^(),".contains(&c) {
            self.pos += 1;
            return Ok((Tok::Sym(c), start));
        }
        Err(GkError::Syntax {
            offset: start,
            message: format!("unexpected character `{}`", c as char),
        })
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    tok: Tok,
    at: usize,
    coords: &'a [CoordSpec],
    b: Builder,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<()> {
        let (t, at) = self.lex.next()?;
        self.tok = t;
        self.at = at;
        Ok(())
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(GkError::Syntax {
            offset: self.at,
            message: message.into(),
        })
    }

    fn expect(&mut self, sym: u8) -> Result<()> {
        if self.tok == Tok::Sym(sym) {
            self.bump()
        } else {
            self.err(format!("expected `{}`", sym as char))
        }
    }

    fn expr(&mut self) -> Result<Cx> {
        let mut acc = self.term()?;
        loop {
            match self.tok {
                Tok::Sym(b'+') => {
                    self.bump()?;
                    let rhs = self.term()?;
                    acc = self.b.c_add(acc, rhs);
                }
                Tok::Sym(b'-') => {
                    self.bump()?;
                    let rhs = self.term()?;
                    acc = self.b.c_sub(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Cx> {
        let mut acc = self.unary()?;
        loop {
            match self.tok {
                Tok::Sym(b'*') => {
                    self.bump()?;
                    let rhs = self.unary()?;
                    acc = self.b.c_mul(acc, rhs);
                }
                Tok::Sym(b'/') => {
                    self.bump()?;
                    let rhs = self.unary()?;
                    acc = self.b.c_div(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Cx> {
        if self.tok == Tok::Sym(b'-') {
            self.bump()?;
            let v = self.unary()?;
            return Ok(self.b.c_neg(v));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Cx> {
        let base = self.primary()?;
        if self.tok != Tok::Sym(b'^') {
            return Ok(base);
        }
        self.bump()?;
        let negative = if self.tok == Tok::Sym(b'-') {
            self.bump()?;
            true
        } else {
            false
        };
        let n = match self.tok {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= 64.0 => v as i32,
            _ => return self.err("integer exponent expected"),
        };
        self.bump()?;
        Ok(self.b.c_pow(base, if negative { -n } else { n }))
    }

    fn primary(&mut self) -> Result<Cx> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                let k = self.b.konst(v);
                Ok(self.b.real(k))
            }
            Tok::Sym(b'(') => {
                self.bump()?;
                let v = self.expr()?;
                self.expect(b')')?;
                Ok(v)
            }
            Tok::Ident(name) => {
                let at = self.at;
                self.bump()?;
                if self.tok == Tok::Sym(b'(') {
                    self.bump()?;
                    let arg = self.expr()?;
                    if self.tok == Tok::Sym(b',') {
                        return self.err(format!("`{name}` takes one argument"));
                    }
                    self.expect(b')')?;
                    return self.call(&name, arg, at);
                }
                self.ident(&name, at)
            }
            Tok::End => self.err("unexpected end of input"),
            Tok::Sym(c) => self.err(format!("unexpected `{}`", c as char)),
        }
    }

    fn call(&mut self, name: &str, arg: Cx, at: usize) -> Result<Cx> {
        let b = &mut self.b;
        Ok(match name {
            "exp" => b.c_exp(arg),
            "log" => b.c_log(arg),
            "sin" => b.c_sin(arg),
            "cos" => b.c_cos(arg),
            "sqrt" => b.c_sqrt(arg),
            "re" => Cx {
                re: arg.re,
                im: None,
            },
            "im" => {
                let re = match arg.im {
                    Some(i) => i,
                    None => b.konst(0.0),
                };
                Cx { re, im: None }
            }
            "abs2" => {
                let re = b.c_abs2(arg);
                Cx { re, im: None }
            }
            "conj" => b.c_conj(arg),
            _ => {
                return Err(GkError::UnknownIdentifier {
                    name: name.to_string(),
                    offset: at,
                })
            }
        })
    }

    fn ident(&mut self, name: &str, at: usize) -> Result<Cx> {
        for (k, c) in self.coords.iter().enumerate() {
            if c.name == name {
                let re = self.b.push(Op::Var(2 * k));
                let im = self.b.push(Op::Var(2 * k + 1));
                return Ok(Cx { re, im: Some(im) });
            }
            if c.re_alias.as_deref() == Some(name) {
                let re = self.b.push(Op::Var(2 * k));
                return Ok(Cx { re, im: None });
            }
            if c.im_alias.as_deref() == Some(name) {
                let re = self.b.push(Op::Var(2 * k + 1));
                return Ok(Cx { re, im: None });
            }
        }
        Err(GkError::UnknownIdentifier {
            name: name.to_string(),
            offset: at,
        })
    }
}

/// Parses `text` over the given complex coordinates and lowers it to real
/// variables (`2k` = real part, `2k+1` = imaginary part of coordinate `k`).
pub fn parse(text: &str, coords: &[CoordSpec]) -> Result<ExprAst> {
    let mut p = Parser {
        lex: Lexer {
            src: text.as_bytes(),
            pos: 0,
        },
        tok: Tok::End,
        at: 0,
        coords,
        b: Builder::default(),
    };
    p.bump()?;
    let v = p.expr()?;
    if p.tok != Tok::End {
        return p.err("unexpected trailing input");
    }
    Ok(p.b.finish(v, real_var_names(coords)))
}

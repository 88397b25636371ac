//! Line-oriented vector-field definition format.
//!
//! ```text
//! # comment
//! vars: u v
//! params: a b
//! eq: -(u + a*v^3)
//! eq: -(v + b*u^3)
//! ```
//!
//! Exactly one `vars:` and one `params:` line (which may be empty) come
//! before the `eq:` lines; there is one `eq:` line per variable.

use std::collections::HashMap;

use thiserror::Error;

use super::{Expr, FieldError, VectorField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}, column {column}: unknown identifier `{name}`")]
    UnknownIdentifier { line: usize, column: usize, name: String },
    #[error("no `eq:` lines")]
    NoComponents,
    #[error(transparent)]
    Field(#[from] FieldError),
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, column, message: message.into() }
}

/// Parse the text format into a [`VectorField`].
pub fn parse_vector_field(text: &str) -> Result<VectorField, ParseError> {
    let mut vars: Option<Vec<String>> = None;
    let mut params: Option<Vec<String>> = None;
    let mut eqs: Vec<(usize, usize, &str)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let indent = content.len() - trimmed.len();
        let Some((head, body)) = trimmed.split_once(':') else {
            return Err(syntax(line, indent + 1, "expected `vars:`, `params:` or `eq:`"));
        };
        let body_col = indent + head.len() + 2;
        match head.trim() {
            "vars" | "params" => {
                if !eqs.is_empty() {
                    return Err(syntax(line, indent + 1, format!("`{}:` must precede all `eq:` lines", head.trim())));
                }
                let slot = if head.trim() == "vars" { &mut vars } else { &mut params };
                if slot.is_some() {
                    return Err(syntax(line, indent + 1, format!("second `{}:` line", head.trim())));
                }
                let mut names = Vec::new();
                let mut col = body_col;
                for word in body.split(' ') {
                    if !word.is_empty() {
                        let word_t = word.trim();
                        if !is_identifier(word_t) {
                            return Err(syntax(line, col, format!("`{word_t}` is not an identifier")));
                        }
                        names.push(word_t.to_string());
                    }
                    col += word.len() + 1;
                }
                *slot = Some(names);
            }
            "eq" => {
                if vars.is_none() || params.is_none() {
                    return Err(syntax(line, indent + 1, "`vars:` and `params:` must precede `eq:`"));
                }
                eqs.push((line, body_col, body));
            }
            other => return Err(syntax(line, indent + 1, format!("unknown directive `{other}:`"))),
        }
    }

    let vars = vars.ok_or_else(|| syntax(1, 1, "missing `vars:` line"))?;
    let params = params.ok_or_else(|| syntax(1, 1, "missing `params:` line"))?;
    if eqs.is_empty() {
        return Err(ParseError::NoComponents);
    }

    let mut scope: HashMap<&str, Expr> = HashMap::new();
    for (i, v) in vars.iter().enumerate() {
        if scope.insert(v, Expr::var(i)).is_some() {
            return Err(FieldError::DuplicateIdentifier(v.clone()).into());
        }
    }
    for (i, p) in params.iter().enumerate() {
        if scope.insert(p, Expr::param(i)).is_some() {
            return Err(FieldError::DuplicateIdentifier(p.clone()).into());
        }
    }

    let mut components = Vec::with_capacity(eqs.len());
    for (line, col, body) in eqs {
        let mut p = ExprParser { src: body.as_bytes(), pos: 0, line, col0: col, scope: &scope };
        let e = p.expression()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        components.push(e);
    }
    Ok(VectorField::new("field", vars, params, components)?)
}

/// Parse a single expression against the given names.
pub fn parse_expression(text: &str, vars: &[String], params: &[String]) -> Result<Expr, ParseError> {
    let mut scope: HashMap<&str, Expr> = HashMap::new();
    for (i, v) in vars.iter().enumerate() {
        scope.insert(v, Expr::var(i));
    }
    for (i, v) in params.iter().enumerate() {
        scope.insert(v, Expr::param(i));
    }
    let mut p = ExprParser { src: text.as_bytes(), pos: 0, line: 1, col0: 1, scope: &scope };
    let e = p.expression()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col0: usize,
    scope: &'a HashMap<&'a str, Expr>,
}

impl ExprParser<'_> {
    fn error(&self, msg: impl Into<String>) -> ParseError {
        syntax(self.line, self.col0 + self.pos, msg)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expression(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            terms.push(if c == b'-' { t.neg() } else { t });
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if c == b'*' { &acc * &rhs } else { Expr::quotient(&acc, &rhs) };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let k = self.exponent()?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let paren = self.peek() == Some(b'(');
        if paren {
            self.pos += 1;
        }
        let mut sign = 1i64;
        while let Some(c @ (b'-' | b'+')) = self.peek() {
            self.pos += 1;
            if c == b'-' {
                sign = -sign;
            }
        }
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("exponent must be an integer literal"));
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'.' | b'e' | b'E') {
            return Err(self.error("exponent must be an integer literal"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let k: i64 = digits.parse().map_err(|_| self.error("exponent out of range"))?;
        let k = i32::try_from(sign * k).map_err(|_| self.error("exponent out of range"))?;
        if paren {
            if self.peek() != Some(b')') {
                return Err(self.error("expected `)`"));
            }
            self.pos += 1;
        }
        Ok(k)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expression()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                self.scope.get(name).cloned().ok_or_else(|| ParseError::UnknownIdentifier {
                    line: self.line,
                    column: self.col0 + start,
                    name: name.to_string(),
                })
            }
            Some(c) => Err(self.error(format!("unexpected character `{}`", c as char))),
            None => Err(self.error("unexpected end of expression")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            digits(self);
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if exp_start == self.pos {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let v: f64 = text
            .parse()
            .map_err(|_| syntax(self.line, self.col0 + start, format!("malformed number `{text}`")))?;
        Ok(Expr::constant(v))
    }
}

use std::fmt;

use super::{Expr, ExprKind};

/// Infix rendering of an expression, optionally with declared names.
///
/// Output re-parses to a value-equal expression.
pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    vars: Option<&'a [String]>,
    params: Option<&'a [String]>,
}

impl<'a> ExprDisplay<'a> {
    pub fn anonymous(expr: &'a Expr) -> Self {
        ExprDisplay { expr, vars: None, params: None }
    }

    pub fn named(expr: &'a Expr, vars: &'a [String], params: &'a [String]) -> Self {
        ExprDisplay { expr, vars: Some(vars), params: Some(params) }
    }

    fn write(&self, e: &Expr, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        // precedence: 1 sum, 2 product, 3 unary, 4 power, 5 atom
        match e.kind() {
            ExprKind::Const(c) => {
                if *c < 0.0 && prec > 1 {
                    write!(f, "({c:?})")
                } else {
                    write!(f, "{c:?}")
                }
            }
            ExprKind::Var(i) => match self.vars.and_then(|v| v.get(*i)) {
                Some(n) => write!(f, "{n}"),
                None => write!(f, "x{}", i + 1),
            },
            ExprKind::Param(i) => match self.params.and_then(|v| v.get(*i)) {
                Some(n) => write!(f, "{n}"),
                None => write!(f, "p{}", i + 1),
            },
            ExprKind::Sum(ch) => {
                if prec > 1 {
                    write!(f, "(")?;
                }
                for (k, t) in ch.iter().enumerate() {
                    if k > 0 {
                        write!(f, " + ")?;
                    }
                    self.write(t, f, 2)?;
                }
                if prec > 1 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            ExprKind::Product(ch) => {
                if prec > 2 {
                    write!(f, "(")?;
                }
                for (k, t) in ch.iter().enumerate() {
                    if k > 0 {
                        write!(f, "*")?;
                    }
                    self.write(t, f, 3)?;
                }
                if prec > 2 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            ExprKind::Neg(a) => {
                write!(f, "(-")?;
                self.write(a, f, 3)?;
                write!(f, ")")
            }
            ExprKind::Quotient(n, d) => {
                write!(f, "(")?;
                self.write(n, f, 3)?;
                write!(f, "/")?;
                self.write(d, f, 5)?;
                write!(f, ")")
            }
            ExprKind::Pow(b, k) => {
                if prec > 4 {
                    write!(f, "(")?;
                }
                self.write(b, f, 5)?;
                if *k < 0 {
                    write!(f, "^({k})")?;
                } else {
                    write!(f, "^{k}")?;
                }
                if prec > 4 {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, f, 0)
    }
}

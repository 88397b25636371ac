use std::collections::HashMap;

use super::{Expr, ExprKind, Symbol};

impl Expr {
    /// Exact symbolic derivative with respect to `wrt`.
    pub fn differentiate(&self, wrt: Symbol) -> Expr {
        let mut memo = HashMap::new();
        diff(self, wrt, &mut memo)
    }

    /// Gradient with respect to each symbol in `wrt`, sharing one memo table.
    pub fn gradient(&self, wrt: &[Symbol]) -> Vec<Expr> {
        wrt.iter().map(|&s| self.differentiate(s)).collect()
    }
}

fn diff(e: &Expr, wrt: Symbol, memo: &mut HashMap<u64, Expr>) -> Expr {
    if !e.depends_on(wrt) {
        return Expr::zero();
    }
    if let Some(d) = memo.get(&e.id()) {
        return d.clone();
    }
    let d = match e.kind() {
        ExprKind::Const(_) => Expr::zero(),
        ExprKind::Var(_) | ExprKind::Param(_) => Expr::one(),
        ExprKind::Sum(ch) => Expr::sum(ch.iter().map(|c| diff(c, wrt, memo)).collect::<Vec<_>>()),
        ExprKind::Product(ch) => {
            let mut terms = Vec::with_capacity(ch.len());
            for (i, f) in ch.iter().enumerate() {
                let df = diff(f, wrt, memo);
                if df.is_zero() {
                    continue;
                }
                let mut factors = Vec::with_capacity(ch.len());
                factors.push(df);
                factors.extend(ch.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, g)| g.clone()));
                terms.push(Expr::product(factors));
            }
            Expr::sum(terms)
        }
        ExprKind::Neg(inner) => diff(inner, wrt, memo).neg(),
        ExprKind::Quotient(n, d) => {
            let dn = diff(n, wrt, memo);
            if !d.depends_on(wrt) {
                Expr::quotient(&dn, d)
            } else {
                let dd = diff(d, wrt, memo);
                let num = &dn * d - n * &dd;
                Expr::quotient(&num, &d.pow(2))
            }
        }
        ExprKind::Pow(b, k) => {
            let db = diff(b, wrt, memo);
            Expr::product([Expr::constant(*k as f64), b.pow(k - 1), db])
        }
    };
    memo.insert(e.id(), d.clone());
    d
}

//! Random expressions and checks shared by the property and acceptance
//! suites.
#![allow(dead_code)]

use catafind_core::expr::ExprDisplay;
use catafind_core::{parse_expression, Expr, Symbol};
use rand::Rng;

pub const NV: usize = 2;
pub const NP: usize = 2;

pub fn var_names() -> Vec<String> {
    (0..NV).map(|i| format!("x{i}")).collect()
}

pub fn param_names() -> Vec<String> {
    (0..NP).map(|i| format!("p{i}")).collect()
}

/// Random polynomial-rational expression in `x0, x1, p0, p1`. Divisions
/// are by `1 + q^2`, so the result is finite everywhere.
pub fn random_expr<R: Rng>(rng: &mut R, depth: u32) -> Expr {
    if depth == 0 || (depth < 3 && rng.random_bool(0.3)) {
        return match rng.random_range(0..4) {
            0 => Expr::var(rng.random_range(0..NV)),
            1 => Expr::param(rng.random_range(0..NP)),
            2 => Expr::constant(rng.random_range(-6..=6) as f64 / 2.0),
            _ => Expr::var(rng.random_range(0..NV)) * Expr::param(rng.random_range(0..NP)),
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.random_range(0..6) {
        0 => a + random_expr(rng, depth - 1),
        1 => a - random_expr(rng, depth - 1),
        2 => a * random_expr(rng, depth - 1),
        3 => a.pow(rng.random_range(2..=3)),
        4 => {
            let q = random_expr(rng, depth - 1);
            Expr::quotient(&a, &(Expr::one() + q.pow(2)))
        }
        _ => -a,
    }
}

pub fn random_values<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Central difference of `e` along `s` against its symbolic derivative.
/// Returns `(symbolic, finite difference, scale)`.
pub fn fd_pair(e: &Expr, s: Symbol, x: &[f64], p: &[f64]) -> (f64, f64, f64) {
    let (mut xp, mut xm, mut pp, mut pm) = (x.to_vec(), x.to_vec(), p.to_vec(), p.to_vec());
    let at = match s {
        Symbol::Var(i) => x[i],
        Symbol::Param(i) => p[i],
    };
    let h = 1e-6 * (at.abs() + 1.0);
    match s {
        Symbol::Var(i) => {
            xp[i] += h;
            xm[i] -= h;
        }
        Symbol::Param(i) => {
            pp[i] += h;
            pm[i] -= h;
        }
    }
    let fd = (e.eval_at(&xp, &pp).unwrap() - e.eval_at(&xm, &pm).unwrap()) / (2.0 * h);
    let d = e.differentiate(s).eval_at(x, p).unwrap();
    // rounding in the difference quotient grows like |e| eps / h
    let scale = 1.0 + d.abs() + e.eval_at(x, p).unwrap().abs();
    (d, fd, scale)
}

pub fn fd_ok(e: &Expr, s: Symbol, x: &[f64], p: &[f64]) -> bool {
    let (d, fd, scale) = fd_pair(e, s, x, p);
    (d - fd).abs() <= 1e-5 * scale
}

pub fn print(e: &Expr) -> String {
    let (v, p) = (var_names(), param_names());
    ExprDisplay::named(e, &v, &p).to_string()
}

pub fn reparse(e: &Expr) -> Expr {
    parse_expression(&print(e), &var_names(), &param_names()).unwrap()
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

pub fn symbols() -> Vec<Symbol> {
    (0..NV).map(Symbol::Var).chain((0..NP).map(Symbol::Param)).collect()
}

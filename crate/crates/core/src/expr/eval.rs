use std::collections::HashMap;

use thiserror::Error;

use super::{Expr, ExprKind, Point};

#[derive(Debug, Clone, Error)]
pub enum EvalError {
    #[error("division by zero in `{subexpr}`")]
    DivisionByZero { subexpr: Expr },
    #[error("point has {got} {what}, expression needs at least {need}")]
    Dimension { what: &'static str, got: usize, need: usize },
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Var(usize),
    Param(usize),
    Sum { start: u32, len: u32 },
    Product { start: u32, len: u32 },
    Neg(u32),
    Div(u32, u32),
    Powi(u32, i32),
}

/// Flattened evaluation program for a set of expressions.
///
/// Shared subexpressions are evaluated once; slots are in topological order.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    args: Vec<u32>,
    outputs: Vec<u32>,
    nodes: Vec<Expr>,
    max_var: usize,
    max_param: usize,
}

impl Tape {
    pub fn compile(exprs: &[Expr]) -> Tape {
        let mut tape = Tape {
            ops: Vec::new(),
            args: Vec::new(),
            outputs: Vec::with_capacity(exprs.len()),
            nodes: Vec::new(),
            max_var: 0,
            max_param: 0,
        };
        let mut slot: HashMap<u64, u32> = HashMap::new();
        for e in exprs {
            let s = tape.emit(e, &mut slot);
            tape.outputs.push(s);
        }
        tape
    }

    fn emit(&mut self, root: &Expr, slot: &mut HashMap<u64, u32>) -> u32 {
        // iterative post-order so deep trees do not exhaust the stack
        let mut stack: Vec<(Expr, bool)> = vec![(root.clone(), false)];
        while let Some((e, expanded)) = stack.pop() {
            if slot.contains_key(&e.id()) {
                continue;
            }
            if !expanded {
                stack.push((e.clone(), true));
                for c in e.children() {
                    if !slot.contains_key(&c.id()) {
                        stack.push((c, false));
                    }
                }
                continue;
            }
            let op = match e.kind() {
                ExprKind::Const(c) => Op::Const(*c),
                ExprKind::Var(i) => {
                    self.max_var = self.max_var.max(i + 1);
                    Op::Var(*i)
                }
                ExprKind::Param(i) => {
                    self.max_param = self.max_param.max(i + 1);
                    Op::Param(*i)
                }
                ExprKind::Sum(ch) | ExprKind::Product(ch) => {
                    let start = self.args.len() as u32;
                    self.args.extend(ch.iter().map(|c| slot[&c.id()]));
                    let len = ch.len() as u32;
                    if matches!(e.kind(), ExprKind::Sum(_)) {
                        Op::Sum { start, len }
                    } else {
                        Op::Product { start, len }
                    }
                }
                ExprKind::Neg(a) => Op::Neg(slot[&a.id()]),
                ExprKind::Quotient(n, d) => Op::Div(slot[&n.id()], slot[&d.id()]),
                ExprKind::Pow(b, k) => Op::Powi(slot[&b.id()], *k),
            };
            slot.insert(e.id(), self.ops.len() as u32);
            self.ops.push(op);
            self.nodes.push(e);
        }
        slot[&root.id()]
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Evaluate every output at `(x, alpha)`, writing into `out`.
    pub fn eval_into(&self, x: &[f64], alpha: &[f64], scratch: &mut Vec<f64>, out: &mut [f64]) -> Result<(), EvalError> {
        self.run(x, alpha, scratch, false)?;
        for (o, &s) in out.iter_mut().zip(&self.outputs) {
            *o = scratch[s as usize];
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64], alpha: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut scratch = Vec::new();
        let mut out = vec![0.0; self.outputs.len()];
        self.eval_into(x, alpha, &mut scratch, &mut out)?;
        Ok(out)
    }

    pub fn eval_point(&self, p: &Point) -> Result<Vec<f64>, EvalError> {
        self.eval(&p.x, &p.alpha)
    }

    /// Evaluate with every sum replaced by a sum of magnitudes: a scale for
    /// the rounding error of the plain evaluation.
    pub fn magnitudes(&self, x: &[f64], alpha: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut scratch = Vec::new();
        self.run(x, alpha, &mut scratch, true)?;
        Ok(self.outputs.iter().map(|&s| scratch[s as usize]).collect())
    }

    fn run(&self, x: &[f64], alpha: &[f64], v: &mut Vec<f64>, abs: bool) -> Result<(), EvalError> {
        if x.len() < self.max_var {
            return Err(EvalError::Dimension { what: "variables", got: x.len(), need: self.max_var });
        }
        if alpha.len() < self.max_param {
            return Err(EvalError::Dimension { what: "parameters", got: alpha.len(), need: self.max_param });
        }
        v.clear();
        v.reserve(self.ops.len());
        for (i, op) in self.ops.iter().enumerate() {
            let val = match *op {
                Op::Const(c) => c,
                Op::Var(k) => x[k],
                Op::Param(k) => alpha[k],
                Op::Sum { start, len } => {
                    let args = &self.args[start as usize..(start + len) as usize];
                    if abs {
                        args.iter().map(|&a| v[a as usize].abs()).sum()
                    } else {
                        args.iter().map(|&a| v[a as usize]).sum()
                    }
                }
                Op::Product { start, len } => self.args[start as usize..(start + len) as usize]
                    .iter()
                    .map(|&a| v[a as usize])
                    .product(),
                Op::Neg(a) => -v[a as usize],
                Op::Div(n, d) => {
                    let den = v[d as usize];
                    if den == 0.0 {
                        return Err(EvalError::DivisionByZero { subexpr: self.nodes[i].clone() });
                    }
                    v[n as usize] / den
                }
                Op::Powi(b, k) => {
                    let base = v[b as usize];
                    if k < 0 && base == 0.0 {
                        return Err(EvalError::DivisionByZero { subexpr: self.nodes[i].clone() });
                    }
                    base.powi(k)
                }
            };
            v.push(if abs { val.abs() } else { val });
        }
        Ok(())
    }
}

impl Expr {
    /// Evaluate at `p` in double precision.
    pub fn evaluate(&self, p: &Point) -> Result<f64, EvalError> {
        Ok(Tape::compile(std::slice::from_ref(self)).eval_point(p)?[0])
    }

    /// Evaluate with raw coordinate slices.
    pub fn eval_at(&self, x: &[f64], alpha: &[f64]) -> Result<f64, EvalError> {
        Ok(Tape::compile(std::slice::from_ref(self)).eval(x, alpha)?[0])
    }
}

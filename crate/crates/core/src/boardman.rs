//! Minor counting for the Thom-Boardman construction and an explicit
//! iterated-minor chain for small fields.

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::determinants::sym_det;
use crate::expr::{EvalError, Expr, Point, Tape, VectorField};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoardmanError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("corank entry {value} at position {position} outside 1..={n}")]
    BadCorank { position: usize, value: usize, n: usize },
    #[error("stage {stage} would hold {predicted} expressions, above the cap of {cap}")]
    CapExceeded { stage: usize, predicted: String, cap: usize },
    #[error("field still has {0} free parameters; fix them first")]
    FreeParameters(usize),
    #[error("corank rose from {prev} to {next} at stage {stage}; tolerance too tight or too loose")]
    NonMonotone { stage: usize, prev: usize, next: usize },
    #[error("evaluation failed: {0}")]
    Eval(String),
}

impl From<EvalError> for BoardmanError {
    fn from(e: EvalError) -> Self {
        BoardmanError::Eval(e.to_string())
    }
}

fn decimal<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn decimals<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// Exact binomial coefficient.
pub fn binomial(n: &BigUint, k: usize) -> BigUint {
    if BigUint::from(k) > *n {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - BigUint::from(i)) / BigUint::from(i + 1);
    }
    acc
}

/// Per-stage minor counts `N_0 = n, N_1, ..., N_r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorCount {
    pub n: usize,
    pub coranks: Vec<usize>,
    #[serde(serialize_with = "decimals")]
    pub stages: Vec<BigUint>,
    /// `N_1 + ... + N_r`.
    #[serde(serialize_with = "decimal")]
    pub new_minors: BigUint,
    /// `n + N_1 + ... + N_r`, the size of the last stage.
    #[serde(serialize_with = "decimal")]
    pub total: BigUint,
}

impl MinorCount {
    /// Running stage sizes `N_0, N_0 + N_1, ...`.
    pub fn cumulative(&self) -> Vec<BigUint> {
        let mut acc = BigUint::zero();
        self.stages
            .iter()
            .map(|s| {
                acc += s;
                acc.clone()
            })
            .collect()
    }
}

/// `N_j = C(n, n-i_j+1) * C(N_0 + ... + N_{j-1}, n-i_j+1)` with `N_0 = n`.
pub fn minor_count(n: usize, coranks: &[usize]) -> Result<MinorCount, BoardmanError> {
    if n == 0 {
        return Err(BoardmanError::ZeroDimension);
    }
    if let Some((position, &value)) = coranks.iter().enumerate().find(|(_, &i)| i == 0 || i > n) {
        return Err(BoardmanError::BadCorank { position, value, n });
    }
    let nb = BigUint::from(n);
    let mut stages = vec![nb.clone()];
    let mut running = nb.clone();
    for &i in coranks {
        let m = n - i + 1;
        let nj = binomial(&nb, m) * binomial(&running, m);
        running += &nj;
        stages.push(nj);
    }
    Ok(MinorCount { n, coranks: coranks.to_vec(), new_minors: &running - &nb, total: running, stages })
}

/// Corank-one count for codimension `r`.
pub fn minor_count_corank_one(n: usize, r: usize) -> MinorCount {
    minor_count(n, &vec![1; r]).expect("corank one is always valid")
}

/// Conditions in the B formulation: the `n` components and `B_1 .. B_r`.
pub fn bg_condition_count(n: usize, r: usize) -> usize {
    n + r
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else { break };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out
}

/// Iterated extensions `F, [F, minors of grad F], ...`; parameters already fixed.
#[derive(Debug, Clone)]
pub struct DeltaChain {
    pub field: VectorField,
    pub coranks: Vec<usize>,
    /// `stages[0]` is `F`; each later stage extends the previous one.
    pub stages: Vec<Vec<Expr>>,
}

pub const DEFAULT_CAP: usize = 10_000;

fn require_fixed(f: &VectorField) -> Result<(), BoardmanError> {
    match f.num_params() {
        0 => Ok(()),
        k => Err(BoardmanError::FreeParameters(k)),
    }
}

fn gradient_rows(f: &VectorField, stage: &[Expr]) -> Vec<Vec<Expr>> {
    let vars = f.vars();
    stage.iter().map(|e| e.gradient(&vars)).collect()
}

/// All `m x m` minors of `rows`, row subsets outermost.
fn minors(rows: &[Vec<Expr>], n: usize, m: usize) -> Vec<Expr> {
    let row_sets = combinations(rows.len(), m);
    let col_sets = combinations(n, m);
    let mut out = Vec::with_capacity(row_sets.len() * col_sets.len());
    for rs in &row_sets {
        for cs in &col_sets {
            let sub: Vec<Vec<Expr>> = rs.iter().map(|&r| cs.iter().map(|&c| rows[r][c].clone()).collect()).collect();
            out.push(sym_det(&sub));
        }
    }
    out
}

fn predicted_size(n: usize, current: usize, corank: usize) -> BigUint {
    let m = n - corank + 1;
    BigUint::from(current) + binomial(&BigUint::from(n), m) * binomial(&BigUint::from(current), m)
}

fn extend(f: &VectorField, stage: &[Expr], corank: usize, index: usize, cap: usize) -> Result<Vec<Expr>, BoardmanError> {
    let n = f.dim();
    let predicted = predicted_size(n, stage.len(), corank);
    if predicted.to_usize().is_none_or(|p| p > cap) {
        return Err(BoardmanError::CapExceeded { stage: index, predicted: predicted.to_string(), cap });
    }
    let mut next = stage.to_vec();
    next.extend(minors(&gradient_rows(f, stage), n, n - corank + 1));
    Ok(next)
}

/// Build `depth` stages for the prescribed corank sequence.
pub fn build_delta_chain(f: &VectorField, coranks: &[usize], cap: usize) -> Result<DeltaChain, BoardmanError> {
    require_fixed(f)?;
    minor_count(f.dim(), coranks)?;
    let mut stages = vec![f.components().to_vec()];
    for (j, &i) in coranks.iter().enumerate() {
        let next = extend(f, &stages[j], i, j + 1, cap)?;
        stages.push(next);
    }
    Ok(DeltaChain { field: f.clone(), coranks: coranks.to_vec(), stages })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageInfo {
    /// Number of functions in the stage.
    pub size: usize,
    /// Corank of the stage's Jacobian at the point.
    pub corank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoardmanSymbol {
    /// `tau_1, tau_2, ...` up to, not including, the first zero.
    pub symbol: Vec<usize>,
    pub stages: Vec<StageInfo>,
    /// Whether a zero corank was reached within the depth limit.
    pub terminated: bool,
}

/// Corank of `grad stage` at `x`.
fn stage_corank(f: &VectorField, stage: &[Expr], x: &[f64], tol: f64) -> Result<usize, BoardmanError> {
    let n = f.dim();
    let rows: Vec<Expr> = gradient_rows(f, stage).into_iter().flatten().collect();
    let vals = Tape::compile(&rows).eval(x, &[])?;
    let m = DMatrix::from_row_slice(stage.len(), n, &vals);
    Ok(n - linalg::rank(&m, tol))
}

/// Adaptive symbol: each stage is extended by the minors of the size its
/// own corank calls for, stopping at the first zero corank.
pub fn boardman_symbol(
    f: &VectorField,
    x: &[f64],
    max_depth: usize,
    tol: f64,
    cap: usize,
) -> Result<BoardmanSymbol, BoardmanError> {
    require_fixed(f)?;
    let mut stage = f.components().to_vec();
    let mut symbol = Vec::new();
    let mut stages = Vec::new();
    let mut terminated = false;
    for j in 1..=max_depth {
        let tau = stage_corank(f, &stage, x, tol)?;
        stages.push(StageInfo { size: stage.len(), corank: tau });
        if let Some(&prev) = symbol.last() {
            if tau > prev {
                return Err(BoardmanError::NonMonotone { stage: j, prev, next: tau });
            }
        }
        if tau == 0 {
            terminated = true;
            break;
        }
        symbol.push(tau);
        if j < max_depth {
            stage = extend(f, &stage, tau, j, cap)?;
        }
    }
    Ok(BoardmanSymbol { symbol, stages, terminated })
}

/// Evaluate every function of a stage at `p`.
pub fn eval_stage(stage: &[Expr], p: &Point) -> Result<Vec<f64>, EvalError> {
    Tape::compile(stage).eval_point(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(&big(5), 2), big(10));
        assert_eq!(binomial(&big(2), 3), big(0));
        assert_eq!(binomial(&big(7), 0), big(1));
    }

    #[test]
    fn combination_order() {
        assert_eq!(combinations(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(2, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(1, 2).is_empty());
    }

    #[test]
    fn planar_corank_one_counts() {
        let c = minor_count_corank_one(2, 3);
        assert_eq!(c.stages, vec![big(2), big(1), big(3), big(15)]);
        assert_eq!(c.total, big(21));
        assert_eq!(c.new_minors, big(19));
        assert_eq!(c.cumulative(), vec![big(2), big(3), big(6), big(21)]);
    }

    #[test]
    fn invalid_coranks() {
        assert!(matches!(minor_count(2, &[3]), Err(BoardmanError::BadCorank { .. })));
        assert!(matches!(minor_count(2, &[0]), Err(BoardmanError::BadCorank { .. })));
        assert_eq!(minor_count(0, &[]), Err(BoardmanError::ZeroDimension));
    }

    #[test]
    fn b_condition_counts() {
        assert_eq!(bg_condition_count(1, 1), 2);
        assert_eq!(bg_condition_count(4, 5), 9);
        assert_eq!(bg_condition_count(3, 2), 5);
    }

    #[test]
    fn identity_has_empty_symbol() {
        let f = VectorField::new("id", vec!["x".into(), "y".into()], vec![], vec![Expr::var(0), Expr::var(1)]).unwrap();
        let s = boardman_symbol(&f, &[0.3, 0.1], 3, 1e-8, DEFAULT_CAP).unwrap();
        assert!(s.symbol.is_empty() && s.terminated);
        let chain = build_delta_chain(&f, &[1], DEFAULT_CAP).unwrap();
        assert_eq!(chain.stages[1].len(), 3);
        assert_eq!(chain.stages[1][2], Expr::one());
    }

    #[test]
    fn cap_refuses_with_prediction() {
        let f = VectorField::new("id", vec!["x".into(), "y".into()], vec![], vec![Expr::var(0), Expr::var(1)]).unwrap();
        let err = build_delta_chain(&f, &[1, 1, 1, 1], 100).unwrap_err();
        assert_eq!(err, BoardmanError::CapExceeded { stage: 4, predicted: "231".into(), cap: 100 });
    }

    #[test]
    fn free_parameters_rejected() {
        let f = VectorField::new("p", vec!["x".into()], vec!["a".into()], vec![Expr::var(0) + Expr::param(0)]).unwrap();
        assert_eq!(boardman_symbol(&f, &[0.0], 2, 1e-8, 10).unwrap_err(), BoardmanError::FreeParameters(1));
    }
}

//! Nested B determinants, extended G determinants and the subrank.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr, Point, Symbol, Tape, VectorField};
use crate::linalg;

#[derive(Debug, Clone, Error)]
pub enum DetError {
    #[error("index entry {entry} outside 1..={n}")]
    IndexOutOfRange { entry: usize, n: usize },
    #[error("level {level} needs an index string of length {need}, got {got}")]
    IndexLength { level: usize, need: usize, got: usize },
    #[error("levels start at 1")]
    LevelZero,
    #[error("codimension {r} exceeds the {params} declared parameters")]
    CodimTooLarge { r: usize, params: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Replacement rows `k_1 ... k_m`, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexString(Vec<usize>);

impl IndexString {
    pub fn new(entries: Vec<usize>, n: usize) -> Result<Self, DetError> {
        if let Some(&entry) = entries.iter().find(|&&e| e == 0 || e > n) {
            return Err(DetError::IndexOutOfRange { entry, n });
        }
        Ok(IndexString(entries))
    }

    /// The all-ones string of length `len`.
    pub fn canonical(len: usize) -> Self {
        IndexString(vec![1; len])
    }

    pub fn empty() -> Self {
        IndexString(Vec::new())
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_canonical(&self) -> bool {
        self.0.iter().all(|&k| k == 1)
    }

    pub fn prefix(&self, len: usize) -> IndexString {
        IndexString(self.0[..len].to_vec())
    }

    /// All `n^len` strings in lexicographic order.
    pub fn all(n: usize, len: usize) -> Vec<IndexString> {
        let mut out = vec![Vec::with_capacity(len)];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|s| {
                    (1..=n).map(move |k| {
                        let mut t = s.clone();
                        t.push(k);
                        t
                    })
                })
                .collect();
        }
        out.into_iter().map(IndexString).collect()
    }
}

impl fmt::Display for IndexString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Thresholds for the zero and nonzero tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol_b: f64,
    pub tol_g: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { tol_b: 1e-8, tol_g: 1e-6 }
    }
}

impl Tolerances {
    /// `|d| <= tol_b * max(H, 1)`.
    pub fn is_zero(&self, d: &DetValue) -> bool {
        d.value.abs() <= self.tol_b * d.bound.max(1.0)
    }

    /// `|g| > tol_g * H`.
    pub fn is_nonzero(&self, d: &DetValue) -> bool {
        d.value.is_finite() && d.value.abs() > self.tol_g * d.bound
    }
}

/// A determinant evaluated at a point together with the Hadamard bound of
/// the matrix it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetValue {
    pub value: f64,
    pub bound: f64,
}

/// Symbolic Jacobian `d f_i / d x_j`.
pub fn jacobian(f: &VectorField) -> Vec<Vec<Expr>> {
    let vars = f.vars();
    f.components().iter().map(|c| c.gradient(&vars)).collect()
}

/// Determinant by cofactor expansion along rows, memoizing sub-minors by
/// their column set.
pub fn sym_det(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    if n == 0 {
        return Expr::one();
    }
    assert!(n <= 31 && m.iter().all(|r| r.len() == n), "sym_det needs a square matrix");
    let mut memo: HashMap<u32, Expr> = HashMap::new();
    minor(m, (1u32 << n) - 1, &mut memo)
}

fn minor(m: &[Vec<Expr>], cols: u32, memo: &mut HashMap<u32, Expr>) -> Expr {
    let n = m.len();
    let row = n - cols.count_ones() as usize;
    if row == n {
        return Expr::one();
    }
    if let Some(e) = memo.get(&cols) {
        return e.clone();
    }
    let mut terms = Vec::new();
    let mut sign = 1.0;
    for j in 0..n {
        if cols & (1 << j) == 0 {
            continue;
        }
        let entry = &m[row][j];
        if !entry.is_zero() {
            let sub = minor(m, cols & !(1 << j), memo);
            if !sub.is_zero() {
                terms.push(Expr::product([Expr::constant(sign), entry.clone(), sub]));
            }
        }
        sign = -sign;
    }
    let d = Expr::sum(terms);
    memo.insert(cols, d.clone());
    d
}

/// Numeric subrank: the least rank of the Jacobian with one row zeroed.
pub fn subrank(f: &VectorField, p: &Point, tol: f64) -> Result<usize, EvalError> {
    let jac = jacobian(f);
    let flat: Vec<Expr> = jac.iter().flatten().cloned().collect();
    let vals = Tape::compile(&flat).eval_point(p)?;
    let n = f.dim();
    let m = nalgebra::DMatrix::from_row_slice(n, n, &vals);
    Ok(subrank_of(&m, tol))
}

pub fn subrank_of(m: &nalgebra::DMatrix<f64>, tol: f64) -> usize {
    (0..m.nrows())
        .map(|j| {
            let mut z = m.clone();
            z.row_mut(j).fill(0.0);
            linalg::rank(&z, tol)
        })
        .min()
        .unwrap_or(0)
}

/// Lazily built, cached B and G determinants of one field.
pub struct DeterminantSet {
    field: VectorField,
    jac: Vec<Vec<Expr>>,
    b_cache: Mutex<HashMap<IndexString, Expr>>,
    d_cache: Mutex<HashMap<(Expr, Symbol), Expr>>,
}

impl DeterminantSet {
    pub fn new(field: VectorField) -> Self {
        let jac = jacobian(&field);
        DeterminantSet {
            field,
            jac,
            b_cache: Mutex::new(HashMap::new()),
            d_cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn jacobian(&self) -> &[Vec<Expr>] {
        &self.jac
    }

    fn check(&self, level: usize, k: &IndexString) -> Result<(), DetError> {
        if level == 0 {
            return Err(DetError::LevelZero);
        }
        if k.len() != level - 1 {
            return Err(DetError::IndexLength { level, need: level - 1, got: k.len() });
        }
        let n = self.field.dim();
        if let Some(&entry) = k.entries().iter().find(|&&e| e == 0 || e > n) {
            return Err(DetError::IndexOutOfRange { entry, n });
        }
        Ok(())
    }

    /// Cached symbolic derivative.
    pub fn derivative(&self, e: &Expr, s: Symbol) -> Expr {
        if !e.depends_on(s) {
            return Expr::zero();
        }
        let key = (e.clone(), s);
        if let Some(d) = self.d_cache.lock().unwrap().get(&key) {
            return d.clone();
        }
        let d = e.differentiate(s);
        self.d_cache.lock().unwrap().insert(key, d.clone());
        d
    }

    fn x_gradient(&self, e: &Expr) -> Vec<Expr> {
        self.field.vars().into_iter().map(|s| self.derivative(e, s)).collect()
    }

    /// The matrix whose determinant is `B_{i,K}`: the Jacobian with row
    /// `k_{i-1}` replaced by the gradient of `B_{i-1,K(i-2)}`.
    pub fn b_matrix(&self, i: usize, k: &IndexString) -> Result<Vec<Vec<Expr>>, DetError> {
        self.check(i, k)?;
        if i == 1 {
            return Ok(self.jac.clone());
        }
        let prev = self.build_b(i - 1, &k.prefix(i - 2))?;
        let row = k.entries()[i - 2] - 1;
        let mut m = self.jac.clone();
        m[row] = self.x_gradient(&prev);
        Ok(m)
    }

    /// Symbolic `B_{i,K}`, with `B_0 = f_1` so that `B_1 = det grad F`.
    pub fn build_b(&self, i: usize, k: &IndexString) -> Result<Expr, DetError> {
        self.check(i, k)?;
        if let Some(e) = self.b_cache.lock().unwrap().get(k) {
            return Ok(e.clone());
        }
        let d = sym_det(&self.b_matrix(i, k)?);
        self.b_cache.lock().unwrap().insert(k.clone(), d.clone());
        Ok(d)
    }

    /// Canonical `B_1, ..., B_r`.
    pub fn canonical_b(&self, r: usize) -> Result<Vec<Expr>, DetError> {
        (1..=r).map(|i| self.build_b(i, &IndexString::canonical(i - 1))).collect()
    }

    /// Every `(i, K)` with `1 <= i <= r`, ordered by level then `K`.
    pub fn all_b_indices(&self, r: usize) -> Vec<(usize, IndexString)> {
        (1..=r)
            .flat_map(|i| IndexString::all(self.field.dim(), i - 1).into_iter().map(move |k| (i, k)))
            .collect()
    }

    fn check_codim(&self, r: usize) -> Result<(), DetError> {
        if r == 0 {
            return Err(DetError::LevelZero);
        }
        if r > self.field.num_params() {
            return Err(DetError::CodimTooLarge { r, params: self.field.num_params() });
        }
        Ok(())
    }

    /// The functions `(f_1..f_n, B_1, B_{2,K(1)}, ..., B_{r,K(r-1)})`.
    pub fn g_functions(&self, r: usize, k: &IndexString) -> Result<Vec<Expr>, DetError> {
        self.check_codim(r)?;
        self.check(r, k)?;
        let mut rows: Vec<Expr> = self.field.components().to_vec();
        for i in 1..=r {
            rows.push(self.build_b(i, &k.prefix(i - 1))?);
        }
        Ok(rows)
    }

    /// The `(n+r) x (n+r)` matrix under `G_{r,K}`, columns `(x, alpha_1..alpha_r)`.
    pub fn g_matrix(&self, r: usize, k: &IndexString) -> Result<Vec<Vec<Expr>>, DetError> {
        let funcs = self.g_functions(r, k)?;
        let wrt = self.unknowns(r);
        Ok(funcs
            .iter()
            .map(|f| wrt.iter().map(|&s| self.derivative(f, s)).collect())
            .collect())
    }

    /// Symbolic `G_{r,K}`.
    pub fn build_g(&self, r: usize, k: &IndexString) -> Result<Expr, DetError> {
        Ok(sym_det(&self.g_matrix(r, k)?))
    }

    /// `(x_1..x_n, alpha_1..alpha_r)`.
    pub fn unknowns(&self, r: usize) -> Vec<Symbol> {
        let mut s = self.field.vars();
        s.extend((0..r).map(Symbol::Param));
        s
    }

    /// `B_{i,K}` at `p`, with the Hadamard bound of its matrix.
    pub fn eval_b(&self, i: usize, k: &IndexString, p: &Point) -> Result<DetValue, DetError> {
        let det = self.build_b(i, k)?;
        let m = self.b_matrix(i, k)?;
        let mut exprs = vec![det];
        exprs.extend(m.into_iter().flatten());
        let vals = Tape::compile(&exprs).eval_point(p)?;
        let n = self.field.dim();
        let mat = nalgebra::DMatrix::from_row_slice(n, n, &vals[1..]);
        Ok(DetValue { value: vals[0], bound: linalg::hadamard_bound(&mat) })
    }

    /// `G_{r,K}` at `p`, computed by LU on the evaluated matrix.
    pub fn eval_g(&self, r: usize, k: &IndexString, p: &Point) -> Result<DetValue, DetError> {
        let m = self.g_matrix(r, k)?;
        let size = m.len();
        let vals = Tape::compile(&m.into_iter().flatten().collect::<Vec<_>>()).eval_point(p)?;
        let mat = nalgebra::DMatrix::from_row_slice(size, size, &vals);
        Ok(DetValue { value: linalg::determinant(&mat), bound: linalg::hadamard_bound(&mat) })
    }
}

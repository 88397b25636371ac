//! Damped multistart Newton for catastrophe points and steady states.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::determinants::{subrank_of, DetError, DetValue, DeterminantSet, IndexString, Tolerances};
use crate::expr::{EvalError, Expr, Point, Symbol, Tape, VectorField};
use crate::linalg;
use crate::scenarios::classify;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Converged when `|f_i| <= tol * (1 + m_i)` for every equation, where
    /// `m_i` is the magnitude of the terms of `f_i`.
    pub tol: f64,
    pub backtrack: f64,
    pub min_step: f64,
    /// One interval per unknown; empty means `[-2, 2]` everywhere.
    pub seed_box: Vec<(f64, f64)>,
    pub seeds: usize,
    /// Skip this many points of the seed sequence.
    pub seed_offset: usize,
    pub dedup_radius: f64,
    pub tolerances: Tolerances,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iter: 100,
            tol: 1e-12,
            backtrack: 0.5,
            min_step: 1e-12,
            seed_box: Vec::new(),
            seeds: 256,
            seed_offset: 0,
            dedup_radius: 1e-6,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum SolveError {
    #[error("codimension must be at least 1")]
    ZeroCodim,
    #[error("codimension {r} exceeds the {params} free parameters")]
    CodimTooLarge { r: usize, params: usize },
    #[error("seed box has {got} intervals, the system has {need} unknowns")]
    BoxDimension { got: usize, need: usize },
    #[error("seed box interval {index} is empty or not finite")]
    BadInterval { index: usize },
    #[error("seed count must be at least 1")]
    NoSeeds,
    #[error("parameter vector has {got} entries, the field declares {need}")]
    ParamCount { got: usize, need: usize },
    #[error(transparent)]
    Det(#[from] DetError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum NewtonFailure {
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("singular Newton matrix at iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("line search step fell below the minimum (residual {residual:e})")]
    StepUnderflow { residual: f64 },
    #[error("evaluation failed: {0}")]
    Evaluation(String),
}

/// A converged Newton run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub point: Point,
    /// Max-norm of the raw equation values.
    pub residual: f64,
    pub iterations: usize,
}

/// Equations, their Jacobian with respect to chosen unknowns, compiled.
pub struct NewtonSystem {
    unknowns: Vec<Symbol>,
    m: usize,
    values: Tape,
    jac: Tape,
}

impl NewtonSystem {
    pub fn new(eqs: &[Expr], unknowns: &[Symbol], diff: impl Fn(&Expr, Symbol) -> Expr) -> Self {
        let entries: Vec<Expr> = eqs
            .iter()
            .flat_map(|e| unknowns.iter().map(|&s| diff(e, s)).collect::<Vec<_>>())
            .collect();
        NewtonSystem {
            unknowns: unknowns.to_vec(),
            m: eqs.len(),
            values: Tape::compile(eqs),
            jac: Tape::compile(&entries),
        }
    }

    pub fn from_exprs(eqs: &[Expr], unknowns: &[Symbol]) -> Self {
        Self::new(eqs, unknowns, |e, s| e.differentiate(s))
    }

    pub fn unknowns(&self) -> &[Symbol] {
        &self.unknowns
    }

    fn residuals(&self, p: &Point) -> Result<Vec<f64>, EvalError> {
        self.values.eval_point(p)
    }

    fn scaled_ok(&self, p: &Point, f: &[f64], tol: f64) -> Result<bool, EvalError> {
        let mags = self.values.magnitudes(&p.x, &p.alpha)?;
        Ok(f.iter().zip(&mags).all(|(v, m)| v.abs() <= tol * (1.0 + m)))
    }

    fn step(&self, p: &Point, f: &[f64]) -> Result<Option<Vec<f64>>, EvalError> {
        let k = self.unknowns.len();
        let vals = self.jac.eval_point(p)?;
        let j = DMatrix::from_row_slice(self.m, k, &vals);
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        if self.m == k {
            return Ok(linalg::solve(&j, &rhs));
        }
        // minimum-norm (or least-squares) step for non-square systems
        let svd = j.svd(true, true);
        let cutoff = svd.singular_values.max() * 1e-13;
        Ok(svd
            .solve(&DVector::from_vec(rhs), cutoff)
            .ok()
            .map(|d| d.iter().copied().collect::<Vec<f64>>())
            .filter(|d| d.iter().all(|v| v.is_finite()) && d.iter().any(|v| *v != 0.0)))
    }

    fn apply(&self, p: &Point, delta: &[f64], t: f64) -> Point {
        let mut q = p.clone();
        for (&s, d) in self.unknowns.iter().zip(delta) {
            q.set(s, p.get(s) + t * d);
        }
        q
    }

    pub fn solve(&self, start: &Point, opts: &SolveOptions) -> Result<Solution, NewtonFailure> {
        let eval_err = |e: EvalError| NewtonFailure::Evaluation(e.to_string());
        let mut p = start.clone();
        let mut f = self.residuals(&p).map_err(eval_err)?;
        let mut iterations = 0;
        loop {
            if f.iter().all(|v| v.is_finite()) && self.scaled_ok(&p, &f, opts.tol).map_err(eval_err)? {
                break;
            }
            if iterations >= opts.max_iter {
                return Err(NewtonFailure::MaxIterations { iterations, residual: max_norm(&f) });
            }
            let delta = self
                .step(&p, &f)
                .map_err(eval_err)?
                .ok_or(NewtonFailure::SingularJacobian { iteration: iterations })?;
            let norm0 = l2(&f);
            let mut t = 1.0;
            loop {
                let trial = self.apply(&p, &delta, t);
                if let Ok(ft) = self.residuals(&trial) {
                    let nt = l2(&ft);
                    if nt.is_finite() && nt <= (1.0 - 1e-4 * t) * norm0 {
                        p = trial;
                        f = ft;
                        break;
                    }
                }
                t *= opts.backtrack;
                if t < opts.min_step {
                    return Err(NewtonFailure::StepUnderflow { residual: max_norm(&f) });
                }
            }
            iterations += 1;
        }
        // polish: plain Newton steps while the raw residual keeps dropping
        for _ in 0..3 {
            let Ok(Some(delta)) = self.step(&p, &f) else { break };
            let trial = self.apply(&p, &delta, 1.0);
            match self.residuals(&trial) {
                Ok(ft) if max_norm(&ft) < max_norm(&f) => {
                    p = trial;
                    f = ft;
                }
                _ => break,
            }
        }
        Ok(Solution { residual: max_norm(&f), point: p, iterations })
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solve `eqs = 0` for `unknowns` from `start`; other coordinates stay fixed.
pub fn newton_solve(eqs: &[Expr], unknowns: &[Symbol], start: &Point, opts: &SolveOptions) -> Result<Solution, NewtonFailure> {
    NewtonSystem::from_exprs(eqs, unknowns).solve(start, opts)
}

const PRIMES: [u64; 24] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    r
}

/// Points `offset+1 ..= offset+count` of the Halton sequence, mapped into the box.
pub fn halton_seeds(bounds: &[(f64, f64)], count: usize, offset: usize) -> Vec<Vec<f64>> {
    assert!(bounds.len() <= PRIMES.len(), "at most {} seed dimensions", PRIMES.len());
    (0..count)
        .map(|i| {
            let idx = (offset + i + 1) as u64;
            bounds
                .iter()
                .zip(PRIMES)
                .map(|(&(lo, hi), b)| lo + (hi - lo) * radical_inverse(idx, b))
                .collect()
        })
        .collect()
}

fn check_box(bounds: &[(f64, f64)], need: usize) -> Result<Vec<(f64, f64)>, SolveError> {
    if bounds.is_empty() {
        return Ok(vec![(-2.0, 2.0); need]);
    }
    if bounds.len() != need {
        return Err(SolveError::BoxDimension { got: bounds.len(), need });
    }
    for (index, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(SolveError::BadInterval { index });
        }
    }
    Ok(bounds.to_vec())
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Sort lexicographically, then merge points within `radius` (max-norm),
/// keeping the one with the smaller residual.
pub fn dedup_solutions(mut sols: Vec<Solution>, radius: f64) -> Vec<Solution> {
    sols.sort_by(|a, b| lex_cmp(&a.point.coords(), &b.point.coords()));
    let mut kept: Vec<Solution> = Vec::new();
    for s in sols {
        match kept.iter_mut().find(|k| k.point.max_distance(&s.point) <= radius) {
            Some(k) => {
                if s.residual < k.residual {
                    *k = s;
                }
            }
            None => kept.push(s),
        }
    }
    kept.sort_by(|a, b| lex_cmp(&a.point.coords(), &b.point.coords()));
    kept
}

fn inside(p: &Point, unknowns: &[Symbol], bounds: &[(f64, f64)]) -> bool {
    unknowns.iter().zip(bounds).all(|(&s, &(lo, hi))| {
        let v = p.get(s);
        v >= lo && v <= hi
    })
}

fn multistart(
    sys: &NewtonSystem,
    template: &Point,
    bounds: &[(f64, f64)],
    opts: &SolveOptions,
) -> Vec<Solution> {
    let seeds = halton_seeds(bounds, opts.seeds, opts.seed_offset);
    let found: Vec<Solution> = seeds
        .par_iter()
        .filter_map(|seed| {
            let mut start = template.clone();
            for (&s, &v) in sys.unknowns().iter().zip(seed) {
                start.set(s, v);
            }
            sys.solve(&start, opts).ok()
        })
        .filter(|s| inside(&s.point, sys.unknowns(), bounds))
        .collect();
    dedup_solutions(found, opts.dedup_radius)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BEntry {
    pub level: usize,
    pub index: IndexString,
    pub value: f64,
    pub bound: f64,
    pub zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GEntry {
    pub index: IndexString,
    pub value: f64,
    pub bound: f64,
    pub nonzero: bool,
}

/// Everything known about one candidate catastrophe point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatastropheReport {
    pub point: Point,
    pub codim: usize,
    /// Max-norm of `(F, B_1, ..., B_r)` at the point.
    pub residual: f64,
    /// Every `B_{i,K}` with `i <= codim`.
    pub b: Vec<BEntry>,
    /// Every `G_{codim,K}`.
    pub g: Vec<GEntry>,
    pub subrank: usize,
    /// `subrank == n - 1`.
    pub subrank_ok: bool,
    /// Every `B_{i,K}` passes the zero test.
    pub b_all_zero: bool,
    /// Every `G_{codim,K}` passes the nonzero test.
    pub full: bool,
    /// Full, corank one, and consistent across every row choice.
    pub valid: bool,
    pub label: String,
}

impl CatastropheReport {
    /// One-line reading of the report.
    pub fn verdict(&self) -> String {
        if self.b.first().is_some_and(|e| !e.zero) {
            return "no singularity".into();
        }
        if !self.subrank_ok {
            return format!("subrank {}: not a valid underlying catastrophe", self.subrank);
        }
        if let Some(e) = self.b.iter().find(|e| !e.zero) {
            return format!("B_{{{},{}}} nonzero: not of codimension {}", e.level, e.index, self.codim);
        }
        if !self.full {
            return "some G vanish: unfolding not full".into();
        }
        format!("valid {}", self.label)
    }
}

/// Evaluate every B, G and the subrank at `p` for codimension `r`.
pub fn check_point(d: &DeterminantSet, r: usize, p: &Point, tol: &Tolerances) -> Result<CatastropheReport, SolveError> {
    let f = d.field();
    if r == 0 {
        return Err(SolveError::ZeroCodim);
    }
    if r > f.num_params() {
        return Err(SolveError::CodimTooLarge { r, params: f.num_params() });
    }
    let mut b = Vec::new();
    for (level, index) in d.all_b_indices(r) {
        let DetValue { value, bound } = d.eval_b(level, &index, p)?;
        let zero = tol.is_zero(&DetValue { value, bound });
        b.push(BEntry { level, index, value, bound, zero });
    }
    let mut g = Vec::new();
    for index in IndexString::all(f.dim(), r - 1) {
        let dv = d.eval_g(r, &index, p)?;
        g.push(GEntry { index, value: dv.value, bound: dv.bound, nonzero: tol.is_nonzero(&dv) });
    }
    let jac: Vec<Expr> = d.jacobian().iter().flatten().cloned().collect();
    let jv = Tape::compile(&jac).eval_point(p)?;
    let n = f.dim();
    let subrank = subrank_of(&DMatrix::from_row_slice(n, n, &jv), tol.tol_b);

    let mut eqs: Vec<Expr> = f.components().to_vec();
    eqs.extend(d.canonical_b(r)?);
    let residual = max_norm(&Tape::compile(&eqs).eval_point(p)?);

    let subrank_ok = subrank + 1 == n;
    let b_all_zero = b.iter().all(|e| e.zero);
    let full = g.iter().all(|e| e.nonzero);
    Ok(CatastropheReport {
        point: p.clone(),
        codim: r,
        residual,
        b,
        g,
        subrank,
        subrank_ok,
        b_all_zero,
        full,
        valid: full && subrank_ok && b_all_zero,
        label: classify(r),
    })
}

/// Solve `F = B_1 = ... = B_r = 0` over the state and every free parameter
/// of `f` by multistart Newton. The first `r` parameters are the unfolding
/// parameters; any further free parameters become extra unknowns and the
/// Newton steps take the minimum-norm solution.
pub fn find_catastrophes(f: &VectorField, r: usize, opts: &SolveOptions) -> Result<Vec<CatastropheReport>, SolveError> {
    if r == 0 {
        return Err(SolveError::ZeroCodim);
    }
    if r > f.num_params() {
        return Err(SolveError::CodimTooLarge { r, params: f.num_params() });
    }
    if opts.seeds == 0 {
        return Err(SolveError::NoSeeds);
    }
    let d = DeterminantSet::new(f.clone());
    let mut eqs: Vec<Expr> = f.components().to_vec();
    eqs.extend(d.canonical_b(r)?);
    let mut unknowns = f.vars();
    unknowns.extend((0..f.num_params()).map(Symbol::Param));
    let bounds = check_box(&opts.seed_box, unknowns.len())?;
    let sys = NewtonSystem::new(&eqs, &unknowns, |e, s| d.derivative(e, s));
    let template = Point::new(vec![0.0; f.dim()], vec![0.0; f.num_params()]);
    let sols = multistart(&sys, &template, &bounds, opts);
    sols.iter()
        .map(|s| check_point(&d, r, &s.point, &opts.tolerances))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Attracting,
    Repelling,
    Saddle,
    Center,
    NonHyperbolic,
}

/// Stability from the eigenvalues of the Jacobian; real parts within
/// `tol * max(1, max |lambda|)` of zero count as zero.
pub fn stability_of(eigs: &[nalgebra::Complex<f64>], tol: f64) -> Stability {
    let scale = eigs.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let eps = tol * scale;
    let neg = eigs.iter().filter(|z| z.re < -eps).count();
    let pos = eigs.iter().filter(|z| z.re > eps).count();
    let flat: Vec<_> = eigs.iter().filter(|z| z.re.abs() <= eps).collect();
    if flat.is_empty() {
        return match (neg, pos) {
            (_, 0) => Stability::Attracting,
            (0, _) => Stability::Repelling,
            _ => Stability::Saddle,
        };
    }
    if neg == 0 && pos == 0 && flat.iter().all(|z| z.im.abs() > eps) {
        return Stability::Center;
    }
    Stability::NonHyperbolic
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub x: Vec<f64>,
    pub residual: f64,
    pub stability: Stability,
    /// `(re, im)` pairs.
    pub eigenvalues: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateCensus {
    pub count: usize,
    pub attracting: usize,
    pub states: Vec<SteadyState>,
}

/// A compiled steady-state problem for repeated censuses at different
/// parameter values.
pub struct SteadyStateProblem {
    sys: NewtonSystem,
    jac: Tape,
    n: usize,
    r: usize,
}

impl SteadyStateProblem {
    pub fn new(f: &VectorField) -> Self {
        let vars = f.vars();
        let jac: Vec<Expr> = crate::determinants::jacobian(f).into_iter().flatten().collect();
        SteadyStateProblem {
            sys: NewtonSystem::from_exprs(f.components(), &vars),
            jac: Tape::compile(&jac),
            n: f.dim(),
            r: f.num_params(),
        }
    }

    pub fn census(&self, alpha: &[f64], x_box: &[(f64, f64)], opts: &SolveOptions) -> Result<SteadyStateCensus, SolveError> {
        if alpha.len() != self.r {
            return Err(SolveError::ParamCount { got: alpha.len(), need: self.r });
        }
        if opts.seeds == 0 {
            return Err(SolveError::NoSeeds);
        }
        let bounds = check_box(x_box, self.n)?;
        let template = Point::new(vec![0.0; self.n], alpha.to_vec());
        let sols = multistart(&self.sys, &template, &bounds, opts);
        let mut states = Vec::with_capacity(sols.len());
        for s in sols {
            let jv = self.jac.eval_point(&s.point)?;
            let eigs = linalg::eigenvalues(&DMatrix::from_row_slice(self.n, self.n, &jv));
            let stability = stability_of(&eigs, opts.tolerances.tol_b);
            let mut eigenvalues: Vec<(f64, f64)> = eigs.iter().map(|z| (z.re, z.im)).collect();
            eigenvalues.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            states.push(SteadyState { x: s.point.x, residual: s.residual, stability, eigenvalues });
        }
        let attracting = states.iter().filter(|s| s.stability == Stability::Attracting).count();
        Ok(SteadyStateCensus { count: states.len(), attracting, states })
    }
}

/// Locate the zeros of `F(., alpha)` inside `x_box` and classify each.
pub fn count_steady_states(
    f: &VectorField,
    alpha: &[f64],
    x_box: &[(f64, f64)],
    opts: &SolveOptions,
) -> Result<SteadyStateCensus, SolveError> {
    SteadyStateProblem::new(f).census(alpha, x_box, opts)
}

//! Built-in fields and closed-form reference points.
//!
//! Two families: the primary form
//! `(f(x1, a) + tau . x, lambda_2 x_2, ..., lambda_n x_n)` with
//! `f = x1^(r+1) + a_r x1^(r-1) + ... + a_2 x1 + a_1`, and the homogeneous
//! two-species reaction-diffusion field
//! `-(k1 u + b + a v + v^3), -(k2 v + d + g u + u^3)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, Point, VectorField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("primary form needs n >= 1 and r >= 1")]
    EmptyPrimary,
    #[error("expected {need} {what}, got {got}")]
    Length { what: &'static str, need: usize, got: usize },
    #[error("{what} must be nonzero")]
    ZeroCoefficient { what: String },
    #[error("k1 and k2 must be positive")]
    Rates,
    #[error("point outside the domain of the closed form: {0}")]
    Domain(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimaryFormSpec {
    pub n: usize,
    pub r: usize,
    /// `lambda_2 .. lambda_n`
    pub lambda: Vec<f64>,
    /// `tau_2 .. tau_n`
    pub tau: Vec<f64>,
}

impl PrimaryFormSpec {
    /// All `lambda` and `tau` equal to one.
    pub fn unit(n: usize, r: usize) -> Self {
        let m = n.saturating_sub(1);
        PrimaryFormSpec { n, r, lambda: vec![1.0; m], tau: vec![1.0; m] }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.n == 0 || self.r == 0 {
            return Err(ScenarioError::EmptyPrimary);
        }
        for (what, v) in [("lambda", &self.lambda), ("tau", &self.tau)] {
            if v.len() != self.n - 1 {
                return Err(ScenarioError::Length { what, need: self.n - 1, got: v.len() });
            }
            if let Some(i) = v.iter().position(|&c| c == 0.0) {
                return Err(ScenarioError::ZeroCoefficient { what: format!("{what}_{}", i + 2) });
            }
        }
        Ok(())
    }

    /// `lambda_2 * ... * lambda_n`.
    pub fn lambda_product(&self) -> f64 {
        self.lambda.iter().product()
    }

    /// `d^m f / d x1^m` at `(x1, alpha)`.
    pub fn f_derivative(&self, m: usize, x1: f64, alpha: &[f64]) -> f64 {
        // f = sum_e c_e x1^e with c_{r+1} = 1, c_{i-1} = alpha_i
        let mut total = 0.0;
        for e in m..=self.r + 1 {
            let c = if e == self.r + 1 { 1.0 } else if e < self.r { alpha[e] } else { 0.0 };
            let falling: f64 = ((e - m + 1)..=e).map(|t| t as f64).product();
            total += c * falling * x1.powi((e - m) as i32);
        }
        total
    }

    /// The codimension-`r` point: origin with all parameters zero.
    pub fn catastrophe_point(&self) -> Point {
        Point::new(vec![0.0; self.n], vec![0.0; self.r])
    }
}

pub fn make_primary_form(spec: &PrimaryFormSpec) -> Result<VectorField, ScenarioError> {
    spec.validate()?;
    let (n, r) = (spec.n, spec.r);
    let x1 = Expr::var(0);
    let mut first = vec![x1.pow(r as i32 + 1)];
    for i in 1..=r {
        first.push(Expr::param(i - 1) * x1.pow(i as i32 - 1));
    }
    for i in 2..=n {
        first.push(spec.tau[i - 2] * Expr::var(i - 1));
    }
    let mut components = vec![Expr::sum(first)];
    for i in 2..=n {
        components.push(spec.lambda[i - 2] * Expr::var(i - 1));
    }
    let vars = (1..=n).map(|i| format!("x{i}")).collect();
    let params = (1..=r).map(|i| format!("a{i}")).collect();
    Ok(VectorField::new(format!("primary:n={n},r={r}"), vars, params, components)
        .expect("primary form is well formed"))
}

/// Parameter order of [`make_reaction_diffusion`].
pub const RD_PARAMS: [&str; 6] = ["b", "d", "a", "g", "k1", "k2"];

pub fn make_reaction_diffusion() -> VectorField {
    let (u, v) = (Expr::var(0), Expr::var(1));
    let p = |i| Expr::param(i);
    let (b, d, a, g, k1, k2) = (p(0), p(1), p(2), p(3), p(4), p(5));
    let f1 = -(k1 * &u + b + a * &v + v.pow(3));
    let f2 = -(k2 * &v + d + g * &u + u.pow(3));
    VectorField::new(
        "rd",
        vec!["u".into(), "v".into()],
        RD_PARAMS.iter().map(|s| s.to_string()).collect(),
        vec![f1, f2],
    )
    .expect("reaction-diffusion field is well formed")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Which closed-form set to sample, with its free coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RdKind {
    Fold { u: f64, v: f64, gamma: f64 },
    Cusp { u: f64, v: f64 },
    Swallowtail { p: f64, branch: Branch },
    Butterfly { branch: Branch },
}

impl RdKind {
    /// Number of B conditions the point satisfies.
    pub fn codim(&self) -> usize {
        match self {
            RdKind::Fold { .. } => 1,
            RdKind::Cusp { .. } => 2,
            RdKind::Swallowtail { .. } => 3,
            RdKind::Butterfly { .. } => 4,
        }
    }
}

/// Closed-form parameterizations of the reaction-diffusion steady states and
/// their degeneracies, for fixed rates `k1, k2 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdReference {
    pub k1: f64,
    pub k2: f64,
}

impl RdReference {
    pub fn new(k1: f64, k2: f64) -> Result<Self, ScenarioError> {
        if !(k1 > 0.0 && k2 > 0.0) {
            return Err(ScenarioError::Rates);
        }
        Ok(RdReference { k1, k2 })
    }

    pub fn beta(&self, u: f64, v: f64, alpha: f64) -> f64 {
        -self.k1 * u - alpha * v - v.powi(3)
    }

    pub fn delta(&self, u: f64, v: f64, gamma: f64) -> f64 {
        -self.k2 * v - gamma * u - u.powi(3)
    }

    /// `alpha` on the fold set.
    pub fn alpha_fold(&self, u: f64, v: f64, gamma: f64) -> Result<f64, ScenarioError> {
        let c = gamma + 3.0 * u * u;
        if c == 0.0 {
            return Err(ScenarioError::Domain("gamma + 3u^2 = 0"));
        }
        Ok(self.k1 * self.k2 / c - 3.0 * v * v)
    }

    /// `gamma` on the cusp set; needs `u/v > 0`.
    pub fn gamma_cusp(&self, u: f64, v: f64) -> Result<f64, ScenarioError> {
        if !(u / v > 0.0) {
            return Err(ScenarioError::Domain("cusp needs u/v > 0"));
        }
        Ok((self.k1 * self.k2 * self.k2 * u / v).cbrt() - 3.0 * u * u)
    }

    /// `q = uv` as a function of `p = v/u` on the swallowtail curve.
    pub fn q_swallowtail(&self, p: f64) -> Result<f64, ScenarioError> {
        if !(p > 0.0) {
            return Err(ScenarioError::Domain("swallowtail needs p > 0"));
        }
        let (k1, k2) = (self.k1, self.k2);
        Ok((k1 * k2).cbrt() / 18.0 * (k2.cbrt() * p.powf(2.0 / 3.0) + k1.cbrt() * p.powf(-2.0 / 3.0)))
    }

    /// `(u, v)` from `(p, q)`.
    pub fn uv_from_pq(p: f64, q: f64, branch: Branch) -> (f64, f64) {
        let s = branch.sign();
        (s * (q / p).sqrt(), s * (p * q).sqrt())
    }

    /// Butterfly coordinates `(u, v, b, d, a, g)`.
    pub fn butterfly(&self, branch: Branch) -> [f64; 6] {
        let (k1, k2) = (self.k1, self.k2);
        let s = branch.sign();
        let u = s / 3.0 * (k1 * k2.powi(3)).powf(0.125);
        let v = s / 3.0 * (k1.powi(3) * k2).powf(0.125);
        let a = 2.0 / 3.0 * (k1.powi(3) * k2).powf(0.25);
        let g = 2.0 / 3.0 * (k1 * k2.powi(3)).powf(0.25);
        let b = -s * 16.0 / 27.0 * (k1.powi(3) * k2).powf(0.375);
        let d = -s * 16.0 / 27.0 * (k1 * k2.powi(3)).powf(0.375);
        [u, v, b, d, a, g]
    }

    /// Point on the set `kind`, parameters in [`RD_PARAMS`] order.
    pub fn point(&self, kind: RdKind) -> Result<Point, ScenarioError> {
        let (u, v, gamma) = match kind {
            RdKind::Fold { u, v, gamma } => (u, v, gamma),
            RdKind::Cusp { u, v } => (u, v, self.gamma_cusp(u, v)?),
            RdKind::Swallowtail { p, branch } => {
                let q = self.q_swallowtail(p)?;
                let (u, v) = Self::uv_from_pq(p, q, branch);
                (u, v, self.gamma_cusp(u, v)?)
            }
            RdKind::Butterfly { branch } => {
                let [u, v, b, d, a, g] = self.butterfly(branch);
                return Ok(Point::new(vec![u, v], vec![b, d, a, g, self.k1, self.k2]));
            }
        };
        let alpha = self.alpha_fold(u, v, gamma)?;
        let beta = self.beta(u, v, alpha);
        let delta = self.delta(u, v, gamma);
        Ok(Point::new(vec![u, v], vec![beta, delta, alpha, gamma, self.k1, self.k2]))
    }

    /// Closed form for `G_{4,ijk}` at the butterfly with unfolding columns
    /// ordered `(a, b, g, d)`; indices are 1-based.
    pub fn butterfly_g(&self, i: usize, j: usize, k: usize) -> f64 {
        let sign = if (i + k) % 2 == 0 { 1.0 } else { -1.0 };
        let e = 0.75 * (k as f64 + 2.0 * j as f64 + 3.0 * i as f64 - 9.0);
        103680.0 * sign * (self.k1 * self.k2).powi(4) * (self.k1 / self.k2).powf(e)
    }
}

/// Closed forms of `B_1 .. B_4` for the reaction-diffusion field, used as
/// independent oracles. Arguments are `(u, v)` and parameters in
/// [`RD_PARAMS`] order.
pub fn rd_printed_b(level: usize, x: &[f64], p: &[f64]) -> f64 {
    let (u, v) = (x[0], x[1]);
    let (alpha, gamma, k1, k2) = (p[2], p[3], p[4], p[5]);
    let a = alpha + 3.0 * v * v;
    let c = gamma + 3.0 * u * u;
    match level {
        1 => k1 * k2 - a * c,
        2 => 6.0 * (k2 * u * a - v * c * c),
        3 => 6.0 * (18.0 * k2 * u * v * c - k2 * k2 * a - c.powi(3)),
        4 => 72.0 * k2 * (3.0 * u * c * c - 2.0 * k2 * v * c - 9.0 * k2 * u * u * v),
        _ => panic!("closed forms exist for levels 1..=4"),
    }
}

/// Human name of a codimension.
pub fn classify(r: usize) -> String {
    match r {
        1 => "fold".into(),
        2 => "cusp".into(),
        3 => "swallowtail".into(),
        4 => "butterfly".into(),
        _ => format!("A_{r}"),
    }
}

//! Steady-state counts over a rectangular grid in a parameter plane.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::VectorField;
use crate::report::{format_real, SCHEMA};
use crate::solver::{SolveError, SolveOptions, SteadyStateProblem};

#[derive(Debug, Clone, Error)]
pub enum ScanError {
    #[error("`{0}` is not a declared parameter")]
    UnknownAxis(String),
    #[error("both axes name `{0}`")]
    SameAxis(String),
    #[error("axis `{name}` needs lo < hi and at least one cell")]
    BadAxis { name: String },
    #[error("parameter `{0}` is neither an axis nor fixed")]
    Unfixed(String),
    #[error("parameter `{0}` is both an axis and fixed")]
    FixedAxis(String),
    #[error("unknown parameter `{0}` in fixed values")]
    UnknownFixed(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64, cells: usize) -> Self {
        Axis { name: name.into(), lo, hi, cells }
    }

    /// Center of cell `i`.
    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * (self.hi - self.lo) / self.cells as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub p1: f64,
    pub p2: f64,
    pub n_states: usize,
    pub n_attracting: usize,
}

/// Grid of steady-state counts; cells run over the first axis in the outer
/// loop and the second axis in the inner loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub axes: [Axis; 2],
    pub fixed: Vec<(String, f64)>,
    pub cells: Vec<RegionCell>,
}

impl RegionMap {
    pub fn to_csv(&self) -> String {
        let mut s = format!("# schema: {}\n{},{},n_states,n_attracting\n", SCHEMA, self.axes[0].name, self.axes[1].name);
        for c in &self.cells {
            s.push_str(&format!("{},{},{},{}\n", format_real(c.p1), format_real(c.p2), c.n_states, c.n_attracting));
        }
        s
    }

    pub fn get(&self, i: usize, j: usize) -> &RegionCell {
        &self.cells[i * self.axes[1].cells + j]
    }
}

/// Count steady states at every cell center. Every parameter must be
/// either an axis or fixed.
pub fn scan(
    f: &VectorField,
    axes: [Axis; 2],
    fixed: &[(String, f64)],
    x_box: &[(f64, f64)],
    opts: &SolveOptions,
) -> Result<RegionMap, ScanError> {
    let mut idx = [0usize; 2];
    for (k, a) in axes.iter().enumerate() {
        idx[k] = f.param_index(&a.name).ok_or_else(|| ScanError::UnknownAxis(a.name.clone()))?;
        if a.cells == 0 || !a.lo.is_finite() || !a.hi.is_finite() || a.lo >= a.hi {
            return Err(ScanError::BadAxis { name: a.name.clone() });
        }
    }
    if idx[0] == idx[1] {
        return Err(ScanError::SameAxis(axes[0].name.clone()));
    }
    let mut base: Vec<Option<f64>> = vec![None; f.num_params()];
    for (name, v) in fixed {
        let i = f.param_index(name).ok_or_else(|| ScanError::UnknownFixed(name.clone()))?;
        if idx.contains(&i) {
            return Err(ScanError::FixedAxis(name.clone()));
        }
        base[i] = Some(*v);
    }
    for (i, v) in base.iter().enumerate() {
        if v.is_none() && !idx.contains(&i) {
            return Err(ScanError::Unfixed(f.param_names()[i].clone()));
        }
    }
    let problem = SteadyStateProblem::new(f);
    let grid: Vec<(f64, f64)> = (0..axes[0].cells)
        .flat_map(|i| (0..axes[1].cells).map(move |j| (i, j)))
        .map(|(i, j)| (axes[0].center(i), axes[1].center(j)))
        .collect();
    let cells = grid
        .par_iter()
        .map(|&(p1, p2)| {
            let mut alpha: Vec<f64> = base.iter().map(|v| v.unwrap_or(0.0)).collect();
            alpha[idx[0]] = p1;
            alpha[idx[1]] = p2;
            let c = problem.census(&alpha, x_box, opts)?;
            Ok(RegionCell { p1, p2, n_states: c.count, n_attracting: c.attracting })
        })
        .collect::<Result<Vec<_>, SolveError>>()?;
    Ok(RegionMap { axes, fixed: fixed.to_vec(), cells })
}

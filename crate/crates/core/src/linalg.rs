//! Small dense numeric helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DVector};

/// Row-major nested vectors to a matrix.
pub fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(m, n, |i, j| rows[i][j])
}

/// Product of the Euclidean row norms: an upper bound on `|det m|`.
pub fn hadamard_bound(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.norm()).product()
}

pub fn max_row_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.norm()).fold(0.0, f64::max)
}

pub fn determinant(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant()
}

/// Solve `a x = b` by LU; `None` when `a` is exactly singular.
pub fn solve(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let rhs = DVector::from_column_slice(b);
    let x = a.clone().lu().solve(&rhs)?;
    x.iter().all(|v| v.is_finite()).then(|| x.iter().copied().collect())
}

/// Numeric rank by Gaussian elimination with partial pivoting. A pivot
/// counts when its magnitude exceeds `tol` times the largest row norm of
/// the input.
pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let scale = max_row_norm(m);
    if scale == 0.0 || !scale.is_finite() {
        return 0;
    }
    let threshold = tol * scale;
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (p, mag) = (r..rows)
            .map(|i| (i, a[(i, c)].abs()))
            .fold((r, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if mag <= threshold {
            continue;
        }
        a.swap_rows(r, p);
        for i in r + 1..rows {
            let f = a[(i, c)] / a[(r, c)];
            if f != 0.0 {
                for j in c..cols {
                    let v = a[(r, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
        r += 1;
    }
    r
}

/// Eigenvalues of a square real matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    m.complex_eigenvalues().iter().copied().collect()
}

//! Dense symmetric-matrix helpers: MLE covariance, a Cholesky log-determinant
//! that falls back to diagonal jitter, and centred least squares.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative pivot tolerance for the Cholesky factorization.
const PIVOT_RTOL: f64 = 1e-13;
/// Jitter scale, relative to the mean diagonal entry.
const JITTER_SCALE: f64 = 1e-8;
/// Absolute jitter used when the matrix has zero trace.
const JITTER_FLOOR: f64 = 1e-12;
const MAX_JITTER_ROUNDS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix has dimension 0")]
    Empty,
    #[error("expected {expected} entries for a {dim}x{dim} matrix, got {got}")]
    DimensionMismatch { dim: usize, expected: usize, got: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
}

/// A symmetric matrix stored densely in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if dim == 0 {
            return Err(LinalgError::Empty);
        }
        if data.len() != dim * dim {
            return Err(LinalgError::DimensionMismatch {
                dim,
                expected: dim * dim,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let a = data[i * dim + j];
                let b = data[j * dim + i];
                let scale = a.abs().max(b.abs()).max(1.0);
                if (a - b).abs() > 1e-12 * scale {
                    return Err(LinalgError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from rows; convenient for literals in tests and docs.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, LinalgError> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(LinalgError::DimensionMismatch {
                    dim,
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self, LinalgError> {
        let dim = diag.len();
        let mut data = vec![0.0; dim * dim];
        for (i, d) in diag.iter().enumerate() {
            data[i * dim + i] = *d;
        }
        Self::new(dim, data)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim]).expect("identity of positive dimension")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Result of a stabilized log-determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub value: f64,
    /// Diagonal jitter that was added, or 0 when the plain factorization succeeded.
    pub jitter: f64,
}

impl LogDet {
    pub fn jittered(&self) -> bool {
        self.jitter > 0.0
    }
}

/// Lower-triangular Cholesky factor, or `None` when a pivot falls below tolerance.
pub(crate) fn cholesky(a: &[f64], dim: usize) -> Option<Vec<f64>> {
    let max_diag = (0..dim).map(|i| a[i * dim + i].abs()).fold(0.0, f64::max);
    let tol = PIVOT_RTOL * max_diag;
    let mut l = vec![0.0; dim * dim];
    for j in 0..dim {
        let mut pivot = a[j * dim + j];
        for k in 0..j {
            pivot -= l[j * dim + k] * l[j * dim + k];
        }
        if !pivot.is_finite() || pivot <= tol || pivot <= 0.0 {
            return None;
        }
        let d = pivot.sqrt();
        l[j * dim + j] = d;
        for i in (j + 1)..dim {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            l[i * dim + j] = s / d;
        }
    }
    Some(l)
}

fn log_det_from_factor(l: &[f64], dim: usize) -> f64 {
    2.0 * (0..dim).map(|i| l[i * dim + i].ln()).sum::<f64>()
}

/// `ln det(m)` via Cholesky. When a pivot is too small, `eps * I` is added
/// with `eps = 1e-8 * trace / d`, growing tenfold until the factorization succeeds.
pub fn log_det_stabilized(m: &SymMatrix) -> LogDet {
    let dim = m.dim;
    if let Some(l) = cholesky(&m.data, dim) {
        return LogDet {
            value: log_det_from_factor(&l, dim),
            jitter: 0.0,
        };
    }
    let mut eps = JITTER_SCALE * m.trace() / dim as f64;
    if !(eps > 0.0) || !eps.is_finite() {
        eps = JITTER_FLOOR;
    }
    let mut work = m.data.clone();
    for _ in 0..MAX_JITTER_ROUNDS {
        for i in 0..dim {
            work[i * dim + i] = m.data[i * dim + i] + eps;
        }
        if let Some(l) = cholesky(&work, dim) {
            return LogDet {
                value: log_det_from_factor(&l, dim),
                jitter: eps,
            };
        }
        eps *= 10.0;
    }
    // Indefinite input (not a covariance). Fall back to the diagonal so callers
    // still get a finite number; the jitter flag marks the event.
    let value = (0..dim)
        .map(|i| (m.data[i * dim + i].abs() + eps).ln())
        .sum();
    LogDet { value, jitter: eps }
}

/// MLE covariance (divide by count) of `columns` restricted to `rows`.
pub(crate) fn covariance(columns: &[&[f64]], rows: &[usize]) -> SymMatrix {
    let d = columns.len();
    let m = rows.len() as f64;
    let means: Vec<f64> = columns
        .iter()
        .map(|c| rows.iter().map(|&r| c[r]).sum::<f64>() / m)
        .collect();
    let mut data = vec![0.0; d * d];
    for i in 0..d {
        for j in i..d {
            let (ci, cj) = (columns[i], columns[j]);
            let (mi, mj) = (means[i], means[j]);
            let s: f64 = rows.iter().map(|&r| (ci[r] - mi) * (cj[r] - mj)).sum();
            data[i * d + j] = s / m;
            data[j * d + i] = s / m;
        }
    }
    SymMatrix { dim: d, data }
}

/// Ordinary least squares with an intercept, solved on centred normal equations.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LeastSquares {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Mean squared residual.
    pub residual_variance: f64,
    pub ridge: bool,
}

pub(crate) fn least_squares(predictors: &[&[f64]], target: &[f64], rows: &[usize]) -> LeastSquares {
    let p = predictors.len();
    let m = rows.len() as f64;
    let y_mean = rows.iter().map(|&r| target[r]).sum::<f64>() / m;
    if p == 0 {
        let rss: f64 = rows.iter().map(|&r| (target[r] - y_mean).powi(2)).sum();
        return LeastSquares {
            intercept: y_mean,
            coefficients: Vec::new(),
            residual_variance: rss / m,
            ridge: false,
        };
    }
    let x_means: Vec<f64> = predictors
        .iter()
        .map(|c| rows.iter().map(|&r| c[r]).sum::<f64>() / m)
        .collect();
    let mut gram = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    for &r in rows {
        let yc = target[r] - y_mean;
        for i in 0..p {
            let xi = predictors[i][r] - x_means[i];
            rhs[i] += xi * yc;
            for j in i..p {
                gram[i * p + j] += xi * (predictors[j][r] - x_means[j]);
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            gram[i * p + j] = gram[j * p + i];
        }
    }
    let (factor, ridge) = match cholesky(&gram, p) {
        Some(l) => (l, false),
        None => {
            let trace: f64 = (0..p).map(|i| gram[i * p + i]).sum();
            let mut lambda = 1e-8 * trace;
            if !(lambda > 0.0) {
                lambda = JITTER_FLOOR;
            }
            let mut work = gram.clone();
            loop {
                for i in 0..p {
                    work[i * p + i] = gram[i * p + i] + lambda;
                }
                if let Some(l) = cholesky(&work, p) {
                    break (l, true);
                }
                lambda *= 10.0;
            }
        }
    };
    let coefficients = cholesky_solve(&factor, p, &rhs);
    let intercept = y_mean
        - coefficients
            .iter()
            .zip(&x_means)
            .map(|(b, xm)| b * xm)
            .sum::<f64>();
    let rss: f64 = rows
        .iter()
        .map(|&r| {
            let fit = intercept
                + coefficients
                    .iter()
                    .zip(predictors)
                    .map(|(b, c)| b * c[r])
                    .sum::<f64>();
            (target[r] - fit).powi(2)
        })
        .sum();
    LeastSquares {
        intercept,
        coefficients,
        residual_variance: rss / m,
        ridge,
    }
}

fn cholesky_solve(l: &[f64], dim: usize, b: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; dim];
    for i in 0..dim {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * dim + k] * z[k];
        }
        z[i] = s / l[i * dim + i];
    }
    let mut x = vec![0.0; dim];
    for i in (0..dim).rev() {
        let mut s = z[i];
        for k in (i + 1)..dim {
            s -= l[k * dim + i] * x[k];
        }
        x[i] = s / l[i * dim + i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric() {
        let err = SymMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap_err();
        assert_eq!(err, LinalgError::NotSymmetric { row: 0, col: 1 });
    }

    #[test]
    fn rejects_bad_length() {
        assert!(matches!(
            SymMatrix::new(2, vec![1.0; 3]),
            Err(LinalgError::DimensionMismatch { .. })
        ));
        assert_eq!(SymMatrix::new(0, vec![]), Err(LinalgError::Empty));
    }

    #[test]
    fn log_det_of_known_matrix() {
        // det [[4,2],[2,3]] = 8
        let m = SymMatrix::from_rows(&[&[4.0, 2.0], &[2.0, 3.0]]).unwrap();
        let ld = log_det_stabilized(&m);
        assert!((ld.value - 8f64.ln()).abs() < 1e-12);
        assert!(!ld.jittered());
    }

    #[test]
    fn singular_matrix_gets_jitter() {
        let m = SymMatrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        let ld = log_det_stabilized(&m);
        assert!(ld.jittered());
        assert!(ld.value.is_finite());
        assert!((ld.jitter - 1e-8).abs() < 1e-20);
    }

    #[test]
    fn zero_matrix_uses_absolute_jitter() {
        let m = SymMatrix::from_diagonal(&[0.0]).unwrap();
        let ld = log_det_stabilized(&m);
        assert_eq!(ld.jitter, JITTER_FLOOR);
        assert!((ld.value - JITTER_FLOOR.ln()).abs() < 1e-9);
    }

    #[test]
    fn covariance_is_mle() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 6.0, 8.0];
        let c = covariance(&[&x, &y], &[0, 1, 2, 3]);
        assert!((c.get(0, 0) - 1.25).abs() < 1e-12);
        assert!((c.get(0, 1) - 2.5).abs() < 1e-12);
        assert!((c.get(1, 1) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn exact_line_fit() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let fit = least_squares(&[&x], &y, &[0, 1, 2, 3]);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-12);
        assert!(fit.residual_variance < 1e-20);
        assert!(!fit.ridge);
    }

    #[test]
    fn collinear_predictors_fall_back_to_ridge() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let fit = least_squares(&[&x, &x], &y, &[0, 1, 2, 3]);
        assert!(fit.ridge);
        assert!((fit.coefficients[0] + fit.coefficients[1] - 2.0).abs() < 1e-6);
    }
}

//! Lawson–Hanson nonnegative least squares: `min ‖Ax − b‖₂` subject to `x ≥ 0`.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Unconstrained least squares on the columns in `passive`.
fn solve_subset(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[usize]) -> DVector<f64> {
    let sub = a.select_columns(passive);
    sub.svd(true, true).solve(b, 1e-14).expect("U and V were requested")
}

pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> NnlsSolution {
    let n = a.ncols();
    assert_eq!(a.nrows(), b.len(), "dimension mismatch");
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0) * b.amax().max(1.0);
    let tol = 1e-13 * scale * (a.nrows().max(n) as f64).sqrt();
    let max_iter = 3 * n + 30;
    let mut iterations = 0;

    loop {
        let grad = a.tr_mul(&(b - a * &x));
        let candidate = (0..n).filter(|&j| !passive[j]).max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        let Some(j) = candidate else { break };
        if grad[j] <= tol || iterations >= max_iter {
            break;
        }
        passive[j] = true;

        loop {
            iterations += 1;
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let s = solve_subset(a, b, &idx);
            if s.iter().all(|&v| v > 0.0) {
                for (pos, &k) in idx.iter().enumerate() {
                    x[k] = s[pos];
                }
                break;
            }
            // Step back toward the feasible region until a variable hits zero.
            let mut alpha = f64::INFINITY;
            for (pos, &k) in idx.iter().enumerate() {
                if s[pos] <= 0.0 {
                    alpha = alpha.min(x[k] / (x[k] - s[pos]));
                }
            }
            for (pos, &k) in idx.iter().enumerate() {
                x[k] += alpha * (s[pos] - x[k]);
                if x[k] <= 1e-15 {
                    x[k] = 0.0;
                    passive[k] = false;
                }
            }
            if !passive.iter().any(|&p| p) || iterations >= max_iter {
                break;
            }
        }
        if iterations >= max_iter {
            break;
        }
    }
    let residual_norm = (b - a * &x).norm();
    NnlsSolution { x, residual_norm, iterations }
}

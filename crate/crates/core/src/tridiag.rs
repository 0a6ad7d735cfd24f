//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]` in place
/// (the solution overwrites `rhs`). `lower[0]` and `upper[n-1]` are ignored.
/// `scratch` must have length n.
pub(crate) fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut [f64]) -> Result<()> {
    let n = diag.len();
    let mut beta = diag[0];
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::Internal("singular tridiagonal system".into()));
    }
    rhs[0] /= beta;
    for i in 1..n {
        scratch[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * scratch[i];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::Internal("singular tridiagonal system".into()));
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    #[test]
    fn small_system() {
        // [2 1 0; 1 3 1; 0 1 2] x = [3 5 3] -> x = [1 1 1]
        let lower = [0.0, 1.0, 1.0];
        let diag = [2.0, 3.0, 2.0];
        let upper = [1.0, 1.0, 0.0];
        let mut rhs = [3.0, 5.0, 3.0];
        let mut s = [0.0; 3];
        super::solve(&lower, &diag, &upper, &mut rhs, &mut s).unwrap();
        for v in rhs {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }
}

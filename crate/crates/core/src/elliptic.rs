//! Screened Poisson solve `v'' - lambda v + mu s = 0` on the whole line,
//! truncated to a grid with analytic tails.
//!
//! The solution is `Psi(x) = mu/(2k) * int e^{-k|x-y|} s(y) dy` with
//! `k = sqrt(lambda)`. With `s` piecewise linear, the one-sided integrals
//! `L_i = int_{-inf}^{x_i} e^{-k(x_i-y)} s` and `R_i = int_{x_i}^{inf} e^{-k(y-x_i)} s`
//! satisfy exact two-term recurrences, so both sweeps are O(n).

use crate::error::{domain, Error, Result};
use crate::grid::Field;
use crate::tridiag;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeftTail {
    /// s(y) = level for y < x0
    Constant(f64),
    /// s(y) = s[0] * exp(rate * (y - x0)) for y < x0; needs rate > -sqrt(lambda)
    Exponential(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RightTail {
    Constant(f64),
    /// s(y) = s[n-1] * exp(-rate * (y - x_end)); needs rate > -sqrt(lambda)
    Exponential(f64),
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSpec {
    pub left: LeftTail,
    pub right: RightTail,
}

impl TailSpec {
    /// Constant continuation at both endpoint values.
    pub fn endpoint_constant(s: &[f64]) -> Self {
        TailSpec { left: LeftTail::Constant(s[0]), right: RightTail::Constant(s[s.len() - 1]) }
    }

    /// Plateau on the left, exponential decay at `rate` on the right.
    pub fn front(s: &[f64], rate: f64) -> Self {
        TailSpec { left: LeftTail::Constant(s[0]), right: RightTail::Exponential(rate) }
    }
}

/// 1 - e^{-q}(1+q), accurate for small q.
fn one_minus_exp_poly(q: f64) -> f64 {
    if q > 0.1 {
        return 1.0 - (-q).exp() * (1.0 + q);
    }
    // sum_{n>=2} (-1)^n (n-1)/n! q^n
    let mut term = q * q / 2.0; // q^n/n! for n = 2
    let mut sum = 0.0;
    let mut sign = 1.0;
    for n in 2..20 {
        sum += sign * (n as f64 - 1.0) * term;
        term *= q / (n as f64 + 1.0);
        sign = -sign;
        if term < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Cached sweep weights for a fixed (h, lambda, mu).
#[derive(Debug, Clone, Copy)]
pub struct KernelSolver {
    k: f64,
    mu: f64,
    decay: f64,
    w_far: f64,
    w_near: f64,
}

impl KernelSolver {
    pub fn new(h: f64, lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return domain(format!("lambda must be positive (got {lambda})"));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return domain(format!("mu must be positive (got {mu})"));
        }
        let k = lambda.sqrt();
        let q = k * h;
        let w_far = one_minus_exp_poly(q) / (q * k);
        let w_near = -(-q).exp_m1() / k - w_far;
        Ok(KernelSolver { k, mu, decay: (-q).exp(), w_far, w_near })
    }

    fn check_tails(&self, s: &[f64], tails: &TailSpec) -> Result<(f64, f64)> {
        let n = s.len();
        let scale = s.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let tol = 1e-8 * scale;
        let left = match tails.left {
            LeftTail::Constant(a) => {
                if (a - s[0]).abs() > tol {
                    return domain(format!("left tail level {a} inconsistent with s[0] = {}", s[0]));
                }
                a / self.k
            }
            LeftTail::Exponential(r) => {
                if !(r > -self.k) {
                    return domain(format!("left tail rate {r} ≤ -sqrt(lambda): divergent tail integral"));
                }
                s[0] / (self.k + r)
            }
        };
        let right = match tails.right {
            RightTail::Constant(a) => {
                if (a - s[n - 1]).abs() > tol {
                    return domain(format!("right tail level {a} inconsistent with s[end] = {}", s[n - 1]));
                }
                a / self.k
            }
            RightTail::Exponential(r) => {
                if !(r > -self.k) {
                    return domain(format!("right tail rate {r} ≤ -sqrt(lambda): divergent tail integral"));
                }
                s[n - 1] / (self.k + r)
            }
            RightTail::Zero => {
                if s[n - 1].abs() > tol {
                    return domain(format!("zero right tail but s[end] = {}", s[n - 1]));
                }
                0.0
            }
        };
        Ok((left, right))
    }

    /// Writes Psi into `psi` and, if given, dPsi/dx into `dpsi`.
    /// `scratch` receives the left integrals L_i.
    pub fn apply(
        &self,
        s: &[f64],
        tails: &TailSpec,
        psi: &mut [f64],
        mut dpsi: Option<&mut [f64]>,
        scratch: &mut Vec<f64>,
    ) -> Result<()> {
        let n = s.len();
        if let Some(i) = s.iter().position(|v| !v.is_finite()) {
            return domain(format!("source non-finite at node {i}"));
        }
        let (l0, r_end) = self.check_tails(s, tails)?;
        let (e, wf, wn) = (self.decay, self.w_far, self.w_near);
        scratch.resize(n, 0.0);
        let l = scratch;
        l[0] = l0;
        for i in 0..n - 1 {
            l[i + 1] = e * l[i] + wf * s[i] + wn * s[i + 1];
        }
        let cpsi = self.mu / (2.0 * self.k);
        let cd = 0.5 * self.mu;
        let mut r = r_end;
        for i in (0..n).rev() {
            if i < n - 1 {
                r = e * r + wn * s[i] + wf * s[i + 1];
            }
            psi[i] = cpsi * (l[i] + r);
            if let Some(d) = dpsi.as_deref_mut() {
                d[i] = cd * (r - l[i]);
            }
        }
        Ok(())
    }
}

pub fn solve_psi_with_derivative(s: &Field, lambda: f64, mu: f64, tails: TailSpec) -> Result<(Field, Field)> {
    let solver = KernelSolver::new(s.grid.h, lambda, mu)?;
    let mut psi = vec![0.0; s.len()];
    let mut dpsi = vec![0.0; s.len()];
    solver.apply(&s.values, &tails, &mut psi, Some(&mut dpsi), &mut Vec::new())?;
    Ok((Field { grid: s.grid, values: psi }, Field { grid: s.grid, values: dpsi }))
}

pub fn solve_psi(s: &Field, lambda: f64, mu: f64, tails: TailSpec) -> Result<Field> {
    let solver = KernelSolver::new(s.grid.h, lambda, mu)?;
    let mut psi = vec![0.0; s.len()];
    solver.apply(&s.values, &tails, &mut psi, None, &mut Vec::new())?;
    Ok(Field { grid: s.grid, values: psi })
}

pub fn psi_derivative(s: &Field, lambda: f64, mu: f64, tails: TailSpec) -> Result<Field> {
    Ok(solve_psi_with_derivative(s, lambda, mu, tails)?.1)
}

/// Second-order finite-difference solve with Dirichlet end values.
pub fn solve_fd(s: &Field, lambda: f64, mu: f64, bc_left: f64, bc_right: f64) -> Result<Field> {
    if !(lambda > 0.0) || !(mu > 0.0) {
        return domain(format!("lambda and mu must be positive (got {lambda}, {mu})"));
    }
    let n = s.len();
    let h2 = s.grid.h * s.grid.h;
    let m = n - 2;
    let lower = vec![-1.0; m];
    let diag = vec![2.0 + lambda * h2; m];
    let upper = vec![-1.0; m];
    let mut rhs: Vec<f64> = (1..n - 1).map(|i| mu * h2 * s.values[i]).collect();
    rhs[0] += bc_left;
    rhs[m - 1] += bc_right;
    let mut scratch = vec![0.0; m];
    tridiag::solve(&lower, &diag, &upper, &mut rhs, &mut scratch)?;
    let mut v = Vec::with_capacity(n);
    v.push(bc_left);
    v.extend_from_slice(&rhs);
    v.push(bc_right);
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Internal("finite-difference solve produced non-finite values".into()));
    }
    Ok(Field { grid: s.grid, values: v })
}

/// Convenience: v = Psi(u^gamma; 1, 1) with the given tail rule.
pub fn signal_from_density(u: &Field, gamma: f64, tails: impl Fn(&[f64]) -> TailSpec) -> Result<(Field, Field)> {
    let s = u.map(|x| crate::cauchy::pow(x, gamma));
    let t = tails(&s.values);
    solve_psi_with_derivative(&s, 1.0, 1.0, t)
}

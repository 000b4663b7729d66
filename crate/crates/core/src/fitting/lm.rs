//! Damped least squares (Levenberg–Marquardt) with central-difference Jacobians.
//!
//! Each iteration first tries the undamped Gauss–Newton step when the damping
//! has decayed to zero, so linear problems are solved in one accepted step.
//! A trial is accepted only if it strictly lowers the cost, which keeps the
//! accepted-cost sequence monotone.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop once an accepted step lowers the cost by less than this fraction.
    pub cost_tolerance: f64,
    /// Stop once the gradient ∞-norm falls below this.
    pub gradient_tolerance: f64,
    /// Scale the covariance by the reduced χ² (unknown noise level).
    pub scale_covariance: bool,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            cost_tolerance: 1e-10,
            gradient_tolerance: 1e-8,
            scale_covariance: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Gradient,
    CostChange,
    /// The damping grew without bound: no step lowers the cost any further.
    Stalled,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmReport {
    pub params: Vec<f64>,
    /// 1σ from the inverse approximate Hessian; `inf` where it is singular.
    pub sigmas: Vec<f64>,
    /// ½‖r‖²
    pub cost: f64,
    pub residual_rms: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub termination: Termination,
    /// Cost after every accepted step, starting with the initial cost.
    pub cost_history: Vec<f64>,
}

impl LmReport {
    pub fn converged(&self) -> bool {
        self.termination != Termination::MaxIterations
    }
}

/// Box constraints; `None` entries are unbounded on that side.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Bounds {
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
}

impl Bounds {
    pub fn unbounded(n: usize) -> Self {
        Self {
            lower: vec![None; n],
            upper: vec![None; n],
        }
    }

    fn project(&self, p: &mut [f64]) {
        for (i, v) in p.iter_mut().enumerate() {
            if let Some(Some(lo)) = self.lower.get(i) {
                *v = v.max(*lo);
            }
            if let Some(Some(hi)) = self.upper.get(i) {
                *v = v.min(*hi);
            }
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::InvalidParameter {
                name: "bounds",
                value: n as f64,
                reason: "length must match the parameter count",
            });
        }
        for (lo, hi) in self.lower.iter().zip(&self.upper) {
            if let (Some(lo), Some(hi)) = (lo, hi) {
                if lo > hi {
                    return Err(Error::InvalidParameter {
                        name: "bounds",
                        value: *lo,
                        reason: "lower bound exceeds upper bound",
                    });
                }
            }
        }
        Ok(())
    }
}

fn cost_of(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

fn finite(r: &[f64]) -> bool {
    r.iter().all(|v| v.is_finite())
}

/// Central-difference Jacobian, step `max(1e-6, 1e-6·|p|)` per parameter.
pub fn numerical_jacobian<F>(residuals: &F, p: &[f64], m: usize) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = p.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut work = p.to_vec();
    for j in 0..n {
        let h = (1e-6 * p[j].abs()).max(1e-6);
        work[j] = p[j] + h;
        let plus = residuals(&work);
        work[j] = p[j] - h;
        let minus = residuals(&work);
        work[j] = p[j];
        for i in 0..m {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    jac
}

/// Minimizes `½‖residuals(p)‖²` from `initial` within `bounds`.
pub fn lm_minimize<F>(
    residuals: F,
    initial: &[f64],
    bounds: &Bounds,
    opts: &LmOptions,
) -> Result<LmReport>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = initial.len();
    bounds.check(n)?;
    let mut p = initial.to_vec();
    bounds.project(&mut p);
    let mut r = residuals(&p);
    if !finite(&r) {
        return Err(Error::NonFiniteResidual);
    }
    let m = r.len();
    let mut cost = cost_of(&r);
    let mut history = vec![cost];
    let mut damping = 0.0_f64;
    let mut iterations = 0;
    let mut grad_norm;

    let termination = 'outer: loop {
        if cost == 0.0 {
            grad_norm = 0.0;
            break Termination::Gradient;
        }
        let jac = numerical_jacobian(&residuals, &p, m);
        let rv = DVector::from_column_slice(&r);
        let grad = jac.tr_mul(&rv);
        grad_norm = grad.amax();
        if grad_norm < opts.gradient_tolerance {
            break Termination::Gradient;
        }
        if iterations >= opts.max_iterations {
            break Termination::MaxIterations;
        }
        let jtj = jac.tr_mul(&jac);
        let diag_floor = jtj.diagonal().amax().max(f64::MIN_POSITIVE) * 1e-15;

        loop {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += damping * jtj[(i, i)].max(diag_floor);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    // Singular normal equations: retry with more damping.
                    damping = next_damping(damping);
                    if damping > 1e20 {
                        break 'outer Termination::Stalled;
                    }
                    continue;
                }
            };
            let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            bounds.project(&mut trial);
            let r_trial = residuals(&trial);
            let cost_trial = cost_of(&r_trial);
            if finite(&r_trial) && cost_trial < cost {
                let rel_change = (cost - cost_trial) / cost;
                p = trial;
                r = r_trial;
                cost = cost_trial;
                history.push(cost);
                iterations += 1;
                damping = if damping < 1e-9 { 0.0 } else { damping / 10.0 };
                if rel_change < opts.cost_tolerance {
                    // Refresh the gradient at the accepted point for the report.
                    let jac = numerical_jacobian(&residuals, &p, m);
                    grad_norm = jac.tr_mul(&DVector::from_column_slice(&r)).amax();
                    break 'outer Termination::CostChange;
                }
                break;
            }
            damping = next_damping(damping);
            if damping > 1e20 {
                break 'outer Termination::Stalled;
            }
        }
    };

    let sigmas = covariance_sigmas(&residuals, &p, &r, opts.scale_covariance);
    Ok(LmReport {
        residual_rms: (2.0 * cost / m as f64).sqrt(),
        params: p,
        sigmas,
        cost,
        gradient_norm: grad_norm,
        iterations,
        termination,
        cost_history: history,
    })
}

fn next_damping(damping: f64) -> f64 {
    if damping == 0.0 {
        1e-3
    } else {
        damping * 10.0
    }
}

fn covariance_sigmas<F>(residuals: &F, p: &[f64], r: &[f64], scale: bool) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = p.len();
    let m = r.len();
    let jac = numerical_jacobian(residuals, p, m);
    let variance = if !scale {
        1.0
    } else if m > n {
        2.0 * cost_of(r) / (m - n) as f64
    } else {
        f64::INFINITY
    };
    match jac.tr_mul(&jac).try_inverse() {
        Some(inv) => (0..n)
            .map(|i| {
                let v = inv[(i, i)] * variance;
                if v.is_nan() || v < 0.0 {
                    f64::INFINITY
                } else {
                    v.sqrt()
                }
            })
            .collect(),
        None => vec![f64::INFINITY; n],
    }
}

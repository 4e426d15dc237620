//! Damped Gauss–Newton (Levenberg–Marquardt) for small dense problems.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative step size below which the iteration is considered converged.
    pub param_tolerance: f64,
    /// Infinity norm of Jᵀr below which the iteration is considered converged.
    pub gradient_tolerance: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 200,
            param_tolerance: 1e-10,
            gradient_tolerance: 1e-15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmReport {
    pub params: DVector<f64>,
    /// ½‖r‖² at `params`.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes ½‖r(x)‖². `model` returns the residual vector and its Jacobian
/// (rows: residuals, columns: parameters).
pub fn levenberg_marquardt<F>(initial: DVector<f64>, mut model: F, opts: LmOptions) -> LmReport
where
    F: FnMut(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>),
{
    let mut x = initial;
    let (mut r, mut jac) = model(&x);
    let mut cost = 0.5 * r.norm_squared();
    let failed = |x: DVector<f64>, cost: f64, iterations| LmReport {
        params: x,
        cost,
        iterations,
        converged: false,
    };
    if !cost.is_finite() || jac.iter().any(|v| !v.is_finite()) {
        return failed(x, cost, 0);
    }

    let mut jtj = jac.tr_mul(&jac);
    let mut grad = jac.tr_mul(&r);
    let mut mu = 1e-3 * jtj.diagonal().max();
    let mut nu = 2.0;

    for iteration in 1..=opts.max_iterations {
        if grad.amax() <= opts.gradient_tolerance {
            return LmReport {
                params: x,
                cost,
                iterations: iteration - 1,
                converged: true,
            };
        }
        // Marquardt scaling keeps the damping invariant under parameter units.
        let scale = jtj.diagonal().map(|d| d.max(1e-300));
        let mut lhs = jtj.clone();
        for i in 0..lhs.nrows() {
            lhs[(i, i)] += mu * scale[i];
        }
        let step = match lhs.cholesky() {
            Some(ch) => ch.solve(&(-&grad)),
            None => {
                mu *= nu;
                nu *= 2.0;
                if !mu.is_finite() {
                    return failed(x, cost, iteration);
                }
                continue;
            }
        };
        if step.norm() <= opts.param_tolerance * (x.norm() + opts.param_tolerance) {
            return LmReport {
                params: x,
                cost,
                iterations: iteration,
                converged: true,
            };
        }
        let candidate = &x + &step;
        let (r_new, jac_new) = model(&candidate);
        let cost_new = 0.5 * r_new.norm_squared();
        let damping_term = step.component_mul(&scale) * mu;
        let predicted = 0.5 * step.dot(&(damping_term - &grad));
        let gain = if predicted > 0.0 {
            (cost - cost_new) / predicted
        } else {
            -1.0
        };
        if cost_new.is_finite() && gain > 0.0 {
            x = candidate;
            r = r_new;
            jac = jac_new;
            cost = cost_new;
            jtj = jac.tr_mul(&jac);
            grad = jac.tr_mul(&r);
            mu *= (1.0 / 3.0f64).max(1.0 - (2.0 * gain - 1.0).powi(3));
            nu = 2.0;
        } else {
            mu *= nu;
            nu *= 2.0;
            if !mu.is_finite() {
                return failed(x, cost, iteration);
            }
        }
    }
    failed(x, cost, opts.max_iterations)
}

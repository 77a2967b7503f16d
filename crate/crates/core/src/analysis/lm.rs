//! Small dense Levenberg–Marquardt solver with Marquardt diagonal scaling.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

pub trait LeastSquares {
    fn n_params(&self) -> usize;

    /// Weighted residuals at `params`. An `Err` marks the point as infeasible
    /// and the step proposing it is rejected.
    fn residuals(&self, params: &[f64]) -> Result<Vec<f64>>;

    /// Analytic Jacobian of the residuals; `None` selects central differences.
    fn jacobian(&self, _params: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    fn feasible(&self, _params: &[f64]) -> bool {
        true
    }

    /// Finite-difference step for parameter `j`.
    fn diff_step(&self, params: &[f64], j: usize) -> f64 {
        1e-6 * params[j].abs().max(1e-3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmSettings {
    pub max_iterations: usize,
    /// Converged once an accepted step satisfies ‖δ‖ ≤ tol·(‖p‖ + tol).
    pub step_tolerance: f64,
    pub initial_lambda: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        LmSettings {
            max_iterations: 200,
            step_tolerance: 1e-10,
            initial_lambda: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Σ r² at the optimum.
    pub objective: f64,
    /// Objective after the initial evaluation and after every accepted step.
    pub history: Vec<f64>,
    pub iterations: usize,
    /// Jacobian at the returned parameters.
    pub jacobian: DMatrix<f64>,
}

impl LmOutcome {
    /// (JᵀJ)⁻¹ scaled by `variance`, or `None` if JᵀJ is singular.
    pub fn covariance(&self, variance: f64) -> Option<DMatrix<f64>> {
        let jtj = self.jacobian.transpose() * &self.jacobian;
        jtj.try_inverse().map(|inv| inv * variance)
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn jacobian_at<P: LeastSquares + ?Sized>(
    problem: &P,
    params: &[f64],
    residuals: &[f64],
) -> Result<DMatrix<f64>> {
    if let Some(j) = problem.jacobian(params) {
        return Ok(j);
    }
    let m = residuals.len();
    let n = params.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut probe = params.to_vec();
    for j in 0..n {
        let h = problem.diff_step(params, j);
        probe[j] = params[j] + h;
        let plus = problem.residuals(&probe);
        probe[j] = params[j] - h;
        let minus = problem.residuals(&probe);
        probe[j] = params[j];
        match (plus, minus) {
            (Ok(p), Ok(q)) => {
                for i in 0..m {
                    jac[(i, j)] = (p[i] - q[i]) / (2.0 * h);
                }
            }
            // one-sided at a feasibility boundary
            (Ok(p), Err(_)) => {
                for i in 0..m {
                    jac[(i, j)] = (p[i] - residuals[i]) / h;
                }
            }
            (Err(_), Ok(q)) => {
                for i in 0..m {
                    jac[(i, j)] = (residuals[i] - q[i]) / h;
                }
            }
            (Err(e), Err(_)) => return Err(e),
        }
    }
    Ok(jac)
}

pub fn levenberg_marquardt<P: LeastSquares + ?Sized>(
    problem: &P,
    initial: &[f64],
    settings: &LmSettings,
) -> Result<LmOutcome> {
    let n = problem.n_params();
    if initial.len() != n {
        return Err(Error::invalid("initial", "wrong parameter count"));
    }
    let mut params = initial.to_vec();
    let mut residuals = problem.residuals(&params)?;
    let mut objective = sum_sq(&residuals);
    let mut history = vec![objective];
    let mut lambda = settings.initial_lambda;
    let mut jac = jacobian_at(problem, &params, &residuals)?;

    for iteration in 0..settings.max_iterations {
        if objective == 0.0 {
            return Ok(finish(params, residuals, objective, history, iteration, jac));
        }
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * DVector::from_column_slice(&residuals);

        // inner loop: raise λ until a step lowers the objective
        loop {
            let mut lhs = jtj.clone();
            for k in 0..n {
                let d = jtj[(k, k)];
                lhs[(k, k)] = d + lambda * if d > 0.0 { d } else { 1.0 };
            }
            let step = match lhs.clone().cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => match lhs.lu().solve(&(-&grad)) {
                    Some(s) => s,
                    None => {
                        lambda *= 10.0;
                        if lambda > 1e20 {
                            return Err(Error::Singular("normal equations"));
                        }
                        continue;
                    }
                },
            };
            let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
            let accepted = if problem.feasible(&trial) {
                match problem.residuals(&trial) {
                    Ok(r) => {
                        let obj = sum_sq(&r);
                        (obj < objective).then_some((r, obj))
                    }
                    Err(_) => None,
                }
            } else {
                None
            };
            match accepted {
                Some((r, obj)) => {
                    let step_norm = step.norm();
                    let p_norm = params.iter().map(|x| x * x).sum::<f64>().sqrt();
                    params = trial;
                    residuals = r;
                    objective = obj;
                    history.push(obj);
                    lambda = (lambda / 10.0).max(1e-12);
                    jac = jacobian_at(problem, &params, &residuals)?;
                    let tol = settings.step_tolerance;
                    if step_norm <= tol * (p_norm + tol) {
                        return Ok(finish(params, residuals, objective, history, iteration + 1, jac));
                    }
                    break;
                }
                None => {
                    lambda *= 10.0;
                    if lambda > 1e16 {
                        // no downhill direction left at working precision
                        return Ok(finish(params, residuals, objective, history, iteration + 1, jac));
                    }
                }
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: settings.max_iterations,
    })
}

fn finish(
    params: Vec<f64>,
    residuals: Vec<f64>,
    objective: f64,
    history: Vec<f64>,
    iterations: usize,
    jacobian: DMatrix<f64>,
) -> LmOutcome {
    LmOutcome {
        params,
        residuals,
        objective,
        history,
        iterations,
        jacobian,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock;

    impl LeastSquares for Rosenbrock {
        fn n_params(&self) -> usize {
            2
        }
        fn residuals(&self, p: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]])
        }
    }

    struct Exponential {
        t: Vec<f64>,
        y: Vec<f64>,
    }

    impl LeastSquares for Exponential {
        fn n_params(&self) -> usize {
            2
        }
        fn residuals(&self, p: &[f64]) -> Result<Vec<f64>> {
            Ok(self
                .t
                .iter()
                .zip(&self.y)
                .map(|(t, y)| p[0] * (-p[1] * t).exp() - y)
                .collect())
        }
    }

    #[test]
    fn solves_rosenbrock() {
        let out = levenberg_marquardt(&Rosenbrock, &[-1.2, 1.0], &LmSettings::default()).unwrap();
        assert!((out.params[0] - 1.0).abs() < 1e-8);
        assert!((out.params[1] - 1.0).abs() < 1e-8);
        assert!(out.history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn recovers_exponential() {
        let t: Vec<f64> = (0..30).map(|i| 0.1 * i as f64).collect();
        let y = t.iter().map(|t| 2.5 * (-0.7 * t).exp()).collect();
        let p = Exponential { t, y };
        let out = levenberg_marquardt(&p, &[1.0, 0.2], &LmSettings::default()).unwrap();
        assert!((out.params[0] - 2.5).abs() < 1e-9);
        assert!((out.params[1] - 0.7).abs() < 1e-9);
    }

    #[test]
    fn exact_start_converges_immediately() {
        let out = levenberg_marquardt(&Rosenbrock, &[1.0, 1.0], &LmSettings::default()).unwrap();
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let settings = LmSettings {
            max_iterations: 2,
            ..LmSettings::default()
        };
        let err = levenberg_marquardt(&Rosenbrock, &[-1.2, 1.0], &settings).unwrap_err();
        assert_eq!(err, Error::NonConvergence { iterations: 2 });
    }
}

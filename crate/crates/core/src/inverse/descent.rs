//! Gradient descent with Armijo backtracking over the free nodes.

use super::constraints::{apply_constraints, extract_free, initial_guess};
use super::snorm::s_norm_sq;
use super::{InverseProblem, PairField};
use crate::error::{Error, Result};

const ARMIJO_C: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const STEP_GROWTH: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientTolerance,
    MaxIterations,
}

impl StopReason {
    pub fn tag(&self) -> &'static str {
        match self {
            StopReason::GradientTolerance => "grad_tol",
            StopReason::MaxIterations => "max_iters",
        }
    }
}

/// One row of the iteration log; `step` is the accepted step that produced
/// this iterate (0 for the starting point).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub value: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct InversionState {
    pub pair: PairField,
    pub free: Vec<f64>,
    pub value: f64,
    /// Max-norm of the free-node gradient at `pair`, scaled per
    /// [`GradientNorm`](super::GradientNorm).
    pub grad_norm: f64,
    pub iter: usize,
    pub history: Vec<IterationRecord>,
    pub stop: StopReason,
}

impl InversionState {
    pub fn converged(&self) -> bool {
        self.stop == StopReason::GradientTolerance
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Descent from the interpolated initial guess projected onto the constraints.
pub fn minimize(problem: &InverseProblem) -> Result<InversionState> {
    let guess = initial_guess(&problem.data)?;
    minimize_from(problem, extract_free(problem.layout(), &guess))
}

pub fn minimize_from(problem: &InverseProblem, start: Vec<f64>) -> Result<InversionState> {
    let cfg = problem.config;
    let scale = problem.gradient_norm_scale();
    let mut x = start;
    let (pair, eval) = problem.evaluate_free(&x)?;
    let mut value = eval.value;
    let mut grad = problem.gradient_free(&pair, eval);
    let mut grad_norm = scale * max_norm(&grad);
    let mut history = vec![IterationRecord {
        iter: 0,
        value,
        grad_norm,
        step: 0.0,
    }];
    let mut step = cfg.rho_init;
    let mut iter = 0;
    let mut warned = false;
    let stop = loop {
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Stagnation {
                iteration: iter,
                value,
                grad_norm,
                step,
            });
        }
        if grad_norm < cfg.grad_tol {
            break StopReason::GradientTolerance;
        }
        if iter >= cfg.max_iters {
            break StopReason::MaxIterations;
        }
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        let x_scale = max_norm(&x).max(1.0);
        let mut trial = step;
        let nodal_norm = max_norm(&grad);
        let (next, pair, eval) = loop {
            let cand: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a - trial * g).collect();
            let (pair, eval) = problem.evaluate_free(&cand)?;
            let v = eval.value;
            if v.is_finite() && v <= value - ARMIJO_C * trial * g2 && v < value {
                break (cand, pair, eval);
            }
            trial *= BACKTRACK;
            if trial * nodal_norm <= f64::EPSILON * x_scale {
                return Err(Error::Stagnation {
                    iteration: iter,
                    value,
                    grad_norm,
                    step: trial,
                });
            }
        };
        iter += 1;
        x = next;
        value = eval.value;
        grad = problem.gradient_free(&pair, eval);
        grad_norm = scale * max_norm(&grad);
        history.push(IterationRecord {
            iter,
            value,
            grad_norm,
            step: trial,
        });
        step = trial * STEP_GROWTH;
        if iter % 500 == 0 {
            log::debug!("iter {iter}: J = {value:.6e}, |grad| = {grad_norm:.3e}, step = {trial:.3e}");
        }
        if let (Some(radius), false) = (cfg.s_norm_radius, warned) {
            let pair = apply_constraints(problem.layout(), &x, &problem.data)?;
            let s = s_norm_sq(&problem.grid, &pair).sqrt();
            if s > radius {
                log::warn!("iterate {iter} has S-norm {s:.4e} beyond the radius {radius:.4e}");
                warned = true;
            }
        }
    };
    let pair = apply_constraints(problem.layout(), &x, &problem.data)?;
    Ok(InversionState {
        pair,
        free: x,
        value,
        grad_norm,
        iter,
        history,
        stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundaryDataSet;
    use crate::field::SpatialField;
    use crate::geometry::{Geometry, GridSet};
    use crate::inverse::{GradientNorm, InversionConfig};
    use crate::kernel::KernelModel;

    fn problem(config: InversionConfig) -> InverseProblem {
        let grid = GridSet::uniform_omega(Geometry::default(), 0.125).unwrap();
        let data = BoundaryDataSet::from_exact(&grid, |x, z, a| {
            [2.0 - 0.5 * z + 0.3 * x * a, 0.3 * x + 0.1, -0.5, 0.0]
        });
        let mu_s = SpatialField::from_fn(&grid, |_, _| 5.0);
        InverseProblem::new(data, mu_s, KernelModel::new(0.5, 0.5).unwrap(), config).unwrap()
    }

    #[test]
    fn history_is_monotone_and_iterates_keep_constraints() {
        let prob = problem(InversionConfig {
            max_iters: 300,
            ..InversionConfig::default()
        });
        let state = minimize(&prob).unwrap();
        assert_eq!(state.history.len(), state.iter + 1);
        for w in state.history.windows(2) {
            assert!(w[1].value <= w[0].value);
            assert!(w[1].step > 0.0);
        }
        assert!(state.value < state.history[0].value);
        let layout = prob.layout();
        let rebuilt = apply_constraints(layout, &extract_free(layout, &state.pair), &prob.data).unwrap();
        assert_eq!(rebuilt, state.pair);
        assert_eq!(state.value, prob.functional_value(&state.pair));
    }

    #[test]
    fn reruns_are_bit_identical() {
        let cfg = InversionConfig {
            max_iters: 100,
            ..InversionConfig::default()
        };
        let (a, b) = (minimize(&problem(cfg)).unwrap(), minimize(&problem(cfg)).unwrap());
        assert_eq!(a.history, b.history);
        assert_eq!(a.pair, b.pair);
    }

    #[test]
    fn stops_on_gradient_tolerance_or_iteration_cap() {
        let loose = problem(InversionConfig {
            grad_tol: 1e12,
            ..InversionConfig::default()
        });
        let s = minimize(&loose).unwrap();
        assert_eq!((s.iter, s.stop), (0, StopReason::GradientTolerance));
        assert!(s.converged());
        let capped = problem(InversionConfig {
            grad_tol: 1e-300,
            max_iters: 7,
            grad_norm: GradientNorm::Nodal,
            ..InversionConfig::default()
        });
        let s = minimize(&capped).unwrap();
        assert_eq!((s.iter, s.stop), (7, StopReason::MaxIterations));
        assert!(!s.converged());
    }

    #[test]
    fn gradient_norm_scale_follows_the_chosen_norm() {
        let nodal = problem(InversionConfig {
            grad_norm: GradientNorm::Nodal,
            ..InversionConfig::default()
        });
        assert_eq!(nodal.gradient_norm_scale(), 1.0);
        let density = nodal.with_config(InversionConfig::default()).unwrap();
        assert!((density.gradient_norm_scale() - 512.0).abs() < 1e-9);
    }
}

use log::debug;

use super::{scatter_apply_with, ForwardProblem, ForwardSolution, ForwardSolver};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 200;

/// Neumann-series iteration `u ← u₀ + K u` starting from `u = u₀`.
///
/// The scattering operator is of Volterra type in z (every ray sample lies
/// below its endpoint), so the series converges for any medium; its terms
/// may grow for a few iterations before they decay factorially.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointSolver {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for FixedPointSolver {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

impl ForwardSolver for FixedPointSolver {
    fn name(&self) -> &'static str {
        "fixed_point"
    }

    fn solve(&self, problem: &ForwardProblem) -> Result<ForwardSolution> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tol)));
        }
        let (gw, _) = problem.kernel.weighted_matrices(&problem.grid.alpha);
        let u0 = problem.ballistic_field();
        let mut u = u0.clone();
        let mut updates = Vec::new();
        for iter in 1..=self.max_iters {
            let mut next = scatter_apply_with(problem, &u, &gw);
            next.values.iter_mut().zip(&u0.values).for_each(|(v, b)| *v += b);
            let update = next.max_abs_diff(&u);
            u = next;
            updates.push(update);
            debug!("fixed point iteration {iter}: update {update:.3e}");
            if !update.is_finite() {
                break;
            }
            if update < self.tol {
                return Ok(ForwardSolution {
                    u,
                    u0,
                    iterations: iter,
                    updates,
                });
            }
        }
        Err(Error::IterationLimit {
            iterations: updates.len(),
            residual: updates.last().copied().unwrap_or(f64::NAN),
        })
    }
}

/// Fixed-point solve with the given tolerance and the default iteration cap.
pub fn solve_forward(problem: &ForwardProblem, tol: f64) -> Result<ForwardSolution> {
    FixedPointSolver {
        tol,
        max_iters: DEFAULT_MAX_ITERS,
    }
    .solve(problem)
}

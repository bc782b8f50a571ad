use nalgebra::{DMatrix, DVector};

use super::{ForwardProblem, ForwardSolution, ForwardSolver};
use crate::error::{Error, Result};
use crate::field::RadianceField;

pub const DEFAULT_UNKNOWN_CAP: usize = 10_000;

/// Dense collocation solve of `(I − K) u = u₀` by LU factorisation.
/// Only meant for small grids.
#[derive(Debug, Clone, Copy)]
pub struct DirectSolver {
    pub unknown_cap: usize,
}

impl Default for DirectSolver {
    fn default() -> Self {
        Self {
            unknown_cap: DEFAULT_UNKNOWN_CAP,
        }
    }
}

/// The matrix `I − K`, assembled row by row from the ray samples.
pub fn assemble_system(problem: &ForwardProblem) -> DMatrix<f64> {
    let grid = &problem.grid;
    let n = grid.len();
    let na = grid.na();
    let (gw, _) = problem.kernel.weighted_matrices(&grid.alpha);
    let mut a = DMatrix::<f64>::identity(n, n);
    for i in 0..grid.nx() {
        for j in 0..grid.nz() {
            for k in 0..na {
                let row = grid.index(i, j, k);
                let ray = problem.ray(i, j, k);
                for (st, coef) in &ray.terms {
                    for (ci, cj, w) in st.corners() {
                        if w == 0.0 {
                            continue;
                        }
                        for l in 0..na {
                            a[(row, grid.index(ci, cj, l))] -= coef * w * gw[k * na + l];
                        }
                    }
                }
            }
        }
    }
    a
}

impl ForwardSolver for DirectSolver {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn solve(&self, problem: &ForwardProblem) -> Result<ForwardSolution> {
        let n = problem.grid.len();
        if n > self.unknown_cap {
            return Err(Error::TooManyUnknowns {
                unknowns: n,
                cap: self.unknown_cap,
            });
        }
        let u0 = problem.ballistic_field();
        let a = assemble_system(problem);
        let rhs = DVector::from_column_slice(&u0.values);
        let lu = a.clone().lu();
        let sol = lu.solve(&rhs).ok_or(Error::SingularMatrix)?;
        if sol.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix);
        }
        let u = RadianceField::from_values(&problem.grid, sol.iter().copied().collect())?;
        Ok(ForwardSolution {
            u,
            u0,
            iterations: 1,
            updates: Vec::new(),
        })
    }
}

/// Direct solve with the default unknown cap.
pub fn solve_forward_direct(problem: &ForwardProblem) -> Result<ForwardSolution> {
    DirectSolver::default().solve(problem)
}

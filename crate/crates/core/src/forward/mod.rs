//! Forward problem: radiance u(x, α) generated by the source at x_α.
//!
//! The radiance solves the integral equation
//!
//! ```text
//! u(x, α) = u₀(x, α) + (1/c(x, α)) ∫_{L(x, x_α)} c(y, α) μ_s(y) ∫ G(α, β) u(y, β) dβ ds
//! ```
//!
//! where `c(x, α) = exp(∫_{L(x, x_α)} a ds)` and u₀ is the attenuated source
//! mass along the ray. Rays are sampled with the trapezoid rule and fields
//! are interpolated bilinearly between nodes. Two interchangeable solvers of
//! the discrete system live behind [`ForwardSolver`].

mod direct;
mod fixed_point;
mod source;

use std::collections::BTreeMap;

use rayon::prelude::*;

pub use direct::{assemble_system, solve_forward_direct, DirectSolver, DEFAULT_UNKNOWN_CAP};
pub use fixed_point::{solve_forward, FixedPointSolver, DEFAULT_MAX_ITERS, DEFAULT_TOL};
pub use source::SourceModel;

use crate::error::{Error, Result};
use crate::field::{RadianceField, SpatialField};
use crate::geometry::{ray_sample_count, Bilinear, GridSet, Region};
use crate::kernel::{mat_vec, KernelModel};
use crate::phantom::Phantom;

/// Everything that defines one forward solve.
#[derive(Debug, Clone)]
pub struct ForwardProblem {
    pub grid: GridSet,
    pub phantom: Phantom,
    pub source: SourceModel,
    pub kernel: KernelModel,
}

impl ForwardProblem {
    pub fn new(grid: GridSet, phantom: Phantom, source: SourceModel, kernel: KernelModel) -> Result<Self> {
        if grid.region != Region::Strip {
            return Err(Error::GridMismatch("forward problems live on the strip P".into()));
        }
        if phantom.attenuation.values.len() != grid.spatial_len() {
            return Err(Error::LengthMismatch {
                expected: grid.spatial_len(),
                actual: phantom.attenuation.values.len(),
            });
        }
        Ok(Self {
            grid,
            phantom,
            source,
            kernel,
        })
    }

    /// Spacing bound for ray samples.
    pub fn ray_spacing(&self) -> f64 {
        0.5 * self.grid.x1.step.min(self.grid.z.step)
    }

    /// Discretised ray from x_α to the node (i, j).
    pub fn ray(&self, i: usize, j: usize, k: usize) -> Ray {
        let (x1, z) = self.grid.point(i, j);
        trace_ray(
            &self.grid,
            &self.phantom.attenuation,
            Some(&self.phantom.mu_s),
            x1,
            z,
            self.grid.alpha.node(k),
            self.ray_spacing(),
        )
    }

    /// The ballistic field u₀ on every node.
    pub fn ballistic_field(&self) -> RadianceField {
        let grid = &self.grid;
        let mut u0 = RadianceField::zeros(grid);
        u0.values
            .par_chunks_mut(grid.na())
            .enumerate()
            .for_each(|(n, slice)| {
                let (i, j) = (n / grid.nz(), n % grid.nz());
                for (k, out) in slice.iter_mut().enumerate() {
                    let ray = self.ray(i, j, k);
                    *out = if ray.length > 0.0 {
                        self.source.radial_integral(ray.length) * (-ray.optical_depth).exp()
                    } else {
                        0.0
                    };
                }
            });
        u0
    }
}

/// Scattering-source samples along one ray.
#[derive(Debug, Clone)]
pub struct Ray {
    pub length: f64,
    /// ∫_L a ds along the whole ray.
    pub optical_depth: f64,
    /// `(stencil, w_m·exp(τ_m − τ_end)·μ_s(x_m))` for samples with μ_s > 0.
    pub terms: Vec<(Bilinear, f64)>,
}

/// Trapezoid sampling of the segment from (α, 0) to (x₁, z) with cumulative
/// optical depth. With `mu_s` the scattering weights are collected too.
pub fn trace_ray(
    grid: &GridSet,
    attenuation: &SpatialField,
    mu_s: Option<&SpatialField>,
    x1: f64,
    z: f64,
    alpha: f64,
    max_spacing: f64,
) -> Ray {
    let length = (x1 - alpha).hypot(z);
    if length < 1e-14 {
        return Ray {
            length: 0.0,
            optical_depth: 0.0,
            terms: Vec::new(),
        };
    }
    let n = ray_sample_count(length, max_spacing);
    let ds = length / (n - 1) as f64;
    // a and μ_s vanish below one cell under Ω; skip that stretch.
    let z_floor = grid.z.node(grid.omega_j.0) - grid.z.step;
    let first = if z_floor <= 0.0 {
        0
    } else {
        let t = z_floor / z;
        ((t * (n - 1) as f64).floor() as usize).min(n - 1)
    };
    let mut tau = 0.0;
    let mut prev_a = 0.0;
    let mut samples: Vec<(Bilinear, f64, f64, f64)> = Vec::with_capacity(n - first);
    for m in first..n {
        let t = m as f64 / (n - 1) as f64;
        let (px, pz) = (alpha + t * (x1 - alpha), t * z);
        let st = grid.bilinear(px, pz);
        let a = st.eval(grid, &attenuation.values);
        if m > first {
            tau += 0.5 * ds * (prev_a + a);
        }
        prev_a = a;
        if let Some(mu) = mu_s {
            let s = st.eval(grid, &mu.values);
            if s > 0.0 {
                let w = if m == 0 || m == n - 1 { 0.5 * ds } else { ds };
                samples.push((st, tau, w, s));
            }
        }
    }
    let terms = samples
        .into_iter()
        .map(|(st, tau_m, w, s)| (st, w * (tau_m - tau).exp() * s))
        .collect();
    Ray {
        length,
        optical_depth: tau,
        terms,
    }
}

/// c(x, α) = exp(∫_{L(x, x_α)} a ds) by trapezoid sampling.
pub fn attenuation_integral(grid: &GridSet, attenuation: &SpatialField, x1: f64, z: f64, alpha: f64) -> f64 {
    let spacing = 0.5 * grid.x1.step.min(grid.z.step);
    trace_ray(grid, attenuation, None, x1, z, alpha, spacing).optical_depth.exp()
}

/// u₀(x, α) = (1/c(x, α)) ∫_L f(x(s) − x_α) ds.
pub fn ballistic_term(
    grid: &GridSet,
    attenuation: &SpatialField,
    source: &SourceModel,
    x1: f64,
    z: f64,
    alpha: f64,
) -> f64 {
    let r = (x1 - alpha).hypot(z);
    source.radial_integral(r) / attenuation_integral(grid, attenuation, x1, z, alpha)
}

/// β-integrals `S(y, α) = ∫ G(α, β) u(y, β) dβ` at every node.
fn kernel_moments(problem: &ForwardProblem, u: &RadianceField, gw: &[f64]) -> Vec<f64> {
    let na = problem.grid.na();
    let mut s = vec![0.0; u.values.len()];
    s.par_chunks_mut(na)
        .zip(u.values.par_chunks(na))
        .for_each(|(out, slice)| mat_vec(gw, slice, out));
    s
}

/// The scattering operator K: u ↦ (1/c) ∫_L c μ_s ∫ G u dβ ds.
pub fn scatter_apply(problem: &ForwardProblem, u: &RadianceField) -> RadianceField {
    let (gw, _) = problem.kernel.weighted_matrices(&problem.grid.alpha);
    scatter_apply_with(problem, u, &gw)
}

fn scatter_apply_with(problem: &ForwardProblem, u: &RadianceField, gw: &[f64]) -> RadianceField {
    let grid = &problem.grid;
    let na = grid.na();
    let moments = kernel_moments(problem, u, gw);
    let mut out = RadianceField::zeros(grid);
    out.values
        .par_chunks_mut(na)
        .enumerate()
        .for_each(|(n, slice)| {
            let (i, j) = (n / grid.nz(), n % grid.nz());
            for (k, o) in slice.iter_mut().enumerate() {
                let ray = problem.ray(i, j, k);
                *o = ray
                    .terms
                    .iter()
                    .map(|(st, coef)| {
                        coef * st
                            .corners()
                            .iter()
                            .map(|&(ci, cj, w)| w * moments[grid.index(ci, cj, k)])
                            .sum::<f64>()
                    })
                    .sum();
            }
        });
    out
}

/// Result of a forward solve.
#[derive(Debug, Clone)]
pub struct ForwardSolution {
    pub u: RadianceField,
    pub u0: RadianceField,
    pub iterations: usize,
    /// Max-norm of successive-iterate differences (empty for direct solves).
    pub updates: Vec<f64>,
}

/// A solver for the discrete forward system.
pub trait ForwardSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, problem: &ForwardProblem) -> Result<ForwardSolution>;
}

/// Forward solvers selectable by name.
pub struct ForwardSolverRegistry {
    solvers: BTreeMap<&'static str, Box<dyn ForwardSolver>>,
}

impl ForwardSolverRegistry {
    pub fn empty() -> Self {
        Self {
            solvers: BTreeMap::new(),
        }
    }

    /// `fixed_point` and `direct`.
    pub fn with_defaults(tol: f64, max_iters: usize, unknown_cap: usize) -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(FixedPointSolver { tol, max_iters }));
        reg.register(Box::new(DirectSolver { unknown_cap }));
        reg
    }

    pub fn register(&mut self, solver: Box<dyn ForwardSolver>) {
        self.solvers.insert(solver.name(), solver);
    }

    pub fn get(&self, name: &str) -> Result<&dyn ForwardSolver> {
        self.solvers
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownName {
                kind: "forward solver",
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.keys().copied().collect()
    }
}

impl Default for ForwardSolverRegistry {
    fn default() -> Self {
        Self::with_defaults(DEFAULT_TOL, DEFAULT_MAX_ITERS, DEFAULT_UNKNOWN_CAP)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Geometry;
    use crate::phantom::make_phantom;

    fn problem(h: f64, letter: Option<&str>) -> ForwardProblem {
        let grid = GridSet::uniform_strip(Geometry::default(), h).unwrap();
        let phantom = match letter {
            Some(l) => make_phantom(l, 5.0, &grid).unwrap(),
            None => Phantom::background(&grid),
        };
        ForwardProblem::new(
            grid,
            phantom,
            SourceModel::new(0.05).unwrap(),
            KernelModel::new(0.5, 0.5).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn attenuation_integral_examples() {
        let p = problem(1.0 / 20.0, None);
        let zero = SpatialField::zeros(&p.grid);
        assert_eq!(attenuation_integral(&p.grid, &zero, 0.3, 1.2, -0.1), 1.0);
        // a = 5 on [1, 1.5] along the vertical ray; the interpolation ramp
        // below z = a adds a half cell, 5·h/2.
        let c = attenuation_integral(&p.grid, &p.phantom.attenuation, 0.0, 1.5, 0.0);
        let h = p.grid.z.step;
        assert!((c.ln() - (2.5 + 2.5 * h)).abs() < 1e-9, "{}", c.ln());
        for &(x, z, a) in &[(0.1, 1.9, -0.4), (-0.5, 2.0, 0.5), (0.2, 0.3, 0.2)] {
            assert!(attenuation_integral(&p.grid, &p.phantom.attenuation, x, z, a) >= 1.0);
        }
    }

    #[test]
    fn attenuation_integral_matches_analytic_on_fine_grid() {
        // With h → 0 the interpolation ramp vanishes and ∫ a ds → 5·0.5.
        let grid = GridSet::uniform_strip(Geometry::default(), 1.0 / 400.0).unwrap();
        let ph = Phantom::background(&grid);
        let c = attenuation_integral(&grid, &ph.attenuation, 0.0, 1.5, 0.0);
        assert!((c - 2.5f64.exp()).abs() / 2.5f64.exp() < 1e-2 && (c.ln() - 2.5).abs() < 1e-2);
    }

    #[test]
    fn ballistic_term_without_attenuation_is_profile_integral() {
        let p = problem(1.0 / 20.0, None);
        let zero = SpatialField::zeros(&p.grid);
        let expected = p.source.profile_integral;
        for &(x, z, a) in &[(0.3, 1.2, -0.1), (0.0, 0.05, 0.0), (-0.4, 0.7, 0.5)] {
            let u0 = ballistic_term(&p.grid, &zero, &p.source, x, z, a);
            assert!((u0 - expected).abs() < 1e-14);
        }
        let u_att = ballistic_term(&p.grid, &p.phantom.attenuation, &p.source, 0.1, 1.8, 0.2);
        assert!(u_att > 0.0 && u_att < expected);
    }

    #[test]
    fn doubling_attenuation_divides_by_extra_factor() {
        let p = problem(1.0 / 20.0, Some("A"));
        let mut doubled = p.phantom.attenuation.clone();
        doubled.values.iter_mut().for_each(|v| *v *= 2.0);
        let (x, z, a) = (0.15, 1.85, -0.3);
        let c1 = attenuation_integral(&p.grid, &p.phantom.attenuation, x, z, a);
        let u1 = ballistic_term(&p.grid, &p.phantom.attenuation, &p.source, x, z, a);
        let u2 = ballistic_term(&p.grid, &doubled, &p.source, x, z, a);
        assert!((u2 - u1 / c1).abs() < 1e-12 * u1);
    }

    #[test]
    fn scatter_vanishes_without_scattering_and_is_linear() {
        let p = problem(1.0 / 8.0, Some("A"));
        let u1 = RadianceField::from_fn(&p.grid, |i, j, k| 1.0 + (i * 7 + j * 3 + k) as f64 % 5.0);
        let u2 = RadianceField::from_fn(&p.grid, |i, j, k| ((i + 2 * j + 3 * k) as f64).sin());
        let sum = RadianceField {
            values: u1.values.iter().zip(&u2.values).map(|(a, b)| a + b).collect(),
            ..u1.clone()
        };
        let k1 = scatter_apply(&p, &u1);
        let k2 = scatter_apply(&p, &u2);
        let ks = scatter_apply(&p, &sum);
        for n in 0..ks.values.len() {
            assert!((ks.values[n] - k1.values[n] - k2.values[n]).abs() < 1e-10);
        }
        let none = ForwardProblem {
            phantom: p.phantom.clone().without_scattering(),
            ..p.clone()
        };
        assert!(scatter_apply(&none, &u1).values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn registry_lookup() {
        let reg = ForwardSolverRegistry::default();
        assert_eq!(reg.names(), vec!["direct", "fixed_point"]);
        assert!(reg.get("fixed_point").is_ok());
        assert!(matches!(reg.get("monte_carlo"), Err(Error::UnknownName { .. })));
    }
}

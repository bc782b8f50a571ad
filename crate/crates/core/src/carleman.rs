//! Numerical probes of the Carleman estimate and of the strict convexity of
//! the weighted functional.
//!
//! The Carleman check compares, for random test functions u vanishing on
//! ∂Ω∖∂₂Ω,
//!
//! ```text
//! lhs      = ∫_Ω (Δu)² e^{2λz²} dx
//! interior = ∫_Ω (λ|∇u|² + λ³u²) e^{2λz²} dx
//! boundary = λ³ (‖u‖²_{H¹(∂₂Ω)} + ‖∂_z u‖²_{L₂(∂₂Ω)}) e^{2λb²}
//! ```
//!
//! and reports `lhs / (interior − boundary)` over samples with a positive
//! denominator.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::boundary::BoundaryDataSet;
use crate::error::{Error, Result};
use crate::field::SpatialField;
use crate::geometry::{carleman_weight, derivative_1d, GridSet};
use crate::inverse::{apply_constraints, extract_free, initial_guess, s_norm_sq, InverseProblem, PairField};
use crate::rng::{stream_rng, Stream};

/// A random function on Ω vanishing on ∂₁Ω and ∂₃Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionSample {
    pub u: SpatialField,
    pub seed: u64,
    pub index: usize,
    pub smoothness: usize,
}

/// One pass of 5-point averaging over the neighbours present on the grid.
pub fn smooth_once(values: &mut [f64], nx: usize, nz: usize) {
    let src = values.to_vec();
    for i in 0..nx {
        for j in 0..nz {
            let mut sum = src[i * nz + j];
            let mut n = 1.0;
            if i > 0 {
                sum += src[(i - 1) * nz + j];
                n += 1.0;
            }
            if i + 1 < nx {
                sum += src[(i + 1) * nz + j];
                n += 1.0;
            }
            if j > 0 {
                sum += src[i * nz + j - 1];
                n += 1.0;
            }
            if j + 1 < nz {
                sum += src[i * nz + j + 1];
                n += 1.0;
            }
            values[i * nz + j] = sum / n;
        }
    }
}

/// Zero on the bottom face and on both lateral faces.
pub fn mask_test_function(values: &mut [f64], nx: usize, nz: usize) {
    for i in 0..nx {
        for j in 0..nz {
            if j == 0 || i == 0 || i + 1 == nx {
                values[i * nz + j] = 0.0;
            }
        }
    }
}

/// The `index`-th sample of the seeded family: white noise in [−1, 1],
/// `passes` smoothing passes, then the zero mask.
pub fn sample_test_function(grid: &GridSet, seed: u64, index: usize, passes: usize) -> TestFunctionSample {
    let (nx, nz) = (grid.nx(), grid.nz());
    let mut rng = stream_rng(seed, Stream::TestFunctions);
    // Two 32-bit words per f64 draw.
    rng.set_word_pos(2 * (index * nx * nz) as u128);
    let mut values: Vec<f64> = (0..nx * nz).map(|_| rng.random_range(-1.0..=1.0)).collect();
    for _ in 0..passes {
        smooth_once(&mut values, nx, nz);
    }
    mask_test_function(&mut values, nx, nz);
    TestFunctionSample {
        u: SpatialField { nx, nz, values },
        seed,
        index,
        smoothness: passes,
    }
}

/// The three Carleman quadratures for one function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlemanSides {
    pub lhs: f64,
    pub interior: f64,
    pub boundary: f64,
}

impl CarlemanSides {
    /// `lhs / (interior − boundary)` when the denominator is positive.
    pub fn ratio(&self) -> Option<f64> {
        let den = self.interior - self.boundary;
        (den > 0.0).then(|| self.lhs / den)
    }
}

/// Second difference with second-order one-sided closures (four-point at the ends).
fn second_difference(values: &[f64], step: f64, out: &mut [f64]) {
    let n = values.len();
    let h2 = step * step;
    if n < 4 {
        out.iter_mut().for_each(|v| *v = 0.0);
        if n == 3 {
            let d = (values[0] - 2.0 * values[1] + values[2]) / h2;
            out.iter_mut().for_each(|v| *v = d);
        }
        return;
    }
    out[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / h2;
    for m in 1..n - 1 {
        out[m] = (values[m + 1] - 2.0 * values[m] + values[m - 1]) / h2;
    }
    out[n - 1] = (2.0 * values[n - 1] - 5.0 * values[n - 2] + 4.0 * values[n - 3] - values[n - 4]) / h2;
}

/// Lhs, interior and boundary terms on a closed Ω-grid.
///
/// Derivatives are second order everywhere (one-sided on ∂Ω) and the
/// integrals use the trapezoid rule over closure(Ω) and ∂₂Ω.
pub fn carleman_sides(u: &SpatialField, grid: &GridSet, lambda: f64) -> Result<CarlemanSides> {
    let (nx, nz) = (grid.nx(), grid.nz());
    if (u.nx, u.nz) != (nx, nz) {
        return Err(Error::GridMismatch("test function does not match the grid".into()));
    }
    if nx < 3 || nz < 3 {
        return Err(Error::GridMismatch("Carleman quadrature needs three nodes per axis".into()));
    }
    let (hx, hz) = (grid.x1.step, grid.z.step);
    let n = nx * nz;
    let (mut ux, mut uz, mut uxx, mut uzz) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut line = vec![0.0; nx.max(nz)];
    let mut d1 = vec![0.0; nx.max(nz)];
    let mut d2 = vec![0.0; nx.max(nz)];
    for j in 0..nz {
        for i in 0..nx {
            line[i] = u.get(i, j);
        }
        derivative_1d(&line[..nx], hx, &mut d1[..nx]);
        second_difference(&line[..nx], hx, &mut d2[..nx]);
        for i in 0..nx {
            ux[i * nz + j] = d1[i];
            uxx[i * nz + j] = d2[i];
        }
    }
    for i in 0..nx {
        line[..nz].copy_from_slice(&u.values[i * nz..(i + 1) * nz]);
        derivative_1d(&line[..nz], hz, &mut d1[..nz]);
        second_difference(&line[..nz], hz, &mut d2[..nz]);
        uz[i * nz..(i + 1) * nz].copy_from_slice(&d1[..nz]);
        uzz[i * nz..(i + 1) * nz].copy_from_slice(&d2[..nz]);
    }
    let wx = grid.x1.trapezoid_weights();
    let wz = grid.z.trapezoid_weights();
    let (l, l3) = (lambda, lambda.powi(3));
    let (mut lhs, mut interior) = (0.0, 0.0);
    for i in 0..nx {
        for j in 0..nz {
            let m = i * nz + j;
            let w = wx[i] * wz[j] * carleman_weight(grid.z.node(j), lambda);
            let lap = uxx[m] + uzz[m];
            lhs += w * lap * lap;
            interior += w * (l * (ux[m] * ux[m] + uz[m] * uz[m]) + l3 * u.values[m] * u.values[m]);
        }
    }
    let top = nz - 1;
    let mut trace = 0.0;
    for i in 0..nx {
        let m = i * nz + top;
        trace += wx[i] * (u.values[m] * u.values[m] + ux[m] * ux[m] + uz[m] * uz[m]);
    }
    let boundary = l3 * trace * carleman_weight(grid.z.end(), lambda);
    Ok(CarlemanSides { lhs, interior, boundary })
}

/// Per-λ summary of a Carleman sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlemanRow {
    pub lambda: f64,
    /// Minimum ratio over the included samples.
    pub min_ratio: f64,
    /// Minimum of lhs/interior over all samples (no boundary term).
    pub min_interior_ratio: f64,
    pub included: usize,
    pub excluded: usize,
}

/// One sample evaluated at one λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlemanSample {
    pub index: usize,
    pub lambda: f64,
    pub sides: CarlemanSides,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanReport {
    pub rows: Vec<CarlemanRow>,
    pub samples: Vec<CarlemanSample>,
}

/// Sweep `count` seeded samples over ascending `lambdas` (all ≥ 1).
///
/// Fails with [`Error::DegenerateSamples`] if at some λ no sample has a
/// positive denominator.
pub fn empirical_carleman_constant(
    grid: &GridSet,
    count: usize,
    lambdas: &[f64],
    seed: u64,
    passes: usize,
) -> Result<CarlemanReport> {
    let report = carleman_sweep(grid, count, lambdas, seed, passes)?;
    if let Some(row) = report.rows.iter().find(|r| r.included == 0) {
        log::warn!("every sample has a nonpositive Carleman denominator at lambda = {}", row.lambda);
        return Err(Error::DegenerateSamples { lambda: row.lambda });
    }
    Ok(report)
}

impl CarlemanReport {
    /// First λ at which no sample has a positive denominator.
    pub fn degenerate_lambda(&self) -> Option<f64> {
        self.rows.iter().find(|r| r.included == 0).map(|r| r.lambda)
    }
}

/// The sweep behind [`empirical_carleman_constant`], degenerate rows included.
pub fn carleman_sweep(
    grid: &GridSet,
    count: usize,
    lambdas: &[f64],
    seed: u64,
    passes: usize,
) -> Result<CarlemanReport> {
    if lambdas.windows(2).any(|w| w[1] < w[0]) || lambdas.iter().any(|&l| !(l >= 1.0)) {
        return Err(Error::InvalidParameter("lambda list must be ascending with every value >= 1".into()));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("need at least one test function".into()));
    }
    let funcs: Vec<TestFunctionSample> = (0..count).map(|m| sample_test_function(grid, seed, m, passes)).collect();
    let mut rows = Vec::new();
    let mut samples = Vec::new();
    for &lambda in lambdas {
        let mut row = CarlemanRow {
            lambda,
            min_ratio: f64::INFINITY,
            min_interior_ratio: f64::INFINITY,
            included: 0,
            excluded: 0,
        };
        let all: Vec<CarlemanSides> = funcs
            .par_iter()
            .map(|f| carleman_sides(&f.u, grid, lambda))
            .collect::<Result<_>>()?;
        for (f, sides) in funcs.iter().zip(all) {
            if sides.interior > 0.0 {
                row.min_interior_ratio = row.min_interior_ratio.min(sides.lhs / sides.interior);
            }
            match sides.ratio() {
                Some(r) => {
                    row.included += 1;
                    row.min_ratio = row.min_ratio.min(r);
                }
                None => row.excluded += 1,
            }
            samples.push(CarlemanSample {
                index: f.index,
                lambda,
                sides,
            });
        }
        rows.push(row);
    }
    Ok(CarlemanReport { rows, samples })
}

/// `(gap, lower_bound)` with gap = J(v₂) − J(v₁) − ⟨∇J(v₁), v₂ − v₁⟩ and
/// lower_bound = γ‖v₂ − v₁‖²_S.
pub fn convexity_gap(problem: &InverseProblem, v1: &PairField, v2: &PairField) -> Result<(f64, f64)> {
    check_same_constraints(problem, v1, v2)?;
    let (j1, g1) = problem.nodal_gradient(v1);
    let j2 = problem.functional_value(v2);
    let diff = v2.sub(v1);
    let gap = j2 - j1 - g1.dot(&diff);
    Ok((gap, problem.config.gamma * s_norm_sq(&problem.grid, &diff)))
}

fn check_same_constraints(problem: &InverseProblem, v1: &PairField, v2: &PairField) -> Result<()> {
    if !v1.matches(&problem.grid) || !v2.matches(&problem.grid) {
        return Err(Error::GridMismatch("pair does not live on the inversion grid".into()));
    }
    let layout = problem.layout();
    for v in [v1, v2] {
        let rebuilt = apply_constraints(layout, &extract_free(layout, v), &problem.data)?;
        let off = rebuilt.sub(v).max_abs();
        if off > 1e-12 * v.max_abs().max(1.0) {
            return Err(Error::BoundaryMismatch(format!(
                "pair violates the boundary constraints by {off:.3e}"
            )));
        }
    }
    Ok(())
}

/// Boundary data that are identically zero on `grid`.
pub fn zero_data(grid: &GridSet) -> BoundaryDataSet {
    BoundaryDataSet::from_exact(grid, |_, _, _| [0.0; 4])
}

/// A smooth random free-node direction whose constrained embedding has
/// S-norm `radius`.
pub fn random_direction(problem: &InverseProblem, rng: &mut ChaCha8Rng, passes: usize, radius: f64) -> Result<Vec<f64>> {
    let grid = &problem.grid;
    let (nx, nz, na) = (grid.nx(), grid.nz(), grid.na());
    let mut pair = PairField::zeros(grid);
    for field in [&mut pair.p, &mut pair.q] {
        for k in 0..na {
            let mut slice: Vec<f64> = (0..nx * nz).map(|_| rng.random_range(-1.0..=1.0)).collect();
            for _ in 0..passes {
                smooth_once(&mut slice, nx, nz);
            }
            for m in 0..nx * nz {
                field.values[m * na + k] = slice[m];
            }
        }
    }
    let layout = problem.layout();
    let dir = extract_free(layout, &pair);
    let zero = zero_data(grid);
    let norm = s_norm_sq(grid, &apply_constraints(layout, &dir, &zero)?).sqrt();
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter("degenerate random direction".into()));
    }
    Ok(dir.iter().map(|d| d * radius / norm).collect())
}

/// Summary of a convexity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    /// `(gap, lower_bound)` per sampled pair.
    pub gaps: Vec<(f64, f64)>,
    pub violations: usize,
    /// max ‖∇J(v₁) − ∇J(v₂)‖ / ‖v₁ − v₂‖ over the sampled pairs (free nodes, Euclidean).
    pub lipschitz: f64,
}

/// `count` pairs v₁, v₂ drawn independently in the S-ball of `radius` about
/// the projected initial guess, both satisfying the boundary constraints.
pub fn convexity_sweep(problem: &InverseProblem, count: usize, radius: f64, seed: u64, passes: usize) -> Result<ConvexityReport> {
    let layout = problem.layout();
    let centre = extract_free(layout, &initial_guess(&problem.data)?);
    let mut rng = stream_rng(seed, Stream::ConvexitySampling);
    let mut gaps = Vec::with_capacity(count);
    let mut violations = 0;
    let mut lipschitz: f64 = 0.0;
    for _ in 0..count {
        let draw = |rng: &mut ChaCha8Rng| -> Result<Vec<f64>> {
            let r = radius * rng.random::<f64>();
            let d = random_direction(problem, rng, passes, r)?;
            Ok(centre.iter().zip(&d).map(|(c, d)| c + d).collect())
        };
        let x1 = draw(&mut rng)?;
        let x2 = draw(&mut rng)?;
        let v1 = apply_constraints(layout, &x1, &problem.data)?;
        let v2 = apply_constraints(layout, &x2, &problem.data)?;
        let (gap, bound) = convexity_gap(problem, &v1, &v2)?;
        if gap < bound {
            violations += 1;
        }
        gaps.push((gap, bound));
        let (_, g1) = problem.value_and_gradient_free(&x1)?;
        let (_, g2) = problem.value_and_gradient_free(&x2)?;
        let dg: f64 = g1.iter().zip(&g2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let dx: f64 = x1.iter().zip(&x2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if dx > 0.0 {
            lipschitz = lipschitz.max(dg / dx);
        }
    }
    Ok(ConvexityReport {
        gaps,
        violations,
        lipschitz,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::geometry::Geometry;
    use crate::inverse::InversionConfig;
    use crate::kernel::KernelModel;

    fn omega(h: f64) -> GridSet {
        GridSet::uniform_omega(Geometry::default(), h).unwrap()
    }

    fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for m in 1..n {
            s += f(a + m as f64 * h) * if m % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn zero_function_and_quadratic_scaling() {
        let grid = omega(0.05);
        let zero = SpatialField::zeros(&grid);
        let s = carleman_sides(&zero, &grid, 5.0).unwrap();
        assert_eq!((s.lhs, s.interior, s.boundary), (0.0, 0.0, 0.0));
        assert_eq!(s.ratio(), None);
        let u = sample_test_function(&grid, 9, 0, 5).u;
        let t = -2.5;
        let scaled = SpatialField {
            values: u.values.iter().map(|v| t * v).collect(),
            ..u.clone()
        };
        let (a, b) = (carleman_sides(&u, &grid, 5.0).unwrap(), carleman_sides(&scaled, &grid, 5.0).unwrap());
        for (x, y) in [(a.lhs, b.lhs), (a.interior, b.interior), (a.boundary, b.boundary)] {
            assert!((y - t * t * x).abs() <= 1e-12 * y.abs());
        }
    }

    #[test]
    fn refined_grid_matches_analytic_quadrature() {
        let (bw, za, zb, lambda) = (0.5, 1.0, 2.0, 5.0);
        let grid = omega(1.0 / 320.0);
        let s = |x: f64| (PI * (x + bw) / (2.0 * bw)).sin();
        let c = |x: f64| (PI * (x + bw) / (2.0 * bw)).cos();
        let k = PI / (2.0 * bw);
        let u = SpatialField::from_fn(&grid, |i, j| {
            let (x, z) = grid.point(i, j);
            s(x) * (z - za).powi(2)
        });
        let got = carleman_sides(&u, &grid, lambda).unwrap();
        let w = |z: f64| (2.0 * lambda * z * z).exp();
        let n = 2000;
        let lhs = simpson(-bw, bw, n, |x| {
            simpson(za, zb, n, |z| {
                let lap = s(x) * (2.0 - k * k * (z - za).powi(2));
                lap * lap * w(z)
            })
        });
        let interior = simpson(-bw, bw, n, |x| {
            simpson(za, zb, n, |z| {
                let ux = k * c(x) * (z - za).powi(2);
                let uz = 2.0 * s(x) * (z - za);
                let v = s(x) * (z - za).powi(2);
                (lambda * (ux * ux + uz * uz) + lambda.powi(3) * v * v) * w(z)
            })
        });
        let d = zb - za;
        let boundary = lambda.powi(3)
            * w(zb)
            * simpson(-bw, bw, n, |x| {
                let (v, ux, uz) = (s(x) * d * d, k * c(x) * d * d, 2.0 * s(x) * d);
                v * v + ux * ux + uz * uz
            });
        for (name, g, e) in [("lhs", got.lhs, lhs), ("interior", got.interior, interior), ("boundary", got.boundary, boundary)] {
            assert!((g - e).abs() <= 0.01 * e.abs(), "{name}: {g} vs {e}");
        }
    }

    #[test]
    fn samples_vanish_off_the_top_face_and_are_reproducible() {
        let grid = omega(0.05);
        let (nx, nz) = (grid.nx(), grid.nz());
        for index in 0..5 {
            let a = sample_test_function(&grid, 3, index, 5);
            let b = sample_test_function(&grid, 3, index, 5);
            assert_eq!(a, b);
            for i in 0..nx {
                for j in 0..nz {
                    if j == 0 || i == 0 || i + 1 == nx {
                        assert_eq!(a.u.get(i, j), 0.0);
                    }
                }
            }
            assert!(a.u.values.iter().any(|&v| v != 0.0));
        }
        assert_ne!(sample_test_function(&grid, 3, 0, 5), sample_test_function(&grid, 3, 1, 5));
        assert_ne!(sample_test_function(&grid, 3, 0, 5).u, sample_test_function(&grid, 4, 0, 5).u);
    }

    #[test]
    fn sweep_is_deterministic_and_counts_exclusions() {
        let grid = omega(0.1);
        let a = carleman_sweep(&grid, 6, &[2.0, 5.0], 21, 5).unwrap();
        let b = carleman_sweep(&grid, 6, &[2.0, 5.0], 21, 5).unwrap();
        assert_eq!(a, b);
        for row in &a.rows {
            assert_eq!(row.included + row.excluded, 6);
        }
        assert_eq!(a.samples.len(), 12);
        assert!(carleman_sweep(&grid, 6, &[5.0, 2.0], 21, 5).is_err());
        assert!(carleman_sweep(&grid, 6, &[0.5], 21, 5).is_err());
    }

    #[test]
    fn function_with_large_top_trace_is_excluded() {
        let grid = omega(0.05);
        let u = SpatialField::from_fn(&grid, |i, j| {
            let (x, z) = grid.point(i, j);
            if i == 0 || i + 1 == grid.nx() {
                0.0
            } else {
                (PI * (x + 0.5)).sin() * (z - 1.0).powi(4) * 10.0
            }
        });
        let sides = carleman_sides(&u, &grid, 2.0).unwrap();
        assert!(sides.boundary > sides.interior);
        assert_eq!(sides.ratio(), None);
    }

    #[test]
    fn interior_supported_function_has_positive_ratio() {
        let grid = omega(0.025);
        let u = SpatialField::from_fn(&grid, |i, j| {
            let (x, z) = grid.point(i, j);
            ((PI * (x + 0.5)).sin() * (PI * (z - 1.0)).sin()).powi(2)
        });
        for lambda in [2.0, 5.0, 10.0] {
            let sides = carleman_sides(&u, &grid, lambda).unwrap();
            assert!(sides.ratio().unwrap() > 0.0);
        }
    }

    fn small_problem() -> InverseProblem {
        let grid = omega(0.125);
        let data = BoundaryDataSet::from_exact(&grid, |x, z, a| [1.0 + 0.2 * x * z, 0.1 * a, 0.2 * x, 0.0]);
        let mu_s = SpatialField::from_fn(&grid, |_, _| 5.0);
        InverseProblem::new(data, mu_s, KernelModel::new(0.5, 0.5).unwrap(), InversionConfig::default()).unwrap()
    }

    #[test]
    fn convexity_gap_identities() {
        let prob = small_problem();
        let layout = prob.layout();
        let mut rng = stream_rng(2, Stream::ConvexitySampling);
        let centre = extract_free(layout, &initial_guess(&prob.data).unwrap());
        let draw = |rng: &mut ChaCha8Rng| {
            let d = random_direction(&prob, rng, 3, 2.0).unwrap();
            let x: Vec<f64> = centre.iter().zip(&d).map(|(a, b)| a + b).collect();
            apply_constraints(layout, &x, &prob.data).unwrap()
        };
        let (v1, v2) = (draw(&mut rng), draw(&mut rng));
        assert_eq!(convexity_gap(&prob, &v1, &v1).unwrap(), (0.0, 0.0));
        let (g12, b12) = convexity_gap(&prob, &v1, &v2).unwrap();
        let (g21, _) = convexity_gap(&prob, &v2, &v1).unwrap();
        let (_, d1) = prob.nodal_gradient(&v1);
        let (_, d2) = prob.nodal_gradient(&v2);
        let sym = d2.sub(&d1).dot(&v2.sub(&v1));
        assert!((g12 + g21 - sym).abs() <= 1e-10 * sym.abs().max(1.0));
        assert!(g12 >= b12 && b12 > 0.0);
        let no_reg = prob
            .with_config(InversionConfig {
                gamma: 0.0,
                ..prob.config
            })
            .unwrap();
        assert_eq!(convexity_gap(&no_reg, &v1, &v2).unwrap().1, 0.0);
    }

    #[test]
    fn convexity_gap_rejects_mismatched_constraints() {
        let prob = small_problem();
        let v1 = apply_constraints(prob.layout(), &vec![0.0; prob.layout().len()], &prob.data).unwrap();
        let mut v2 = v1.clone();
        v2.p.values[0] += 1.0;
        assert!(matches!(convexity_gap(&prob, &v1, &v2), Err(Error::BoundaryMismatch(_))));
    }

    #[test]
    fn convexity_sweep_is_deterministic() {
        let prob = small_problem();
        let a = convexity_sweep(&prob, 5, 10.0, 4, 3).unwrap();
        let b = convexity_sweep(&prob, 5, 10.0, 4, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.violations, 0);
        assert!(a.lipschitz.is_finite() && a.lipschitz > 0.0);
    }
}

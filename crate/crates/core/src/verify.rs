//! Property checks run by `verify`, selectable by name.

use std::collections::BTreeMap;

use crate::carleman::{carleman_sweep, convexity_sweep, random_direction, CarlemanReport, ConvexityReport};
use crate::error::{Error, Result};
use crate::geometry::GridSet;
use crate::inverse::{extract_free, initial_guess, InverseProblem};
use crate::rng::{stream_rng, Stream};

/// Inputs shared by all checks.
pub struct VerifyContext {
    /// Inverse problem on the coarse verification grid.
    pub problem: InverseProblem,
    /// Ω-grid of the Carleman sweep.
    pub carleman_grid: GridSet,
    pub seed: u64,
    pub directions: usize,
    pub tau: f64,
    pub rel_tol: f64,
    pub convexity_pairs: usize,
    pub convexity_radius: f64,
    pub carleman_samples: usize,
    pub carleman_lambdas: Vec<f64>,
    pub passes: usize,
}

/// One directional-derivative comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientSample {
    pub finite_difference: f64,
    pub analytic: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckDetail {
    Gradient(Vec<GradientSample>),
    Convexity(ConvexityReport),
    Carleman(CarlemanReport),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Report lines in display order.
    pub summary: Vec<(String, String)>,
    pub detail: CheckDetail,
}

pub trait PropertyCheck: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, ctx: &VerifyContext) -> Result<CheckOutcome>;
}

/// Central differences of J along smooth random directions against ⟨∇J, d⟩.
pub fn gradient_check(problem: &InverseProblem, count: usize, tau: f64, seed: u64, passes: usize) -> Result<Vec<GradientSample>> {
    let layout = problem.layout();
    let guess = extract_free(layout, &initial_guess(&problem.data)?);
    let mut rng = stream_rng(seed, Stream::GradientDirections);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let shift = random_direction(problem, &mut rng, passes, 1.0)?;
        let x: Vec<f64> = guess.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let d = random_direction(problem, &mut rng, passes, 1.0)?;
        let (_, grad) = problem.value_and_gradient_free(&x)?;
        let analytic: f64 = grad.iter().zip(&d).map(|(g, d)| g * d).sum();
        let at = |t: f64| -> Result<f64> {
            let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            problem.value_free(&y)
        };
        let finite_difference = (at(tau)? - at(-tau)?) / (2.0 * tau);
        let rel_error = (finite_difference - analytic).abs() / analytic.abs().max(1.0);
        out.push(GradientSample {
            finite_difference,
            analytic,
            rel_error,
        });
    }
    Ok(out)
}

pub struct GradientCheck;

impl PropertyCheck for GradientCheck {
    fn name(&self) -> &'static str {
        "gradient"
    }

    fn run(&self, ctx: &VerifyContext) -> Result<CheckOutcome> {
        let samples = gradient_check(&ctx.problem, ctx.directions, ctx.tau, ctx.seed, ctx.passes)?;
        let worst = samples.iter().map(|s| s.rel_error).fold(0.0, f64::max);
        let g = &ctx.problem.grid;
        Ok(CheckOutcome {
            name: self.name(),
            passed: worst <= ctx.rel_tol,
            summary: vec![
                ("grid".into(), format!("{}x{}x{}", g.nx(), g.nz(), g.na())),
                ("directions".into(), samples.len().to_string()),
                ("tau".into(), format!("{:e}", ctx.tau)),
                ("max_rel_error".into(), format!("{worst:.3e}")),
                ("tolerance".into(), format!("{:e}", ctx.rel_tol)),
            ],
            detail: CheckDetail::Gradient(samples),
        })
    }
}

pub struct ConvexityCheck;

impl PropertyCheck for ConvexityCheck {
    fn name(&self) -> &'static str {
        "convexity"
    }

    fn run(&self, ctx: &VerifyContext) -> Result<CheckOutcome> {
        let rep = convexity_sweep(&ctx.problem, ctx.convexity_pairs, ctx.convexity_radius, ctx.seed, ctx.passes)?;
        let min_gap = rep.gaps.iter().map(|g| g.0).fold(f64::INFINITY, f64::min);
        let min_margin = rep.gaps.iter().map(|g| g.0 - g.1).fold(f64::INFINITY, f64::min);
        Ok(CheckOutcome {
            name: self.name(),
            passed: rep.violations == 0,
            summary: vec![
                ("pairs".into(), rep.gaps.len().to_string()),
                ("radius".into(), ctx.convexity_radius.to_string()),
                ("violations".into(), rep.violations.to_string()),
                ("min_gap".into(), format!("{min_gap:.6e}")),
                ("min_gap_minus_bound".into(), format!("{min_margin:.6e}")),
                ("lipschitz_estimate".into(), format!("{:.6e}", rep.lipschitz)),
            ],
            detail: CheckDetail::Convexity(rep),
        })
    }
}

pub struct CarlemanCheck;

impl PropertyCheck for CarlemanCheck {
    fn name(&self) -> &'static str {
        "carleman"
    }

    fn run(&self, ctx: &VerifyContext) -> Result<CheckOutcome> {
        let rep = carleman_sweep(
            &ctx.carleman_grid,
            ctx.carleman_samples,
            &ctx.carleman_lambdas,
            ctx.seed,
            ctx.passes,
        )?;
        let passed = rep.rows.iter().all(|r| r.included > 0 && r.min_ratio > 0.0);
        let mut summary = vec![("samples".into(), ctx.carleman_samples.to_string())];
        for r in &rep.rows {
            let ratio = if r.included > 0 {
                format!("{:.6e}", r.min_ratio)
            } else {
                "none".into()
            };
            summary.push((
                format!("lambda_{}", r.lambda),
                format!(
                    "min_ratio={ratio} included={} excluded={} min_lhs_over_interior={:.6e}",
                    r.included, r.excluded, r.min_interior_ratio
                ),
            ));
        }
        if let Some(l) = rep.degenerate_lambda() {
            summary.push(("degenerate_at_lambda".into(), l.to_string()));
        }
        Ok(CheckOutcome {
            name: self.name(),
            passed,
            summary,
            detail: CheckDetail::Carleman(rep),
        })
    }
}

/// Checks keyed by name, run in name order.
pub struct CheckRegistry {
    checks: BTreeMap<&'static str, Box<dyn PropertyCheck>>,
}

impl CheckRegistry {
    pub fn empty() -> Self {
        Self {
            checks: BTreeMap::new(),
        }
    }

    /// `carleman`, `convexity` and `gradient`.
    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(GradientCheck));
        r.register(Box::new(ConvexityCheck));
        r.register(Box::new(CarlemanCheck));
        r
    }

    pub fn register(&mut self, check: Box<dyn PropertyCheck>) {
        self.checks.insert(check.name(), check);
    }

    pub fn get(&self, name: &str) -> Result<&dyn PropertyCheck> {
        self.checks.get(name).map(|c| c.as_ref()).ok_or_else(|| Error::UnknownName {
            kind: "property check",
            name: name.to_string(),
            known: self.names().join(", "),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.checks.keys().copied().collect()
    }

    pub fn run_all(&self, ctx: &VerifyContext) -> Result<Vec<CheckOutcome>> {
        self.checks.values().map(|c| c.run(ctx)).collect()
    }
}

impl Default for CheckRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

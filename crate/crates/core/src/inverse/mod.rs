//! Carleman-weighted least-squares inversion for the pair (p, q) = (ln u, ∂_α ln u).
//!
//! The discrete functional is
//!
//! ```text
//! J(p, q) = Σ_n c_n (L₁(p, q)_n² + L₂(p, q)_n²) + γ ‖(p, q)‖²_S,
//! c_n = h_x h_z ω_k e^{2λ(z_j² − b²)},
//! ```
//!
//! summed over interior spatial nodes and all α nodes. Boundary values are
//! eliminated through [`apply_constraints`], so descent runs over free nodes only.

mod constraints;
mod descent;
mod functional;
mod snorm;

pub use constraints::{apply_constraints, extract_free, free_gradient, initial_guess, FreeLayout};
pub use descent::{minimize, minimize_from, IterationRecord, InversionState, StopReason};
pub use functional::{Evaluation, Residuals};
pub use snorm::{s_norm_gradient, s_norm_sq};

use crate::boundary::BoundaryDataSet;
use crate::error::{Error, Result};
use crate::field::{RadianceField, SpatialField};
use crate::geometry::{balanced_carleman_weight, direction_alpha_derivative, direction_vector, GridSet, Region};
use crate::kernel::KernelModel;

/// The unknown pair (p, q) on an Ω-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PairField {
    pub p: RadianceField,
    pub q: RadianceField,
}

impl PairField {
    pub fn zeros(grid: &GridSet) -> Self {
        Self {
            p: RadianceField::zeros(grid),
            q: RadianceField::zeros(grid),
        }
    }

    pub fn new(p: RadianceField, q: RadianceField) -> Result<Self> {
        if (p.nx, p.nz, p.na) != (q.nx, q.nz, q.na) {
            return Err(Error::GridMismatch("p and q live on different grids".into()));
        }
        Ok(Self { p, q })
    }

    pub fn matches(&self, grid: &GridSet) -> bool {
        self.p.matches(grid) && self.q.matches(grid)
    }

    /// `self + t·other`.
    pub fn add_scaled(&self, t: f64, other: &PairField) -> PairField {
        let mut out = self.clone();
        for (a, b) in out.p.values.iter_mut().zip(&other.p.values) {
            *a += t * b;
        }
        for (a, b) in out.q.values.iter_mut().zip(&other.q.values) {
            *a += t * b;
        }
        out
    }

    pub fn sub(&self, other: &PairField) -> PairField {
        self.add_scaled(-1.0, other)
    }

    pub fn scale(&self, t: f64) -> PairField {
        let mut out = self.clone();
        out.p.values.iter_mut().chain(out.q.values.iter_mut()).for_each(|v| *v *= t);
        out
    }

    /// Euclidean inner product of the nodal values.
    pub fn dot(&self, other: &PairField) -> f64 {
        let dp: f64 = self.p.values.iter().zip(&other.p.values).map(|(a, b)| a * b).sum();
        let dq: f64 = self.q.values.iter().zip(&other.q.values).map(|(a, b)| a * b).sum();
        dp + dq
    }

    pub fn max_abs(&self) -> f64 {
        self.p.max_abs().max(self.q.max_abs())
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.q.is_finite()
    }
}

/// How the free-node gradient is measured by the stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientNorm {
    /// Raw derivatives with respect to nodal values.
    Nodal,
    /// Derivatives divided by the cell volume h_x·h_z·h_α, i.e. the
    /// pointwise gradient density, which does not shrink under refinement.
    #[default]
    Density,
}

impl GradientNorm {
    pub fn name(&self) -> &'static str {
        match self {
            GradientNorm::Nodal => "nodal",
            GradientNorm::Density => "density",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "nodal" => Ok(Self::Nodal),
            "density" => Ok(Self::Density),
            _ => Err(Error::UnknownName {
                kind: "gradient norm",
                name: s.to_string(),
                known: "density, nodal".into(),
            }),
        }
    }
}

/// Parameters of the functional and of the descent loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    pub lambda: f64,
    pub gamma: f64,
    pub epsilon: f64,
    /// First trial step of the line search.
    pub rho_init: f64,
    /// Stop once the max-norm of the free-node gradient drops below this.
    pub grad_tol: f64,
    pub grad_norm: GradientNorm,
    pub max_iters: usize,
    /// Warn when the S-norm of an iterate exceeds this radius.
    pub s_norm_radius: Option<f64>,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            lambda: 5.0,
            gamma: 0.001,
            epsilon: 0.01,
            rho_init: 1.0,
            grad_tol: 1e-2,
            grad_norm: GradientNorm::Density,
            max_iters: 20_000,
            s_norm_radius: None,
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidParameter(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !(self.rho_init > 0.0) || !(self.grad_tol > 0.0) {
            return Err(Error::InvalidParameter("rho_init and grad_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Everything fixed during one inversion: grid, medium, kernel quadrature,
/// direction fields, quadrature weights and the boundary data.
#[derive(Debug, Clone)]
pub struct InverseProblem {
    pub grid: GridSet,
    pub mu_s: SpatialField,
    pub kernel: KernelModel,
    pub config: InversionConfig,
    pub data: BoundaryDataSet,
    pub(crate) layout: FreeLayout,
    pub(crate) s_norm: snorm::SNorm,
    pub(crate) gw: Vec<f64>,
    pub(crate) dgw: Vec<f64>,
    /// ν and ∂_αν per node, indexed like a radiance field.
    pub(crate) nu: Vec<[f64; 2]>,
    pub(crate) dnu: Vec<[f64; 2]>,
    /// c_n per (j, k), indexed `j·na + k`.
    pub(crate) weight: Vec<f64>,
}

impl InverseProblem {
    /// `mu_s` lives on the spatial nodes of `data.grid`.
    pub fn new(data: BoundaryDataSet, mu_s: SpatialField, kernel: KernelModel, config: InversionConfig) -> Result<Self> {
        config.validate()?;
        let grid = data.grid.clone();
        if grid.region != Region::Omega {
            return Err(Error::GridMismatch("inversion runs on an Ω-grid".into()));
        }
        if grid.nx() < 3 || grid.nz() < 3 || grid.na() < 3 {
            return Err(Error::GridMismatch("inversion grid is too small".into()));
        }
        if (mu_s.nx, mu_s.nz) != (grid.nx(), grid.nz()) {
            return Err(Error::GridMismatch("μ_s does not match the data grid".into()));
        }
        if !data.is_finite() {
            return Err(Error::BoundaryMismatch("boundary data contain non-finite values".into()));
        }
        let (gw, dgw) = kernel.weighted_matrices(&grid.alpha);
        let mut nu = Vec::with_capacity(grid.len());
        let mut dnu = Vec::with_capacity(grid.len());
        for i in 0..grid.nx() {
            for j in 0..grid.nz() {
                let (x1, z) = grid.point(i, j);
                for k in 0..grid.na() {
                    let a = grid.alpha.node(k);
                    nu.push(direction_vector(x1, z, a)?);
                    dnu.push(direction_alpha_derivative(x1, z, a)?);
                }
            }
        }
        let wa = grid.alpha.trapezoid_weights();
        let cell = grid.x1.step * grid.z.step;
        let b = grid.z.end();
        let mut weight = Vec::with_capacity(grid.nz() * grid.na());
        for j in 0..grid.nz() {
            let w = balanced_carleman_weight(grid.z.node(j), b, config.lambda);
            weight.extend(wa.iter().map(|a| cell * a * w));
        }
        Ok(Self {
            layout: FreeLayout::new(&grid),
            s_norm: snorm::SNorm::new(&grid),
            grid,
            mu_s,
            kernel,
            config,
            data,
            gw,
            dgw,
            nu,
            dnu,
            weight,
        })
    }

    /// Same inputs with a different configuration.
    pub fn with_config(&self, config: InversionConfig) -> Result<Self> {
        Self::new(self.data.clone(), self.mu_s.clone(), self.kernel, config)
    }

    pub fn layout(&self) -> &FreeLayout {
        &self.layout
    }

    /// Factor turning a nodal gradient max-norm into the stopping-rule norm.
    pub fn gradient_norm_scale(&self) -> f64 {
        match self.config.grad_norm {
            GradientNorm::Nodal => 1.0,
            GradientNorm::Density => 1.0 / (self.grid.x1.step * self.grid.z.step * self.grid.alpha.step),
        }
    }
}

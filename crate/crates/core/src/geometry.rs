//! Computational geometry: the rectangle Ω above the source line, the
//! enclosing strip P, tensor grids in (x₁, z, α), ray directions and the
//! quadrature primitives shared by the forward and inverse solvers.

use crate::error::{Error, Result};

const NODE_TOL: f64 = 1e-9;

/// Ω = (−B, B) × (a, b) with sources on the segment {(α, 0) : |α| ≤ d}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub half_width: f64,
    pub z_low: f64,
    pub z_high: f64,
    pub source_half_span: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            half_width: 0.5,
            z_low: 1.0,
            z_high: 2.0,
            source_half_span: 0.5,
        }
    }
}

impl Geometry {
    pub fn new(half_width: f64, z_low: f64, z_high: f64, source_half_span: f64) -> Result<Self> {
        let g = Self {
            half_width,
            z_low,
            z_high,
            source_half_span,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.half_width) && ok(self.z_low) && ok(self.z_high) && ok(self.source_half_span)) {
            return Err(Error::Geometry(format!("all of B, a, b, d must be positive: {self:?}")));
        }
        if self.z_low >= self.z_high {
            return Err(Error::Geometry(format!(
                "need 0 < a < b, got a = {}, b = {}",
                self.z_low, self.z_high
            )));
        }
        Ok(())
    }

    /// B̄ = max(B, d), the half-width of P.
    pub fn bbar(&self) -> f64 {
        self.half_width.max(self.source_half_span)
    }

    pub fn in_omega_closure(&self, x1: f64, z: f64) -> bool {
        x1.abs() <= self.half_width + NODE_TOL
            && z >= self.z_low - NODE_TOL
            && z <= self.z_high + NODE_TOL
    }
}

/// Closed uniform grid `start + i·step`, `i = 0..=intervals`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub intervals: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(hi > lo) {
            return Err(Error::Geometry(format!("bad axis [{lo}, {hi}] step {step}")));
        }
        let span = hi - lo;
        let n = (span / step).round();
        if n < 1.0 || (n * step - span).abs() > NODE_TOL * span.max(1.0) {
            return Err(Error::Geometry(format!(
                "step {step} does not divide the interval [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            start: lo,
            step,
            intervals: n as usize,
        })
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.node(self.intervals)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Index of the node equal to `value`, if there is one.
    pub fn index_of(&self, value: f64) -> Option<usize> {
        let t = (value - self.start) / self.step;
        let i = t.round();
        if i < 0.0 || i > self.intervals as f64 || (t - i).abs() > 1e-7 {
            None
        } else {
            Some(i as usize)
        }
    }

    /// Cell index and fractional offset for linear interpolation, clamped
    /// to the axis.
    pub fn locate(&self, value: f64) -> (usize, f64) {
        let t = (value - self.start) / self.step;
        if t <= 0.0 {
            return (0, 0.0);
        }
        let cell = (t.floor() as usize).min(self.intervals - 1);
        let frac = (t - cell as f64).clamp(0.0, 1.0);
        (cell, frac)
    }

    /// Composite trapezoid weights over the closed axis.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let mut w = vec![self.step; self.len()];
        w[0] *= 0.5;
        w[self.intervals] *= 0.5;
        w
    }

    /// The sub-axis keeping every `stride`-th node.
    pub fn coarsen(&self, stride: usize) -> Result<Self> {
        if stride == 0 || !self.intervals.is_multiple_of(stride) {
            return Err(Error::GridMismatch(format!(
                "cannot coarsen {} intervals by {stride}",
                self.intervals
            )));
        }
        Ok(Self {
            start: self.start,
            step: self.step * stride as f64,
            intervals: self.intervals / stride,
        })
    }

    /// Whether every node of `other` is a node of `self`.
    pub fn contains_axis(&self, other: &Axis) -> bool {
        other.index_of_in(self).is_some()
    }

    fn index_of_in(&self, parent: &Axis) -> Option<(usize, usize)> {
        let first = parent.index_of(self.start)?;
        let ratio = self.step / parent.step;
        let stride = ratio.round();
        if stride < 1.0 || (ratio - stride).abs() > 1e-7 {
            return None;
        }
        let stride = stride as usize;
        if first + stride * self.intervals > parent.intervals {
            return None;
        }
        Some((first, stride))
    }

    /// `(offset, stride)` such that `self.node(i) == parent.node(offset + stride·i)`.
    pub fn embedding_in(&self, parent: &Axis) -> Result<(usize, usize)> {
        self.index_of_in(parent).ok_or_else(|| {
            Error::GridMismatch(format!("axis {self:?} is not a sub-grid of {parent:?}"))
        })
    }
}

/// Which domain a grid spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// The strip P = (−B̄, B̄) × [0, b] containing the sources.
    Strip,
    /// Ω itself.
    Omega,
}

/// Tensor grid in (x₁, z, α) together with the index window of Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSet {
    pub geometry: Geometry,
    pub region: Region,
    pub x1: Axis,
    pub z: Axis,
    pub alpha: Axis,
    /// First and last x₁ index inside closure(Ω).
    pub omega_i: (usize, usize),
    /// First and last z index inside closure(Ω).
    pub omega_j: (usize, usize),
}

impl GridSet {
    /// Grid over P used for data synthesis.
    pub fn strip(geometry: Geometry, h_x1: f64, h_z: f64, h_alpha: f64) -> Result<Self> {
        geometry.validate()?;
        let bbar = geometry.bbar();
        let x1 = Axis::new(-bbar, bbar, h_x1)?;
        let z = Axis::new(0.0, geometry.z_high, h_z)?;
        let alpha = Axis::new(-geometry.source_half_span, geometry.source_half_span, h_alpha)?;
        let lo = x1.index_of(-geometry.half_width);
        let hi = x1.index_of(geometry.half_width);
        let ja = z.index_of(geometry.z_low);
        match (lo, hi, ja) {
            (Some(lo), Some(hi), Some(ja)) => Ok(Self {
                geometry,
                region: Region::Strip,
                x1,
                z,
                alpha,
                omega_i: (lo, hi),
                omega_j: (ja, z.intervals),
            }),
            _ => Err(Error::Geometry(
                "the boundary of Ω must fall on grid nodes".to_string(),
            )),
        }
    }

    /// Grid over closure(Ω) used by the inverse solver.
    pub fn omega(geometry: Geometry, h_x1: f64, h_z: f64, h_alpha: f64) -> Result<Self> {
        geometry.validate()?;
        let x1 = Axis::new(-geometry.half_width, geometry.half_width, h_x1)?;
        let z = Axis::new(geometry.z_low, geometry.z_high, h_z)?;
        let alpha = Axis::new(-geometry.source_half_span, geometry.source_half_span, h_alpha)?;
        Ok(Self {
            geometry,
            region: Region::Omega,
            omega_i: (0, x1.intervals),
            omega_j: (0, z.intervals),
            x1,
            z,
            alpha,
        })
    }

    pub fn uniform_strip(geometry: Geometry, h: f64) -> Result<Self> {
        Self::strip(geometry, h, h, h)
    }

    pub fn uniform_omega(geometry: Geometry, h: f64) -> Result<Self> {
        Self::omega(geometry, h, h, h)
    }

    pub fn nx(&self) -> usize {
        self.x1.len()
    }

    pub fn nz(&self) -> usize {
        self.z.len()
    }

    pub fn na(&self) -> usize {
        self.alpha.len()
    }

    pub fn spatial_len(&self) -> usize {
        self.nx() * self.nz()
    }

    pub fn len(&self) -> usize {
        self.spatial_len() * self.na()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat spatial index; z varies fastest.
    #[inline]
    pub fn spatial_index(&self, i: usize, j: usize) -> usize {
        i * self.nz() + j
    }

    /// Flat index of (i, j, k); α varies fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.nz() + j) * self.na() + k
    }

    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x1.node(i), self.z.node(j))
    }

    pub fn in_omega(&self, i: usize, j: usize) -> bool {
        (self.omega_i.0..=self.omega_i.1).contains(&i) && (self.omega_j.0..=self.omega_j.1).contains(&j)
    }

    /// The Ω-only grid obtained by restricting this one and keeping every
    /// `stride`-th node in each direction.
    pub fn omega_subgrid(&self, stride: usize) -> Result<GridSet> {
        let x1 = Axis {
            start: self.x1.node(self.omega_i.0),
            step: self.x1.step,
            intervals: self.omega_i.1 - self.omega_i.0,
        }
        .coarsen(stride)?;
        let z = Axis {
            start: self.z.node(self.omega_j.0),
            step: self.z.step,
            intervals: self.omega_j.1 - self.omega_j.0,
        }
        .coarsen(stride)?;
        let alpha = self.alpha.coarsen(stride)?;
        Ok(GridSet {
            geometry: self.geometry,
            region: Region::Omega,
            omega_i: (0, x1.intervals),
            omega_j: (0, z.intervals),
            x1,
            z,
            alpha,
        })
    }

    /// Bilinear interpolation stencil for an arbitrary point, clamped to the grid.
    #[inline]
    pub fn bilinear(&self, x1: f64, z: f64) -> Bilinear {
        let (i, tx) = self.x1.locate(x1);
        let (j, tz) = self.z.locate(z);
        Bilinear { i, j, tx, tz }
    }
}

/// Four-corner interpolation stencil in (x₁, z).
#[derive(Debug, Clone, Copy)]
pub struct Bilinear {
    pub i: usize,
    pub j: usize,
    pub tx: f64,
    pub tz: f64,
}

impl Bilinear {
    /// Corners as `(i, j, weight)`.
    #[inline]
    pub fn corners(&self) -> [(usize, usize, f64); 4] {
        let (i, j, tx, tz) = (self.i, self.j, self.tx, self.tz);
        [
            (i, j, (1.0 - tx) * (1.0 - tz)),
            (i + 1, j, tx * (1.0 - tz)),
            (i, j + 1, (1.0 - tx) * tz),
            (i + 1, j + 1, tx * tz),
        ]
    }

    /// Interpolate a spatial array laid out with `GridSet::spatial_index`.
    #[inline]
    pub fn eval(&self, grid: &GridSet, values: &[f64]) -> f64 {
        self.corners()
            .iter()
            .map(|&(i, j, w)| w * values[grid.spatial_index(i, j)])
            .sum()
    }
}

/// Unit vector from the source x_α = (α, 0) to x.
pub fn direction_vector(x1: f64, z: f64, alpha: f64) -> Result<[f64; 2]> {
    let dx = x1 - alpha;
    let r = dx.hypot(z);
    if r < 1e-14 {
        return Err(Error::DegenerateDirection { x1, z, alpha });
    }
    Ok([dx / r, z / r])
}

/// ∂ν/∂α, analytic.
pub fn direction_alpha_derivative(x1: f64, z: f64, alpha: f64) -> Result<[f64; 2]> {
    let dx = x1 - alpha;
    let r2 = dx * dx + z * z;
    let r = r2.sqrt();
    if r < 1e-14 {
        return Err(Error::DegenerateDirection { x1, z, alpha });
    }
    let r3 = r2 * r;
    Ok([(-r2 + dx * dx) / r3, z * dx / r3])
}

/// The Carleman weight e^{2λz²}.
pub fn carleman_weight(z: f64, lambda: f64) -> f64 {
    (2.0 * lambda * z * z).exp()
}

/// e^{2λ(z² − b²)}: the Carleman weight already balanced by e^{−2λb²}.
pub fn balanced_carleman_weight(z: f64, b: f64, lambda: f64) -> f64 {
    (2.0 * lambda * (z * z - b * b)).exp()
}

/// Equispaced trapezoid samples of the segment from x_α to x.
pub fn line_quadrature(x1: f64, z: f64, alpha: f64, n_samples: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
    let n = n_samples.max(2);
    let len = (x1 - alpha).hypot(z);
    let ds = len / (n - 1) as f64;
    let points = (0..n)
        .map(|m| {
            let t = m as f64 / (n - 1) as f64;
            [alpha + t * (x1 - alpha), t * z]
        })
        .collect();
    let mut weights = vec![ds; n];
    weights[0] *= 0.5;
    weights[n - 1] *= 0.5;
    (points, weights)
}

/// Number of ray samples so that the spacing is at most `max_spacing`.
pub fn ray_sample_count(length: f64, max_spacing: f64) -> usize {
    ((length / max_spacing).ceil() as usize + 1).max(2)
}

/// Trapezoid rule over the α axis.
pub fn alpha_quadrature(values: &[f64], alpha: &Axis) -> Result<f64> {
    if values.len() != alpha.len() {
        return Err(Error::LengthMismatch {
            expected: alpha.len(),
            actual: values.len(),
        });
    }
    Ok(values
        .iter()
        .zip(alpha.trapezoid_weights())
        .map(|(v, w)| v * w)
        .sum())
}

/// Central first difference along a uniform line of samples with
/// second-order one-sided closures at both ends.
pub fn derivative_1d(values: &[f64], step: f64, out: &mut [f64]) {
    let n = values.len();
    debug_assert!(n >= 3 && out.len() == n);
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * step);
    for m in 1..n - 1 {
        out[m] = (values[m + 1] - values[m - 1]) / (2.0 * step);
    }
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * step);
}

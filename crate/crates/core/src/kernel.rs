//! Henyey–Greenstein scattering kernel on the source segment.

use crate::error::{Error, Result};
use crate::geometry::Axis;

/// G(x, α, β) = H(α, β) = (1/2d)·(1 − c_g²)/(1 + c_g² − 2c_g cos(α − β)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelModel {
    pub c_g: f64,
    pub half_span: f64,
}

impl KernelModel {
    pub fn new(c_g: f64, half_span: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&c_g) {
            return Err(Error::InvalidParameter(format!("c_g must lie in [0, 1), got {c_g}")));
        }
        if !(half_span > 0.0) {
            return Err(Error::InvalidParameter(format!("d must be positive, got {half_span}")));
        }
        Ok(Self { c_g, half_span })
    }

    #[inline]
    pub fn value(&self, alpha: f64, beta: f64) -> f64 {
        let c = self.c_g;
        (1.0 - c * c) / (1.0 + c * c - 2.0 * c * (alpha - beta).cos()) / (2.0 * self.half_span)
    }

    /// ∂G/∂α.
    #[inline]
    pub fn alpha_derivative(&self, alpha: f64, beta: f64) -> f64 {
        let c = self.c_g;
        let den = 1.0 + c * c - 2.0 * c * (alpha - beta).cos();
        -(1.0 - c * c) * 2.0 * c * (alpha - beta).sin() / (den * den) / (2.0 * self.half_span)
    }

    /// Dense quadrature matrices `G[k][l]·ω_l` and `∂_αG[k][l]·ω_l` on an α axis,
    /// row-major with `na` columns.
    pub fn weighted_matrices(&self, alpha: &Axis) -> (Vec<f64>, Vec<f64>) {
        let na = alpha.len();
        let w = alpha.trapezoid_weights();
        let mut g = vec![0.0; na * na];
        let mut dg = vec![0.0; na * na];
        for k in 0..na {
            for l in 0..na {
                let (a, b) = (alpha.node(k), alpha.node(l));
                g[k * na + l] = self.value(a, b) * w[l];
                dg[k * na + l] = self.alpha_derivative(a, b) * w[l];
            }
        }
        (g, dg)
    }
}

/// `out[k] = Σ_l m[k][l]·v[l]` for a square row-major matrix.
#[inline]
pub fn mat_vec(m: &[f64], v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for (k, o) in out.iter_mut().enumerate() {
        let row = &m[k * n..(k + 1) * n];
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ballistic_kernel_is_constant() {
        let k = KernelModel::new(0.0, 0.5).unwrap();
        for &(a, b) in &[(0.0, 0.0), (-0.5, 0.5), (0.2, -0.1)] {
            assert!((k.value(a, b) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn forward_peak() {
        let k = KernelModel::new(0.5, 0.5).unwrap();
        assert!((k.value(0.3, 0.3) - 3.0).abs() < 1e-14);
        assert!((k.value(0.3, -0.2) - k.value(-0.2, 0.3)).abs() < 1e-15);
        assert!(KernelModel::new(1.0, 0.5).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let k = KernelModel::new(0.5, 0.5).unwrap();
        let h = 1e-6;
        for &(a, b) in &[(0.1, -0.3), (-0.4, 0.45), (0.0, 0.0)] {
            let fd = (k.value(a + h, b) - k.value(a - h, b)) / (2.0 * h);
            assert!((fd - k.alpha_derivative(a, b)).abs() < 1e-8);
        }
    }
}

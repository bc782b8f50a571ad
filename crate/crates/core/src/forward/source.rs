//! Mollified point source on the source line.

use crate::error::{Error, Result};

/// Unnormalised bump profile φ(t) = exp(−t²/(1 − t²)) on [0, 1).
fn bump(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        (-t * t / (1.0 - t * t)).exp()
    }
}

/// Composite Simpson rule on [lo, hi] with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for m in 1..n {
        let w = if m % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + m as f64 * h);
    }
    acc * h / 3.0
}

/// f_σ(y) = C_σ·exp(|y|²/(|y|² − σ²)) for |y| < σ, zero otherwise, with C_σ
/// normalising the planar integral to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    pub sigma: f64,
    pub c_sigma: f64,
    /// ∫₀^σ f̂(s) ds, the source mass seen by a ray that crosses the whole support.
    pub profile_integral: f64,
}

impl SourceModel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        let radial_moment = simpson(|t| bump(t) * t, 0.0, 1.0, 20_000);
        let c_sigma = 1.0 / (2.0 * std::f64::consts::PI * sigma * sigma * radial_moment);
        let profile_integral = c_sigma * sigma * simpson(bump, 0.0, 1.0, 20_000);
        Ok(Self {
            sigma,
            c_sigma,
            profile_integral,
        })
    }

    /// Radial profile f̂(s) at distance s from the source.
    #[inline]
    pub fn radial(&self, s: f64) -> f64 {
        self.c_sigma * bump(s / self.sigma)
    }

    /// f(x − x_α).
    pub fn value(&self, x1: f64, z: f64, alpha: f64) -> f64 {
        self.radial((x1 - alpha).hypot(z))
    }

    /// ∫₀^min(r, σ) f̂(s) ds.
    pub fn radial_integral(&self, r: f64) -> f64 {
        if r >= self.sigma {
            self.profile_integral
        } else if r <= 0.0 {
            0.0
        } else {
            self.c_sigma * self.sigma * simpson(bump, 0.0, r / self.sigma, 2_000)
        }
    }
}

//! Attenuation recovered from the minimizing pair, and reconstruction scores.

use crate::error::{Error, Result};
use crate::field::{RadianceField, SpatialField};
use crate::geometry::{derivative_1d, direction_vector, GridSet};
use crate::kernel::{mat_vec, KernelModel};
use crate::phantom::{mask_centroid, Phantom, MU_S_BACKGROUND};

/// a_comp(x) = −(1/2d)∫ ν·∇p dα + (1/2d)∫ e^{−p} μ_s ∫ G e^{p(x,β)} dβ dα.
///
/// ∇p uses central differences inside Ω and second-order one-sided
/// differences on ∂Ω; both α-integrals use the trapezoid rule.
pub fn recover_attenuation(
    p: &RadianceField,
    mu_s: &SpatialField,
    kernel: &KernelModel,
    grid: &GridSet,
) -> Result<SpatialField> {
    if !p.matches(grid) || (mu_s.nx, mu_s.nz) != (grid.nx(), grid.nz()) {
        return Err(Error::GridMismatch("recovery inputs do not share the grid".into()));
    }
    let (nx, nz, na) = (grid.nx(), grid.nz(), grid.na());
    if nx < 3 || nz < 3 {
        return Err(Error::GridMismatch("recovery needs at least three nodes per axis".into()));
    }
    let mut px = vec![0.0; p.values.len()];
    let mut pz = vec![0.0; p.values.len()];
    let mut line = vec![0.0; nx.max(nz)];
    let mut dline = vec![0.0; nx.max(nz)];
    for j in 0..nz {
        for k in 0..na {
            for i in 0..nx {
                line[i] = p.get(i, j, k);
            }
            derivative_1d(&line[..nx], grid.x1.step, &mut dline[..nx]);
            for i in 0..nx {
                px[grid.index(i, j, k)] = dline[i];
            }
        }
    }
    for i in 0..nx {
        for k in 0..na {
            for j in 0..nz {
                line[j] = p.get(i, j, k);
            }
            derivative_1d(&line[..nz], grid.z.step, &mut dline[..nz]);
            for j in 0..nz {
                pz[grid.index(i, j, k)] = dline[j];
            }
        }
    }
    let (gw, _) = kernel.weighted_matrices(&grid.alpha);
    let wa = grid.alpha.trapezoid_weights();
    let span = grid.alpha.end() - grid.alpha.start;
    let mut ep = vec![0.0; na];
    let mut s = vec![0.0; na];
    let mut out = SpatialField::zeros(grid);
    for i in 0..nx {
        for j in 0..nz {
            let (x1, z) = grid.point(i, j);
            let mu = mu_s.get(i, j);
            for (k, e) in ep.iter_mut().enumerate() {
                *e = p.get(i, j, k).exp();
            }
            mat_vec(&gw, &ep, &mut s);
            let mut acc = 0.0;
            for k in 0..na {
                let nu = direction_vector(x1, z, grid.alpha.node(k))?;
                let m = grid.index(i, j, k);
                acc += wa[k] * (-(nu[0] * px[m] + nu[1] * pz[m]) + mu * s[k] / ep[k]);
            }
            out.set(i, j, acc / span);
        }
    }
    Ok(out)
}

/// 1 + max(μ_a)/5, with a negative maximum clamped to zero.
pub fn computed_contrast(mu_a: &SpatialField) -> f64 {
    contrast_against(mu_a, MU_S_BACKGROUND)
}

/// 1 + max(μ_a)/background, with a negative maximum clamped to zero.
pub fn contrast_against(mu_a: &SpatialField, background: f64) -> f64 {
    1.0 + mu_a.max().max(0.0) / background
}

/// Recovered coefficients on an Ω-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub a_comp: SpatialField,
    pub mu_a_comp: SpatialField,
    pub contrast: f64,
}

impl Reconstruction {
    pub fn new(a_comp: SpatialField, mu_s: &SpatialField) -> Self {
        Self::with_background(a_comp, mu_s, MU_S_BACKGROUND)
    }

    pub fn with_background(a_comp: SpatialField, mu_s: &SpatialField, background: f64) -> Self {
        let mu_a_comp = SpatialField {
            nx: a_comp.nx,
            nz: a_comp.nz,
            values: a_comp.values.iter().zip(&mu_s.values).map(|(a, s)| a - s).collect(),
        };
        let contrast = contrast_against(&mu_a_comp, background);
        Self {
            a_comp,
            mu_a_comp,
            contrast,
        }
    }
}

/// Scores of a reconstruction against the true phantom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// ‖μ_a,comp − μ_a‖ / ‖μ_a‖ in L₂(Ω).
    pub l2_rel_error: f64,
    /// Distance between the centroid of {μ_a,comp ≥ max/2} and the mask centroid.
    /// Infinite when the reconstruction has no positive part.
    pub centroid_offset: f64,
    pub contrast: f64,
    pub true_contrast: f64,
    /// |contrast − true_contrast| / true_contrast.
    pub contrast_error: f64,
}

/// Node set where `mu_a ≥ max/2`, empty if the maximum is not positive.
pub fn half_max_support(mu_a: &SpatialField) -> Vec<bool> {
    let peak = mu_a.max();
    if !(peak > 0.0) {
        return vec![false; mu_a.values.len()];
    }
    mu_a.values.iter().map(|&v| v >= 0.5 * peak).collect()
}

pub fn score(rec: &Reconstruction, phantom: &Phantom, grid: &GridSet) -> Result<Metrics> {
    let truth = &phantom.mu_a;
    if (truth.nx, truth.nz) != (rec.mu_a_comp.nx, rec.mu_a_comp.nz) || (truth.nx, truth.nz) != (grid.nx(), grid.nz()) {
        return Err(Error::GridMismatch("reconstruction and phantom grids differ".into()));
    }
    let wx = grid.x1.trapezoid_weights();
    let wz = grid.z.trapezoid_weights();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..grid.nx() {
        for j in 0..grid.nz() {
            let w = wx[i] * wz[j];
            let t = truth.get(i, j);
            num += w * (rec.mu_a_comp.get(i, j) - t).powi(2);
            den += w * t * t;
        }
    }
    let l2_rel_error = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    let centroid_offset = match (
        mask_centroid(&half_max_support(&rec.mu_a_comp), grid),
        mask_centroid(&phantom.mask, grid),
    ) {
        (Some(a), Some(b)) => (a.0 - b.0).hypot(a.1 - b.1),
        _ => f64::INFINITY,
    };
    let true_contrast = phantom.true_contrast();
    Ok(Metrics {
        l2_rel_error,
        centroid_offset,
        contrast: rec.contrast,
        true_contrast,
        contrast_error: (rec.contrast - true_contrast).abs() / true_contrast,
    })
}

//! Viscosity residuals L₁ʰ, L₂ʰ, the weighted functional and its exact gradient.

use rayon::prelude::*;

use super::constraints::{apply_constraints, embed_free, free_gradient};
use super::{InverseProblem, PairField};
use crate::error::Result;
use crate::field::RadianceField;
use crate::kernel::mat_vec;

/// Functional value and the residuals behind it.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub value: f64,
    pub residuals: Residuals,
}

/// L₁ and L₂ on the grid, zero at non-interior spatial nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    pub l1: RadianceField,
    pub l2: RadianceField,
}

impl InverseProblem {
    #[inline]
    fn is_interior(&self, i: usize, j: usize) -> bool {
        i >= 1 && i + 1 < self.grid.nx() && j >= 1 && j + 1 < self.grid.nz()
    }

    /// Both residuals at every interior node.
    pub fn residuals(&self, pair: &PairField) -> Residuals {
        let (nz, na) = (self.grid.nz(), self.grid.na());
        let (hx, hz) = (self.grid.x1.step, self.grid.z.step);
        let eps = self.config.epsilon;
        let mut l1 = RadianceField::zeros(&self.grid);
        let mut l2 = RadianceField::zeros(&self.grid);
        let (p, q) = (&pair.p.values, &pair.q.values);
        l1.values
            .par_chunks_mut(na)
            .zip(l2.values.par_chunks_mut(na))
            .enumerate()
            .for_each(|(m, (r1, r2))| {
                let (i, j) = (m / nz, m % nz);
                if !self.is_interior(i, j) {
                    return;
                }
                let mu = self.mu_s.get(i, j);
                let base = m * na;
                let (xp, xm) = (base + nz * na, base - nz * na);
                let (zp, zm) = (base + na, base - na);
                let ep: Vec<f64> = p[base..base + na].iter().map(|v| v.exp()).collect();
                let mut s = vec![0.0; na];
                let mut t = vec![0.0; na];
                mat_vec(&self.gw, &ep, &mut s);
                mat_vec(&self.dgw, &ep, &mut t);
                for k in 0..na {
                    let lap = |f: &[f64]| {
                        (f[xp + k] - 2.0 * f[base + k] + f[xm + k]) / (hx * hx)
                            + (f[zp + k] - 2.0 * f[base + k] + f[zm + k]) / (hz * hz)
                    };
                    let grad = |f: &[f64]| {
                        [
                            (f[xp + k] - f[xm + k]) / (2.0 * hx),
                            (f[zp + k] - f[zm + k]) / (2.0 * hz),
                        ]
                    };
                    let nu = self.nu[base + k];
                    let dnu = self.dnu[base + k];
                    let (gq, gp) = (grad(q), grad(p));
                    let common = nu[0] * gq[0]
                        + nu[1] * gq[1]
                        + dnu[0] * gp[0]
                        + dnu[1] * gp[1]
                        + mu * (q[base + k] * s[k] - t[k]) / ep[k];
                    r1[k] = -eps * lap(p) + common;
                    r2[k] = -eps * lap(q) + common;
                }
            });
        Residuals { l1, l2 }
    }

    pub fn residual_l1(&self, pair: &PairField) -> RadianceField {
        self.residuals(pair).l1
    }

    pub fn residual_l2(&self, pair: &PairField) -> RadianceField {
        self.residuals(pair).l2
    }

    /// The Carleman-weighted residual quadrature alone.
    pub fn weighted_residual(&self, pair: &PairField) -> f64 {
        let r = self.residuals(pair);
        self.weighted_sum(&r)
    }

    fn weighted_sum(&self, r: &Residuals) -> f64 {
        let (nx, nz, na) = (self.grid.nx(), self.grid.nz(), self.grid.na());
        let mut total = 0.0;
        for i in 1..nx - 1 {
            for j in 1..nz - 1 {
                let base = (i * nz + j) * na;
                for k in 0..na {
                    let (a, b) = (r.l1.values[base + k], r.l2.values[base + k]);
                    total += self.weight[j * na + k] * (a * a + b * b);
                }
            }
        }
        total
    }

    /// J(p, q) for a pair on the grid.
    pub fn functional_value(&self, pair: &PairField) -> f64 {
        self.evaluate(pair).value
    }

    /// J and its gradient with respect to every nodal value (no elimination).
    pub fn nodal_gradient(&self, pair: &PairField) -> (f64, PairField) {
        let eval = self.evaluate(pair);
        let grad = self.gradient_from(pair, eval.residuals);
        (eval.value, grad)
    }

    /// J together with the residuals it was assembled from.
    pub fn evaluate(&self, pair: &PairField) -> Evaluation {
        let residuals = self.residuals(pair);
        let value = self.weighted_sum(&residuals) + self.config.gamma * self.s_norm.value(pair);
        Evaluation { value, residuals }
    }

    /// Nodal gradient at `pair`, reusing residuals computed there.
    pub fn gradient_from(&self, pair: &PairField, r: Residuals) -> PairField {
        let (nz, na) = (self.grid.nz(), self.grid.na());
        let (hx, hz) = (self.grid.x1.step, self.grid.z.step);
        let eps = self.config.epsilon;
        // Adjoint sources 2·c_n·L.
        let mut a1 = r.l1;
        let mut a2 = r.l2;
        for (m, (v1, v2)) in a1.values.iter_mut().zip(a2.values.iter_mut()).enumerate() {
            let w = 2.0 * self.weight[((m / na) % nz) * na + m % na];
            *v1 *= w;
            *v2 *= w;
        }
        let a12: Vec<f64> = a1.values.iter().zip(&a2.values).map(|(a, b)| a + b).collect();
        let (p, q) = (&pair.p.values, &pair.q.values);
        let mut grad = PairField::zeros(&self.grid);
        let nx = self.grid.nx();
        grad.p
            .values
            .par_chunks_mut(na)
            .zip(grad.q.values.par_chunks_mut(na))
            .enumerate()
            .for_each(|(m, (gp, gq))| {
                let (i, j) = (m / nz, m % nz);
                let base = m * na;
                // Neighbours present on the grid; residual sources vanish off the interior.
                let nbrs = [
                    (i + 1 < nx).then(|| (base + nz * na, 0usize, -1.0 / (2.0 * hx), 1.0 / (hx * hx))),
                    (i >= 1).then(|| (base - nz * na, 0usize, 1.0 / (2.0 * hx), 1.0 / (hx * hx))),
                    (j + 1 < nz).then(|| (base + na, 1usize, -1.0 / (2.0 * hz), 1.0 / (hz * hz))),
                    (j >= 1).then(|| (base - na, 1usize, 1.0 / (2.0 * hz), 1.0 / (hz * hz))),
                ];
                let centre = -2.0 / (hx * hx) - 2.0 / (hz * hz);
                for k in 0..na {
                    let mut sp = -eps * centre * a1.values[base + k];
                    let mut sq = -eps * centre * a2.values[base + k];
                    for &(n, axis, dcoef, lcoef) in nbrs.iter().flatten() {
                        let n = n + k;
                        sp += -eps * lcoef * a1.values[n] + self.dnu[n][axis] * dcoef * a12[n];
                        sq += -eps * lcoef * a2.values[n] + self.nu[n][axis] * dcoef * a12[n];
                    }
                    gp[k] = sp;
                    gq[k] = sq;
                }
                if !self.is_interior(i, j) {
                    return;
                }
                let mu = self.mu_s.get(i, j);
                let ep: Vec<f64> = p[base..base + na].iter().map(|v| v.exp()).collect();
                let mut s = vec![0.0; na];
                let mut t = vec![0.0; na];
                mat_vec(&self.gw, &ep, &mut s);
                mat_vec(&self.dgw, &ep, &mut t);
                // ρ_k = R_k e^{−p_k} μ_s.
                let rho: Vec<f64> = (0..na).map(|k| a12[base + k] * mu / ep[k]).collect();
                for k in 0..na {
                    gq[k] += rho[k] * s[k];
                    gp[k] -= rho[k] * (q[base + k] * s[k] - t[k]);
                }
                for l in 0..na {
                    let mut acc = 0.0;
                    for k in 0..na {
                        acc += rho[k] * (q[base + k] * self.gw[k * na + l] - self.dgw[k * na + l]);
                    }
                    gp[l] += ep[l] * acc;
                }
            });
        if self.config.gamma != 0.0 {
            self.s_norm.accumulate_gradient(pair, self.config.gamma, &mut grad);
        }
        grad
    }

    /// Gradient with respect to the free nodes, placed on the grid with zeros
    /// at Dirichlet nodes and on the reconstructed layer.
    pub fn functional_gradient(&self, pair: &PairField) -> PairField {
        let (_, full) = self.nodal_gradient(pair);
        embed_free(&self.layout, &self.grid, &free_gradient(&self.layout, &full))
    }

    /// J as a function of the free values.
    pub fn value_free(&self, free: &[f64]) -> Result<f64> {
        let pair = apply_constraints(&self.layout, free, &self.data)?;
        Ok(self.functional_value(&pair))
    }

    /// Pair and evaluation for free values; pass to [`Self::gradient_free`].
    pub fn evaluate_free(&self, free: &[f64]) -> Result<(PairField, Evaluation)> {
        let pair = apply_constraints(&self.layout, free, &self.data)?;
        let eval = self.evaluate(&pair);
        Ok((pair, eval))
    }

    pub fn gradient_free(&self, pair: &PairField, eval: Evaluation) -> Vec<f64> {
        free_gradient(&self.layout, &self.gradient_from(pair, eval.residuals))
    }

    /// J and its gradient as functions of the free values.
    pub fn value_and_gradient_free(&self, free: &[f64]) -> Result<(f64, Vec<f64>)> {
        let pair = apply_constraints(&self.layout, free, &self.data)?;
        let (value, full) = self.nodal_gradient(&pair);
        Ok((value, free_gradient(&self.layout, &full)))
    }
}

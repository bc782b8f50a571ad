//! Elimination of the Dirichlet and Neumann constraints and the starting pair.

use super::PairField;
use crate::boundary::BoundaryDataSet;
use crate::error::{Error, Result};
use crate::field::RadianceField;
use crate::geometry::GridSet;

/// Packing of the free nodes: interior i, 1 ≤ j ≤ N_z − 3, every α; p first, then q.
///
/// Layer N_z − 2 is reconstructed from layer N_z − 3 and the Neumann data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeLayout {
    pub nx: usize,
    pub nz: usize,
    pub na: usize,
}

impl FreeLayout {
    pub fn new(grid: &GridSet) -> Self {
        Self {
            nx: grid.nx(),
            nz: grid.nz(),
            na: grid.na(),
        }
    }

    /// Free values per field.
    pub fn per_field(&self) -> usize {
        (self.nx - 2) * (self.nz - 3) * self.na
    }

    pub fn len(&self) -> usize {
        2 * self.per_field()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn is_free(&self, i: usize, j: usize) -> bool {
        i >= 1 && i + 1 < self.nx && j >= 1 && j + 3 <= self.nz
    }

    /// Position of free node (i, j, k) within one field's block.
    #[inline]
    pub fn slot(&self, i: usize, j: usize, k: usize) -> usize {
        ((i - 1) * (self.nz - 3) + (j - 1)) * self.na + k
    }

    #[inline]
    fn field_index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.nz + j) * self.na + k
    }

    fn check(&self, data: &BoundaryDataSet) -> Result<()> {
        if FreeLayout::new(&data.grid) != *self {
            return Err(Error::GridMismatch("boundary data grid differs from the free layout".into()));
        }
        Ok(())
    }
}

fn fill_field(
    layout: &FreeLayout,
    free: &[f64],
    data: &BoundaryDataSet,
    dirichlet: &[f64],
    neumann: &[f64],
) -> RadianceField {
    let FreeLayout { nx, nz, na } = *layout;
    let mut f = RadianceField::zeros(&data.grid);
    for i in 1..nx - 1 {
        for j in 1..nz - 2 {
            for k in 0..na {
                f.values[layout.field_index(i, j, k)] = free[layout.slot(i, j, k)];
            }
        }
    }
    for (m, n) in data.nodes.iter().enumerate() {
        for k in 0..na {
            f.values[layout.field_index(n.i, n.j, k)] = dirichlet[m * na + k];
        }
    }
    let hz = data.grid.z.step;
    for i in 1..nx - 1 {
        let top = data.node_position(i, nz - 1).expect("top node");
        for k in 0..na {
            let below = f.values[layout.field_index(i, nz - 3, k)];
            let rebuilt = (below - 2.0 * hz * neumann[i * na + k] + 3.0 * dirichlet[top * na + k]) / 4.0;
            f.values[layout.field_index(i, nz - 2, k)] = rebuilt;
        }
    }
    f
}

/// The pair determined by free values and boundary data: Dirichlet nodes from
/// g₁/g₂, layer N_z − 2 from the one-sided Neumann closure with g₃/g₄.
pub fn apply_constraints(layout: &FreeLayout, free: &[f64], data: &BoundaryDataSet) -> Result<PairField> {
    layout.check(data)?;
    if free.len() != layout.len() {
        return Err(Error::LengthMismatch {
            expected: layout.len(),
            actual: free.len(),
        });
    }
    let (fp, fq) = free.split_at(layout.per_field());
    Ok(PairField {
        p: fill_field(layout, fp, data, &data.g1, &data.g3),
        q: fill_field(layout, fq, data, &data.g2, &data.g4),
    })
}

/// Values of `pair` at the free nodes.
pub fn extract_free(layout: &FreeLayout, pair: &PairField) -> Vec<f64> {
    let mut out = vec![0.0; layout.len()];
    let n = layout.per_field();
    for i in 1..layout.nx - 1 {
        for j in 1..layout.nz - 2 {
            for k in 0..layout.na {
                let s = layout.slot(i, j, k);
                let m = layout.field_index(i, j, k);
                out[s] = pair.p.values[m];
                out[n + s] = pair.q.values[m];
            }
        }
    }
    out
}

/// Chain rule through [`apply_constraints`]: the derivative with respect to
/// the free values of a function whose nodal gradient is `full`.
pub fn free_gradient(layout: &FreeLayout, full: &PairField) -> Vec<f64> {
    let mut out = extract_free(layout, full);
    if layout.nz < 4 {
        return out;
    }
    let n = layout.per_field();
    let j = layout.nz - 3;
    for i in 1..layout.nx - 1 {
        for k in 0..layout.na {
            let s = layout.slot(i, j, k);
            let m = layout.field_index(i, j + 1, k);
            out[s] += 0.25 * full.p.values[m];
            out[n + s] += 0.25 * full.q.values[m];
        }
    }
    out
}

/// Free-node vector placed on the grid, zero at eliminated nodes.
pub fn embed_free(layout: &FreeLayout, grid: &GridSet, free: &[f64]) -> PairField {
    let mut pair = PairField::zeros(grid);
    let n = layout.per_field();
    for i in 1..layout.nx - 1 {
        for j in 1..layout.nz - 2 {
            for k in 0..layout.na {
                let s = layout.slot(i, j, k);
                let m = layout.field_index(i, j, k);
                pair.p.values[m] = free[s];
                pair.q.values[m] = free[n + s];
            }
        }
    }
    pair
}

/// Average of the x₁- and z-direction linear interpolants of g₁ (for p) and
/// g₂ (for q) between opposite faces. Not yet projected onto the constraints.
pub fn initial_guess(data: &BoundaryDataSet) -> Result<PairField> {
    let grid = &data.grid;
    let (nx, nz, na) = (grid.nx(), grid.nz(), grid.na());
    let (x_lo, x_hi) = (grid.x1.start, grid.x1.end());
    let (z_lo, z_hi) = (grid.z.start, grid.z.end());
    let pos = |i: usize, j: usize| {
        data.node_position(i, j)
            .ok_or_else(|| Error::BoundaryMismatch(format!("({i}, {j}) is not a boundary node")))
    };
    let mut pair = PairField::zeros(grid);
    for i in 0..nx {
        for j in 0..nz {
            let (x1, z) = grid.point(i, j);
            let tx = (x1 - x_lo) / (x_hi - x_lo);
            let tz = (z - z_lo) / (z_hi - z_lo);
            let (left, right) = (pos(0, j)?, pos(nx - 1, j)?);
            let (bottom, top) = (pos(i, 0)?, pos(i, nz - 1)?);
            for k in 0..na {
                let interp = |g: &[f64]| {
                    0.5 * ((1.0 - tx) * g[left * na + k] + tx * g[right * na + k])
                        + 0.5 * ((1.0 - tz) * g[bottom * na + k] + tz * g[top * na + k])
                };
                let m = grid.index(i, j, k);
                pair.p.values[m] = interp(&data.g1);
                pair.q.values[m] = interp(&data.g2);
            }
        }
    }
    Ok(pair)
}

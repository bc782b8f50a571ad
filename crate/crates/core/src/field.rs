//! Sampled fields on a [`GridSet`].

use crate::error::{Error, Result};
use crate::geometry::{GridSet, Region};

/// A function of (x, α) sampled at every node of a grid, α fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct RadianceField {
    pub nx: usize,
    pub nz: usize,
    pub na: usize,
    pub region: Region,
    pub values: Vec<f64>,
}

impl RadianceField {
    pub fn zeros(grid: &GridSet) -> Self {
        Self::filled(grid, 0.0)
    }

    pub fn filled(grid: &GridSet, value: f64) -> Self {
        Self {
            nx: grid.nx(),
            nz: grid.nz(),
            na: grid.na(),
            region: grid.region,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: &GridSet, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.nx() {
            for j in 0..grid.nz() {
                for k in 0..grid.na() {
                    out.values[grid.index(i, j, k)] = f(i, j, k);
                }
            }
        }
        out
    }

    pub fn from_values(grid: &GridSet, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        Ok(Self {
            nx: grid.nx(),
            nz: grid.nz(),
            na: grid.na(),
            region: grid.region,
            values,
        })
    }

    pub fn matches(&self, grid: &GridSet) -> bool {
        self.nx == grid.nx() && self.nz == grid.nz() && self.na == grid.na()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.nz + j) * self.na + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let idx = self.index(i, j, k);
        self.values[idx] = v;
    }

    /// The α-slice at spatial node (i, j).
    #[inline]
    pub fn angles(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.nz + j) * self.na;
        &self.values[start..start + self.na]
    }

    pub fn max_abs_diff(&self, other: &RadianceField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Restriction to the Ω-subgrid `target` (a coarsening of this grid's Ω window).
    pub fn restrict(&self, grid: &GridSet, target: &GridSet) -> Result<RadianceField> {
        let (oi, si) = target.x1.embedding_in(&grid.x1)?;
        let (oj, sj) = target.z.embedding_in(&grid.z)?;
        let (ok, sk) = target.alpha.embedding_in(&grid.alpha)?;
        Ok(RadianceField::from_fn(target, |i, j, k| {
            self.get(oi + si * i, oj + sj * j, ok + sk * k)
        }))
    }
}

/// A function of x only, laid out with [`GridSet::spatial_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialField {
    pub nx: usize,
    pub nz: usize,
    pub values: Vec<f64>,
}

impl SpatialField {
    pub fn zeros(grid: &GridSet) -> Self {
        Self {
            nx: grid.nx(),
            nz: grid.nz(),
            values: vec![0.0; grid.spatial_len()],
        }
    }

    pub fn from_fn(grid: &GridSet, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.nx() {
            for j in 0..grid.nz() {
                out.values[grid.spatial_index(i, j)] = f(i, j);
            }
        }
        out
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nz + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.nz + j] = v;
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

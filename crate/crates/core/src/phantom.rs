//! Ground-truth media: constant scattering on Ω and letter-shaped absorbing
//! inclusions.
//!
//! Letter strokes are defined in coordinates centred on Ω,
//! `(X, Y) = (x₁, z − (a + b)/2)`, inside the box `[−0.35, 0.35] × [−0.3, 0.3]`
//! with stroke width 0.1. [`STROKES`] is the single table of shapes.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::SpatialField;
use crate::geometry::GridSet;

/// Background scattering coefficient on closure(Ω).
pub const MU_S_BACKGROUND: f64 = 5.0;

const EDGE_TOL: f64 = 1e-9;

/// Stroke primitive in Ω-centred coordinates.
#[derive(Debug, Clone, Copy)]
pub enum Stroke {
    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
    /// Points within `half_width` of the segment `from`–`to`.
    Bar {
        from: (f64, f64),
        to: (f64, f64),
        half_width: f64,
    },
    /// Annulus sector, angles in degrees measured from +X counter-clockwise.
    Arc {
        center: (f64, f64),
        r_inner: f64,
        r_outer: f64,
        from_deg: f64,
        to_deg: f64,
    },
}

impl Stroke {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Stroke::Rect { x0, x1, y0, y1 } => {
                x >= x0 - EDGE_TOL && x <= x1 + EDGE_TOL && y >= y0 - EDGE_TOL && y <= y1 + EDGE_TOL
            }
            Stroke::Bar {
                from,
                to,
                half_width,
            } => {
                let (dx, dy) = (to.0 - from.0, to.1 - from.1);
                let len2 = dx * dx + dy * dy;
                let t = (((x - from.0) * dx + (y - from.1) * dy) / len2).clamp(0.0, 1.0);
                let (px, py) = (from.0 + t * dx, from.1 + t * dy);
                (x - px).hypot(y - py) <= half_width + EDGE_TOL
            }
            Stroke::Arc {
                center,
                r_inner,
                r_outer,
                from_deg,
                to_deg,
            } => {
                let (dx, dy) = (x - center.0, y - center.1);
                let r = dx.hypot(dy);
                if r < r_inner - EDGE_TOL || r > r_outer + EDGE_TOL {
                    return false;
                }
                let mut ang = dy.atan2(dx).to_degrees();
                while ang < from_deg {
                    ang += 360.0;
                }
                ang <= to_deg + 1e-7
            }
        }
    }
}

/// Stroke table for every letter.
pub const STROKES: &[(&str, &[Stroke])] = &[
    (
        "A",
        &[
            Stroke::Bar {
                from: (-0.30, -0.30),
                to: (0.0, 0.25),
                half_width: 0.05,
            },
            Stroke::Bar {
                from: (0.30, -0.30),
                to: (0.0, 0.25),
                half_width: 0.05,
            },
            Stroke::Rect {
                x0: -0.175,
                x1: 0.175,
                y0: -0.10,
                y1: 0.0,
            },
        ],
    ),
    (
        "OMEGA",
        &[
            Stroke::Arc {
                center: (0.0, 0.03),
                r_inner: 0.17,
                r_outer: 0.27,
                from_deg: -60.0,
                to_deg: 240.0,
            },
            Stroke::Rect {
                x0: -0.30,
                x1: -0.08,
                y0: -0.30,
                y1: -0.19,
            },
            Stroke::Rect {
                x0: 0.08,
                x1: 0.30,
                y0: -0.30,
                y1: -0.19,
            },
        ],
    ),
    (
        "SZ",
        &[
            // S
            Stroke::Rect {
                x0: -0.35,
                x1: -0.05,
                y0: 0.20,
                y1: 0.30,
            },
            Stroke::Rect {
                x0: -0.35,
                x1: -0.25,
                y0: -0.05,
                y1: 0.30,
            },
            Stroke::Rect {
                x0: -0.35,
                x1: -0.05,
                y0: -0.05,
                y1: 0.05,
            },
            Stroke::Rect {
                x0: -0.15,
                x1: -0.05,
                y0: -0.30,
                y1: 0.05,
            },
            Stroke::Rect {
                x0: -0.35,
                x1: -0.05,
                y0: -0.30,
                y1: -0.20,
            },
            // Z
            Stroke::Rect {
                x0: 0.05,
                x1: 0.35,
                y0: 0.20,
                y1: 0.30,
            },
            Stroke::Bar {
                from: (0.30, 0.25),
                to: (0.10, -0.25),
                half_width: 0.05,
            },
            Stroke::Rect {
                x0: 0.05,
                x1: 0.35,
                y0: -0.30,
                y1: -0.20,
            },
        ],
    ),
];

/// An inclusion shape, queried in Ω-centred coordinates.
pub trait Inclusion: Send + Sync {
    fn name(&self) -> &str;
    fn contains(&self, x: f64, y: f64) -> bool;
}

/// A letter built from a slice of [`STROKES`].
pub struct Letter {
    name: &'static str,
    strokes: &'static [Stroke],
}

impl Inclusion for Letter {
    fn name(&self) -> &str {
        self.name
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        self.strokes.iter().any(|s| s.contains(x, y))
    }
}

/// Inclusion shapes selectable by name.
pub struct InclusionRegistry {
    shapes: BTreeMap<String, Box<dyn Inclusion>>,
}

impl InclusionRegistry {
    pub fn empty() -> Self {
        Self {
            shapes: BTreeMap::new(),
        }
    }

    /// The letters 'A', 'Ω' (`OMEGA`) and 'SZ'.
    pub fn with_letters() -> Self {
        let mut reg = Self::empty();
        for &(name, strokes) in STROKES {
            reg.register(Box::new(Letter { name, strokes }));
        }
        reg
    }

    pub fn register(&mut self, shape: Box<dyn Inclusion>) {
        self.shapes.insert(shape.name().to_ascii_uppercase(), shape);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Inclusion> {
        self.shapes
            .get(&name.to_ascii_uppercase())
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownName {
                kind: "letter",
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<String> {
        self.shapes.keys().cloned().collect()
    }
}

/// Boolean spatial mask of a named letter on the spatial nodes of `grid`.
pub fn letter_mask(letter: &str, grid: &GridSet) -> Result<Vec<bool>> {
    let registry = InclusionRegistry::with_letters();
    Ok(shape_mask(registry.get(letter)?, grid))
}

pub fn shape_mask(shape: &dyn Inclusion, grid: &GridSet) -> Vec<bool> {
    let geom = &grid.geometry;
    let zc = 0.5 * (geom.z_low + geom.z_high);
    let mut mask = vec![false; grid.spatial_len()];
    for i in 0..grid.nx() {
        for j in 0..grid.nz() {
            let (x, z) = grid.point(i, j);
            if grid.in_omega(i, j) && shape.contains(x, z - zc) {
                mask[grid.spatial_index(i, j)] = true;
            }
        }
    }
    mask
}

/// Ground-truth medium on the spatial nodes of a grid.
#[derive(Debug, Clone)]
pub struct Phantom {
    pub mu_a: SpatialField,
    pub mu_s: SpatialField,
    pub attenuation: SpatialField,
    pub mask: Vec<bool>,
    pub c_a: f64,
    /// Scattering coefficient on closure(Ω).
    pub background: f64,
}

impl Phantom {
    /// μ_s = 5 on closure(Ω), μ_a = c_a on `mask`.
    pub fn from_mask(grid: &GridSet, mask: Vec<bool>, c_a: f64) -> Self {
        Self::with_background(grid, mask, c_a, MU_S_BACKGROUND)
    }

    /// μ_s = `background` on closure(Ω), μ_a = c_a on `mask`.
    pub fn with_background(grid: &GridSet, mask: Vec<bool>, c_a: f64, background: f64) -> Self {
        let mu_s = SpatialField::from_fn(grid, |i, j| {
            if grid.in_omega(i, j) {
                background
            } else {
                0.0
            }
        });
        let mu_a = SpatialField::from_fn(grid, |i, j| {
            if mask[grid.spatial_index(i, j)] {
                c_a
            } else {
                0.0
            }
        });
        let attenuation = SpatialField {
            nx: mu_a.nx,
            nz: mu_a.nz,
            values: mu_a.values.iter().zip(&mu_s.values).map(|(a, s)| a + s).collect(),
        };
        Self {
            mu_a,
            mu_s,
            attenuation,
            mask,
            c_a,
            background,
        }
    }

    /// Scattering background without an inclusion.
    pub fn background(grid: &GridSet) -> Self {
        Self::from_mask(grid, vec![false; grid.spatial_len()], 0.0)
    }

    /// Replace the scattering coefficient with zero everywhere.
    pub fn without_scattering(mut self) -> Self {
        self.mu_s.values.iter_mut().for_each(|v| *v = 0.0);
        self.attenuation.values = self.mu_a.values.clone();
        self
    }

    pub fn true_contrast(&self) -> f64 {
        1.0 + self.c_a / self.background
    }
}

/// Phantom with a letter-shaped inclusion of amplitude `c_a`.
pub fn make_phantom(letter: &str, c_a: f64, grid: &GridSet) -> Result<Phantom> {
    if !(c_a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "inclusion amplitude must be positive, got {c_a}"
        )));
    }
    let mask = letter_mask(letter, grid)?;
    Ok(Phantom::from_mask(grid, mask, c_a))
}

/// Inclusion/background contrast 1 + c_a/μ_s.
pub fn true_contrast(c_a: f64) -> f64 {
    1.0 + c_a / MU_S_BACKGROUND
}

/// Number of 4-connected components of a spatial mask.
pub fn component_count(mask: &[bool], grid: &GridSet) -> usize {
    let mut seen = vec![false; mask.len()];
    let mut count = 0;
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(idx) = stack.pop() {
            let (i, j) = (idx / grid.nz(), idx % grid.nz());
            let mut push = |ii: usize, jj: usize| {
                let n = grid.spatial_index(ii, jj);
                if mask[n] && !seen[n] {
                    seen[n] = true;
                    stack.push(n);
                }
            };
            if i > 0 {
                push(i - 1, j);
            }
            if i + 1 < grid.nx() {
                push(i + 1, j);
            }
            if j > 0 {
                push(i, j - 1);
            }
            if j + 1 < grid.nz() {
                push(i, j + 1);
            }
        }
    }
    count
}

/// Centroid (x₁, z) of the true nodes of a mask.
pub fn mask_centroid(mask: &[bool], grid: &GridSet) -> Option<(f64, f64)> {
    let mut sum = (0.0, 0.0);
    let mut n = 0usize;
    for i in 0..grid.nx() {
        for j in 0..grid.nz() {
            if mask[grid.spatial_index(i, j)] {
                let (x, z) = grid.point(i, j);
                sum.0 += x;
                sum.1 += z;
                n += 1;
            }
        }
    }
    (n > 0).then(|| (sum.0 / n as f64, sum.1 / n as f64))
}

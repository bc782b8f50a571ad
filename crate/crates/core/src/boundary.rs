//! Boundary measurements g = u|∂Ω and the derived boundary functions
//! g₁ = ln g, g₂ = g_α/g, g₃ = ∂_z ln u|∂₂Ω and g₄ = ∂_α g₃.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::RadianceField;
use crate::geometry::{derivative_1d, direction_vector, GridSet, Region};
use crate::kernel::{mat_vec, KernelModel};
use crate::rng::{stream_rng, Stream};

/// Side of Ω a boundary node belongs to. Corners belong to the z-faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    /// z = a (∂₁Ω).
    Bottom,
    /// z = b (∂₂Ω), where the Neumann data live.
    Top,
    /// x₁ = −B.
    Left,
    /// x₁ = B.
    Right,
}

impl Face {
    pub fn tag(&self) -> &'static str {
        match self {
            Face::Bottom => "bottom",
            Face::Top => "top",
            Face::Left => "left",
            Face::Right => "right",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Face> {
        match tag {
            "bottom" => Some(Face::Bottom),
            "top" => Some(Face::Top),
            "left" => Some(Face::Left),
            "right" => Some(Face::Right),
            _ => None,
        }
    }
}

/// A node of ∂Ω, indexed on an Ω-grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryNode {
    pub face: Face,
    pub i: usize,
    pub j: usize,
}

/// Boundary nodes of an Ω-grid in canonical order: bottom and top rows
/// (left to right, corners included), then the left and right columns
/// (bottom to top, corners excluded).
pub fn boundary_nodes(grid: &GridSet) -> Vec<BoundaryNode> {
    let (nx, nz) = (grid.nx(), grid.nz());
    let mut nodes = Vec::with_capacity(2 * nx + 2 * (nz - 2));
    for i in 0..nx {
        nodes.push(BoundaryNode { face: Face::Bottom, i, j: 0 });
    }
    for i in 0..nx {
        nodes.push(BoundaryNode { face: Face::Top, i, j: nz - 1 });
    }
    for j in 1..nz - 1 {
        nodes.push(BoundaryNode { face: Face::Left, i: 0, j });
    }
    for j in 1..nz - 1 {
        nodes.push(BoundaryNode { face: Face::Right, i: nx - 1, j });
    }
    nodes
}

/// Sign convention for the Neumann datum g₃ on ∂₂Ω.
///
/// With `r = (μ_s/g) ∫ G g dβ` and `t = ν₁ ∂_{x₁} ln g`:
///
/// * `Consistent`: `g₃ = (−t − a + r)/ν_n`, with the attenuation on ∂₂Ω taken
///   as the known μ_s there (μ_a vanishes at ∂Ω). This is the transport
///   equation for ln u evaluated on the top face.
/// * `ScatterOnly`: `g₃ = (−t + r)/ν_n`, the same with a|∂₂Ω = 0.
/// * `Printed`: `g₃ = −(t + r)/ν_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeumannConvention {
    #[default]
    Consistent,
    ScatterOnly,
    Printed,
}

impl NeumannConvention {
    pub fn name(&self) -> &'static str {
        match self {
            NeumannConvention::Consistent => "consistent",
            NeumannConvention::ScatterOnly => "scatter_only",
            NeumannConvention::Printed => "printed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "consistent" => Ok(Self::Consistent),
            "scatter_only" => Ok(Self::ScatterOnly),
            "printed" => Ok(Self::Printed),
            _ => Err(Error::UnknownName {
                kind: "neumann convention",
                name: s.to_string(),
                known: "consistent, printed, scatter_only".into(),
            }),
        }
    }
}

/// Samples of a function on ∂Ω × α, node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub grid: GridSet,
    pub nodes: Vec<BoundaryNode>,
    pub values: Vec<f64>,
}

impl BoundaryTrace {
    pub fn na(&self) -> usize {
        self.grid.na()
    }

    pub fn slice(&self, node: usize) -> &[f64] {
        let na = self.na();
        &self.values[node * na..(node + 1) * na]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> BoundaryTrace {
        BoundaryTrace {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    /// Indices of top-face nodes ordered by i.
    pub fn top_nodes(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.face == Face::Top)
            .map(|(m, _)| m)
            .collect()
    }
}

/// g(x, α) = u(x, α) on ∂Ω, as a trace on the Ω-window of `grid`.
pub fn extract_boundary(u: &RadianceField, grid: &GridSet) -> Result<BoundaryTrace> {
    if !u.matches(grid) {
        return Err(Error::GridMismatch("field does not live on the given grid".into()));
    }
    let omega = grid.omega_subgrid(1)?;
    let nodes = boundary_nodes(&omega);
    let na = grid.na();
    let mut values = Vec::with_capacity(nodes.len() * na);
    for n in &nodes {
        let (i, j) = (n.i + grid.omega_i.0, n.j + grid.omega_j.0);
        values.extend_from_slice(u.angles(i, j));
    }
    Ok(BoundaryTrace {
        grid: omega,
        nodes,
        values,
    })
}

/// Multiplicative noise g·(1 + δζ), ζ ~ U[0, 1] independently per sample.
pub fn add_noise(g: &BoundaryTrace, delta: f64, seed: u64) -> Result<BoundaryTrace> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise level must be nonnegative, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(g.clone());
    }
    let mut rng = stream_rng(seed, Stream::Noise);
    Ok(BoundaryTrace {
        values: g
            .values
            .iter()
            .map(|&v| v * (1.0 + delta * rng.random::<f64>()))
            .collect(),
        ..g.clone()
    })
}

/// g₁ = ln g.
pub fn log_data(g: &BoundaryTrace) -> Result<BoundaryTrace> {
    let na = g.na();
    for (m, &v) in g.values.iter().enumerate() {
        if !(v > 0.0) {
            let node = g.nodes[m / na];
            return Err(Error::NonPositiveData {
                node: format!("{} (i={}, j={}, k={})", node.face.tag(), node.i, node.j, m % na),
                value: v,
            });
        }
    }
    Ok(g.map(f64::ln))
}

/// Finite-difference α-derivative of every node's α-slice.
pub fn alpha_difference(trace: &BoundaryTrace) -> BoundaryTrace {
    let na = trace.na();
    let h = trace.grid.alpha.step;
    let mut out = trace.clone();
    for (src, dst) in trace.values.chunks(na).zip(out.values.chunks_mut(na)) {
        derivative_1d(src, h, dst);
    }
    out
}

/// g₂ = g_α / g.
pub fn alpha_derivative(g: &BoundaryTrace) -> Result<BoundaryTrace> {
    if g.na() < 3 {
        return Err(Error::InvalidParameter("need at least three α nodes".into()));
    }
    let mut d = alpha_difference(g);
    d.values.iter_mut().zip(&g.values).for_each(|(dv, gv)| *dv /= gv);
    Ok(d)
}

/// g₃ on the top face, ordered by i, α fastest.
///
/// `mu_s_top[i]` is the scattering coefficient at the i-th top node.
pub fn neumann_g3(
    g: &BoundaryTrace,
    g1: &BoundaryTrace,
    mu_s_top: &[f64],
    kernel: &KernelModel,
    convention: NeumannConvention,
) -> Result<Vec<f64>> {
    let top = g.top_nodes();
    let nx = top.len();
    if mu_s_top.len() != nx {
        return Err(Error::LengthMismatch {
            expected: nx,
            actual: mu_s_top.len(),
        });
    }
    let grid = &g.grid;
    let na = grid.na();
    let (gw, _) = kernel.weighted_matrices(&grid.alpha);
    let b = grid.z.end();
    let mut out = vec![0.0; nx * na];
    let mut line = vec![0.0; nx];
    let mut dline = vec![0.0; nx];
    let mut scatter = vec![0.0; na];
    // ∂_{x₁} ln g along the top face, for every α.
    let mut w_x = vec![0.0; nx * na];
    for k in 0..na {
        for (m, &node) in top.iter().enumerate() {
            line[m] = g1.slice(node)[k];
        }
        derivative_1d(&line, grid.x1.step, &mut dline);
        for m in 0..nx {
            w_x[m * na + k] = dline[m];
        }
    }
    for (m, &node) in top.iter().enumerate() {
        let x1 = grid.x1.node(g.nodes[node].i);
        let gs = g.slice(node);
        mat_vec(&gw, gs, &mut scatter);
        for k in 0..na {
            let nu = direction_vector(x1, b, grid.alpha.node(k))?;
            let t = nu[0] * w_x[m * na + k];
            let r = mu_s_top[m] * scatter[k] / gs[k];
            let bracket = match convention {
                NeumannConvention::Consistent => -t - mu_s_top[m] + r,
                NeumannConvention::ScatterOnly => -t + r,
                NeumannConvention::Printed => -(t + r),
            };
            out[m * na + k] = bracket / nu[1];
        }
    }
    Ok(out)
}

/// g₄ = ∂_α g₃ with the same stencil as [`alpha_derivative`].
pub fn neumann_g4(g3: &[f64], alpha_step: f64, na: usize) -> Result<Vec<f64>> {
    if na < 3 {
        return Err(Error::InvalidParameter("need at least three α nodes".into()));
    }
    let mut out = vec![0.0; g3.len()];
    for (src, dst) in g3.chunks(na).zip(out.chunks_mut(na)) {
        derivative_1d(src, alpha_step, dst);
    }
    Ok(out)
}

/// Everything the inverse solver reads from the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDataSet {
    /// Ω-grid the data are sampled on.
    pub grid: GridSet,
    pub nodes: Vec<BoundaryNode>,
    pub g: Vec<f64>,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    /// Top-face samples ordered by i, α fastest.
    pub g3: Vec<f64>,
    pub g4: Vec<f64>,
    pub noise_delta: f64,
    pub seed: u64,
}

/// Settings for [`BoundaryDataSet::synthesize`].
#[derive(Debug, Clone, Copy)]
pub struct DataSettings {
    pub delta: f64,
    pub seed: u64,
    pub convention: NeumannConvention,
}

impl BoundaryDataSet {
    /// Noise, log transform and differentiation on the resolution of `g`.
    pub fn synthesize(
        g_clean: &BoundaryTrace,
        mu_s_top: &[f64],
        kernel: &KernelModel,
        settings: DataSettings,
    ) -> Result<Self> {
        let g = add_noise(g_clean, settings.delta, settings.seed)?;
        let g1 = log_data(&g)?;
        let g2 = alpha_derivative(&g)?;
        let g3 = neumann_g3(&g, &g1, mu_s_top, kernel, settings.convention)?;
        let g4 = neumann_g4(&g3, g.grid.alpha.step, g.na())?;
        Ok(Self {
            grid: g.grid.clone(),
            nodes: g.nodes.clone(),
            g: g.values,
            g1: g1.values,
            g2: g2.values,
            g3,
            g4,
            noise_delta: settings.delta,
            seed: settings.seed,
        })
    }

    /// Noise-free data of a known pair: `f(x₁, z, α) = [p, q, ∂_z p, ∂_z q]`,
    /// with g = e^p. Used for manufactured solutions.
    pub fn from_exact(grid: &GridSet, f: impl Fn(f64, f64, f64) -> [f64; 4]) -> Self {
        let nodes = boundary_nodes(grid);
        let na = grid.na();
        let (mut g, mut g1, mut g2) = (Vec::new(), Vec::new(), Vec::new());
        for n in &nodes {
            let (x, z) = grid.point(n.i, n.j);
            for k in 0..na {
                let v = f(x, z, grid.alpha.node(k));
                g.push(v[0].exp());
                g1.push(v[0]);
                g2.push(v[1]);
            }
        }
        let (mut g3, mut g4) = (Vec::new(), Vec::new());
        for i in 0..grid.nx() {
            let (x, z) = grid.point(i, grid.nz() - 1);
            for k in 0..na {
                let v = f(x, z, grid.alpha.node(k));
                g3.push(v[2]);
                g4.push(v[3]);
            }
        }
        Self {
            grid: grid.clone(),
            nodes,
            g,
            g1,
            g2,
            g3,
            g4,
            noise_delta: 0.0,
            seed: 0,
        }
    }

    pub fn na(&self) -> usize {
        self.grid.na()
    }

    /// Position of (i, j) in `nodes`, if it is a boundary node.
    pub fn node_position(&self, i: usize, j: usize) -> Option<usize> {
        let (nx, nz) = (self.grid.nx(), self.grid.nz());
        if j == 0 {
            Some(i)
        } else if j == nz - 1 {
            Some(nx + i)
        } else if i == 0 {
            Some(2 * nx + j - 1)
        } else if i == nx - 1 {
            Some(2 * nx + (nz - 2) + j - 1)
        } else {
            None
        }
    }

    /// Restriction to a coarser Ω-grid whose nodes are a subset of ours.
    pub fn restrict(&self, target: &GridSet) -> Result<Self> {
        if target.region != Region::Omega {
            return Err(Error::GridMismatch("boundary data live on Ω-grids".into()));
        }
        let (oi, si) = target.x1.embedding_in(&self.grid.x1)?;
        let (oj, sj) = target.z.embedding_in(&self.grid.z)?;
        let (ok, sk) = target.alpha.embedding_in(&self.grid.alpha)?;
        if oi != 0 || oj != 0 || oi + si * target.x1.intervals != self.grid.x1.intervals
            || oj + sj * target.z.intervals != self.grid.z.intervals
        {
            return Err(Error::GridMismatch("target grid must span the same Ω".into()));
        }
        let na_src = self.na();
        let nodes = boundary_nodes(target);
        let pick = |src: &[f64], pos: usize| -> Vec<f64> {
            (0..target.na()).map(|k| src[pos * na_src + ok + sk * k]).collect()
        };
        let mut g = Vec::new();
        let mut g1 = Vec::new();
        let mut g2 = Vec::new();
        for n in &nodes {
            let pos = self
                .node_position(oi + si * n.i, oj + sj * n.j)
                .expect("coarse boundary node lies on the fine boundary");
            g.extend(pick(&self.g, pos));
            g1.extend(pick(&self.g1, pos));
            g2.extend(pick(&self.g2, pos));
        }
        let mut g3 = Vec::new();
        let mut g4 = Vec::new();
        for i in 0..target.nx() {
            g3.extend(pick(&self.g3, oi + si * i));
            g4.extend(pick(&self.g4, oi + si * i));
        }
        Ok(Self {
            grid: target.clone(),
            nodes,
            g,
            g1,
            g2,
            g3,
            g4,
            noise_delta: self.noise_delta,
            seed: self.seed,
        })
    }

    pub fn is_finite(&self) -> bool {
        [&self.g, &self.g1, &self.g2, &self.g3, &self.g4]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

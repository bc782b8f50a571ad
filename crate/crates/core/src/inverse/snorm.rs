//! Discrete S-norm: values, first differences and second differences in
//! (x₁, z), integrated over Ω × (−d, d).

use super::PairField;
use crate::field::RadianceField;
use crate::geometry::GridSet;

/// One squared difference quotient `Σ_base w·(Σ_taps c·f(base + offset))²`.
struct Term {
    taps: Vec<(usize, usize, f64)>,
    span: (usize, usize),
    weight: Vec<f64>,
}

fn terms(grid: &GridSet) -> Vec<Term> {
    let (nx, nz) = (grid.nx(), grid.nz());
    let (hx, hz) = (grid.x1.step, grid.z.step);
    let wx = grid.x1.trapezoid_weights();
    let wz = grid.z.trapezoid_weights();
    let build = |span: (usize, usize), taps: Vec<(usize, usize, f64)>, w: &dyn Fn(usize, usize) -> f64| {
        let mut weight = Vec::with_capacity((nx - span.0) * (nz - span.1));
        for i in 0..nx - span.0 {
            for j in 0..nz - span.1 {
                weight.push(w(i, j));
            }
        }
        Term { taps, span, weight }
    };
    vec![
        build((0, 0), vec![(0, 0, 1.0)], &|i, j| wx[i] * wz[j]),
        build((1, 0), vec![(0, 0, -1.0 / hx), (1, 0, 1.0 / hx)], &|_, j| hx * wz[j]),
        build((0, 1), vec![(0, 0, -1.0 / hz), (0, 1, 1.0 / hz)], &|i, _| wx[i] * hz),
        build(
            (2, 0),
            vec![(0, 0, 1.0 / (hx * hx)), (1, 0, -2.0 / (hx * hx)), (2, 0, 1.0 / (hx * hx))],
            &|_, j| hx * wz[j],
        ),
        build(
            (0, 2),
            vec![(0, 0, 1.0 / (hz * hz)), (0, 1, -2.0 / (hz * hz)), (0, 2, 1.0 / (hz * hz))],
            &|i, _| wx[i] * hz,
        ),
        build(
            (1, 1),
            vec![
                (0, 0, 1.0 / (hx * hz)),
                (1, 0, -1.0 / (hx * hz)),
                (0, 1, -1.0 / (hx * hz)),
                (1, 1, 1.0 / (hx * hz)),
            ],
            &|_, _| 2.0 * hx * hz,
        ),
    ]
}

fn field_norm_sq(grid: &GridSet, terms: &[Term], f: &RadianceField, mut grad: Option<&mut RadianceField>) -> f64 {
    let (nx, nz, na) = (grid.nx(), grid.nz(), grid.na());
    let wa = grid.alpha.trapezoid_weights();
    let mut d = vec![0.0; na];
    let mut total = 0.0;
    for term in terms {
        let bz = nz - term.span.1;
        for i in 0..nx - term.span.0 {
            for j in 0..bz {
                let w = term.weight[i * bz + j];
                d.iter_mut().for_each(|v| *v = 0.0);
                for &(di, dj, c) in &term.taps {
                    let off = ((i + di) * nz + j + dj) * na;
                    for (dk, fk) in d.iter_mut().zip(&f.values[off..off + na]) {
                        *dk += c * fk;
                    }
                }
                total += w * d.iter().zip(&wa).map(|(dk, ak)| ak * dk * dk).sum::<f64>();
                if let Some(g) = grad.as_deref_mut() {
                    for &(di, dj, c) in &term.taps {
                        let off = ((i + di) * nz + j + dj) * na;
                        let s = 2.0 * w * c;
                        for ((gk, dk), ak) in g.values[off..off + na].iter_mut().zip(&d).zip(&wa) {
                            *gk += s * ak * dk;
                        }
                    }
                }
            }
        }
    }
    total
}

/// The S-norm quadratic form for one grid, with its stencils prebuilt.
#[derive(Clone)]
pub(crate) struct SNorm {
    grid: GridSet,
    terms: std::sync::Arc<Vec<Term>>,
}

impl std::fmt::Debug for SNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SNorm").field("terms", &self.terms.len()).finish()
    }
}

impl SNorm {
    pub(crate) fn new(grid: &GridSet) -> Self {
        Self {
            grid: grid.clone(),
            terms: std::sync::Arc::new(terms(grid)),
        }
    }

    pub(crate) fn value(&self, pair: &PairField) -> f64 {
        field_norm_sq(&self.grid, &self.terms, &pair.p, None) + field_norm_sq(&self.grid, &self.terms, &pair.q, None)
    }

    /// `grad += scale · ∇‖pair‖²_S`.
    pub(crate) fn accumulate_gradient(&self, pair: &PairField, scale: f64, grad: &mut PairField) {
        let mut g = PairField::zeros(&self.grid);
        field_norm_sq(&self.grid, &self.terms, &pair.p, Some(&mut g.p));
        field_norm_sq(&self.grid, &self.terms, &pair.q, Some(&mut g.q));
        *grad = grad.add_scaled(scale, &g);
    }
}

/// ‖(p, q)‖²_S.
pub fn s_norm_sq(grid: &GridSet, pair: &PairField) -> f64 {
    let t = terms(grid);
    field_norm_sq(grid, &t, &pair.p, None) + field_norm_sq(grid, &t, &pair.q, None)
}

/// Nodal gradient of [`s_norm_sq`].
pub fn s_norm_gradient(grid: &GridSet, pair: &PairField) -> PairField {
    let t = terms(grid);
    let mut g = PairField::zeros(grid);
    field_norm_sq(grid, &t, &pair.p, Some(&mut g.p));
    field_norm_sq(grid, &t, &pair.q, Some(&mut g.q));
    g
}

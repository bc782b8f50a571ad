//! CSV fields and `key=value` reports.
//!
//! Every CSV starts with one `# key=value key=value ...` metadata line
//! followed by a headered table. Floats are written with 17 significant
//! digits so that reading them back is bit-exact.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::boundary::{boundary_nodes, BoundaryDataSet, Face};
use crate::carleman::{CarlemanReport, ConvexityReport};
use crate::error::{Error, Result};
use crate::field::{RadianceField, SpatialField};
use crate::geometry::{Geometry, GridSet};
use crate::inverse::{IterationRecord, PairField};
use crate::recovery::Reconstruction;
use crate::verify::GradientSample;

/// Ordered metadata carried by every output file.
pub type Meta = BTreeMap<String, String>;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Grid description as metadata entries.
pub fn grid_meta(grid: &GridSet) -> Meta {
    let g = &grid.geometry;
    let mut m = Meta::new();
    for (k, v) in [
        ("half_width", g.half_width),
        ("z_low", g.z_low),
        ("z_high", g.z_high),
        ("half_span", g.source_half_span),
        ("h_x1", grid.x1.step),
        ("h_z", grid.z.step),
        ("h_alpha", grid.alpha.step),
    ] {
        m.insert(k.into(), fmt_f64(v));
    }
    m
}

fn meta_f64(meta: &Meta, key: &str, path: &Path) -> Result<f64> {
    meta.get(key)
        .ok_or_else(|| format_err(path, format!("metadata lacks `{key}`")))?
        .parse()
        .map_err(|_| format_err(path, format!("metadata `{key}` is not a number")))
}

/// Ω-grid rebuilt from metadata written by [`grid_meta`].
pub fn grid_from_meta(meta: &Meta, path: &Path) -> Result<GridSet> {
    let geometry = Geometry::new(
        meta_f64(meta, "half_width", path)?,
        meta_f64(meta, "z_low", path)?,
        meta_f64(meta, "z_high", path)?,
        meta_f64(meta, "half_span", path)?,
    )?;
    GridSet::omega(
        geometry,
        meta_f64(meta, "h_x1", path)?,
        meta_f64(meta, "h_z", path)?,
        meta_f64(meta, "h_alpha", path)?,
    )
}

fn write_table(path: &Path, meta: &Meta, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "#")?;
    for (k, v) in meta {
        write!(out, " {k}={v}")?;
    }
    writeln!(out)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Metadata line and the records of a table, header checked.
fn read_table(path: &Path, header: &[&str]) -> Result<(Meta, Vec<csv::StringRecord>)> {
    let file = File::open(path).map_err(|e| format_err(path, e.to_string()))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let line = first
        .trim_end()
        .strip_prefix('#')
        .ok_or_else(|| format_err(path, "missing `#` metadata line"))?;
    let mut meta = Meta::new();
    for tok in line.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| format_err(path, format!("bad metadata token `{tok}`")))?;
        meta.insert(k.to_string(), v.to_string());
    }
    let mut r = csv::Reader::from_reader(reader);
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(format_err(path, format!("expected columns {header:?}, found {found:?}")));
    }
    let records = r.records().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((meta, records))
}

fn parse_cell(rec: &csv::StringRecord, col: usize, path: &Path) -> Result<f64> {
    let s = rec.get(col).unwrap_or("");
    s.parse()
        .map_err(|_| format_err(path, format!("`{s}` is not a number")))
}

/// Boundary data: one row per (node, α); g3 and g4 blank off the top face.
pub fn write_boundary(path: &Path, data: &BoundaryDataSet, extra: &Meta) -> Result<()> {
    let mut meta = grid_meta(&data.grid);
    meta.insert("delta".into(), fmt_f64(data.noise_delta));
    meta.insert("seed".into(), data.seed.to_string());
    meta.extend(extra.clone());
    let na = data.na();
    let grid = &data.grid;
    let rows = data.nodes.iter().enumerate().flat_map(move |(n, node)| {
        (0..na).map(move |k| {
            let (x, z) = grid.point(node.i, node.j);
            let idx = n * na + k;
            let (g3, g4) = if node.face == Face::Top {
                let t = node.i * na + k;
                (fmt_f64(data.g3[t]), fmt_f64(data.g4[t]))
            } else {
                (String::new(), String::new())
            };
            vec![
                node.face.tag().to_string(),
                fmt_f64(x),
                fmt_f64(z),
                fmt_f64(grid.alpha.node(k)),
                fmt_f64(data.g[idx]),
                fmt_f64(data.g1[idx]),
                fmt_f64(data.g2[idx]),
                g3,
                g4,
            ]
        })
    });
    write_table(path, &meta, &BOUNDARY_COLUMNS, rows)
}

const BOUNDARY_COLUMNS: [&str; 9] = ["face", "x1", "z", "alpha", "g", "g1", "g2", "g3", "g4"];

/// Inverse of [`write_boundary`], with the row layout checked against the grid.
pub fn read_boundary(path: &Path) -> Result<(BoundaryDataSet, Meta)> {
    let (meta, records) = read_table(path, &BOUNDARY_COLUMNS)?;
    let grid = grid_from_meta(&meta, path)?;
    let nodes = boundary_nodes(&grid);
    let na = grid.na();
    if records.len() != nodes.len() * na {
        return Err(Error::GridMismatch(format!(
            "{}: {} rows for a grid with {} boundary samples",
            path.display(),
            records.len(),
            nodes.len() * na
        )));
    }
    let n_top = grid.nx() * na;
    let mut data = BoundaryDataSet {
        grid: grid.clone(),
        nodes: nodes.clone(),
        g: Vec::with_capacity(records.len()),
        g1: Vec::with_capacity(records.len()),
        g2: Vec::with_capacity(records.len()),
        g3: vec![f64::NAN; n_top],
        g4: vec![f64::NAN; n_top],
        noise_delta: meta_f64(&meta, "delta", path)?,
        seed: meta
            .get("seed")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format_err(path, "metadata lacks an integer `seed`"))?,
    };
    let tol = 1e-9;
    for (row, rec) in records.iter().enumerate() {
        let node = nodes[row / na];
        let k = row % na;
        let face = Face::from_tag(rec.get(0).unwrap_or(""));
        let (x, z) = grid.point(node.i, node.j);
        let coords = [parse_cell(rec, 1, path)?, parse_cell(rec, 2, path)?, parse_cell(rec, 3, path)?];
        if face != Some(node.face)
            || (coords[0] - x).abs() > tol
            || (coords[1] - z).abs() > tol
            || (coords[2] - grid.alpha.node(k)).abs() > tol
        {
            return Err(Error::GridMismatch(format!(
                "{}: row {} does not match the grid in the metadata",
                path.display(),
                row + 2
            )));
        }
        data.g.push(parse_cell(rec, 4, path)?);
        data.g1.push(parse_cell(rec, 5, path)?);
        data.g2.push(parse_cell(rec, 6, path)?);
        if node.face == Face::Top {
            data.g3[node.i * na + k] = parse_cell(rec, 7, path)?;
            data.g4[node.i * na + k] = parse_cell(rec, 8, path)?;
        }
    }
    Ok((data, meta))
}

/// Radiance on every node: columns x1, z, alpha, u.
pub fn write_radiance(path: &Path, grid: &GridSet, u: &RadianceField, meta: &Meta) -> Result<()> {
    let mut m = grid_meta(grid);
    m.extend(meta.clone());
    let rows = (0..grid.nx()).flat_map(move |i| {
        (0..grid.nz()).flat_map(move |j| {
            (0..grid.na()).map(move |k| {
                let (x, z) = grid.point(i, j);
                vec![fmt_f64(x), fmt_f64(z), fmt_f64(grid.alpha.node(k)), fmt_f64(u.get(i, j, k))]
            })
        })
    });
    write_table(path, &m, &["x1", "z", "alpha", "u"], rows)
}

/// Minimizing pair: columns x1, z, alpha, p, q.
pub fn write_pair(path: &Path, grid: &GridSet, pair: &PairField, meta: &Meta) -> Result<()> {
    let mut m = grid_meta(grid);
    m.extend(meta.clone());
    let rows = (0..grid.nx()).flat_map(move |i| {
        (0..grid.nz()).flat_map(move |j| {
            (0..grid.na()).map(move |k| {
                let (x, z) = grid.point(i, j);
                vec![
                    fmt_f64(x),
                    fmt_f64(z),
                    fmt_f64(grid.alpha.node(k)),
                    fmt_f64(pair.p.get(i, j, k)),
                    fmt_f64(pair.q.get(i, j, k)),
                ]
            })
        })
    });
    write_table(path, &m, &["x1", "z", "alpha", "p", "q"], rows)
}

const RECONSTRUCTION_COLUMNS: [&str; 4] = ["x1", "z", "a_comp", "mu_a_comp"];

/// Recovered coefficients: columns x1, z, a_comp, mu_a_comp.
pub fn write_reconstruction(path: &Path, grid: &GridSet, rec: &Reconstruction, meta: &Meta) -> Result<()> {
    let mut m = grid_meta(grid);
    m.insert("contrast".into(), fmt_f64(rec.contrast));
    m.extend(meta.clone());
    let rows = (0..grid.nx()).flat_map(move |i| {
        (0..grid.nz()).map(move |j| {
            let (x, z) = grid.point(i, j);
            vec![
                fmt_f64(x),
                fmt_f64(z),
                fmt_f64(rec.a_comp.get(i, j)),
                fmt_f64(rec.mu_a_comp.get(i, j)),
            ]
        })
    });
    write_table(path, &m, &RECONSTRUCTION_COLUMNS, rows)
}

/// Reconstructed (a_comp, μ_a,comp) fields with their grid and metadata.
pub fn read_reconstruction(path: &Path) -> Result<(GridSet, SpatialField, SpatialField, Meta)> {
    let (meta, records) = read_table(path, &RECONSTRUCTION_COLUMNS)?;
    let grid = grid_from_meta(&meta, path)?;
    if records.len() != grid.spatial_len() {
        return Err(Error::GridMismatch(format!(
            "{}: {} rows for {} spatial nodes",
            path.display(),
            records.len(),
            grid.spatial_len()
        )));
    }
    let mut a = SpatialField::zeros(&grid);
    let mut mu = SpatialField::zeros(&grid);
    for (row, rec) in records.iter().enumerate() {
        let (i, j) = (row / grid.nz(), row % grid.nz());
        let (x, z) = grid.point(i, j);
        if (parse_cell(rec, 0, path)? - x).abs() > 1e-9 || (parse_cell(rec, 1, path)? - z).abs() > 1e-9 {
            return Err(Error::GridMismatch(format!(
                "{}: row {} does not match the grid in the metadata",
                path.display(),
                row + 2
            )));
        }
        a.set(i, j, parse_cell(rec, 2, path)?);
        mu.set(i, j, parse_cell(rec, 3, path)?);
    }
    Ok((grid, a, mu, meta))
}

/// Spatial field on a grid: columns x1, z, value.
pub fn write_spatial(path: &Path, grid: &GridSet, name: &str, field: &SpatialField, meta: &Meta) -> Result<()> {
    let mut m = grid_meta(grid);
    m.extend(meta.clone());
    let rows = (0..grid.nx()).flat_map(move |i| {
        (0..grid.nz()).map(move |j| {
            let (x, z) = grid.point(i, j);
            vec![fmt_f64(x), fmt_f64(z), fmt_f64(field.get(i, j))]
        })
    });
    write_table(path, &m, &["x1", "z", name], rows)
}

/// Descent history: columns iter, J, grad_norm, step.
pub fn write_iterations(path: &Path, history: &[IterationRecord], meta: &Meta) -> Result<()> {
    let rows = history.iter().map(|r| {
        vec![r.iter.to_string(), fmt_f64(r.value), fmt_f64(r.grad_norm), fmt_f64(r.step)]
    });
    write_table(path, meta, &["iter", "J", "grad_norm", "step"], rows)
}

/// Convexity gaps: columns sample, gap, lower_bound, holds.
pub fn write_convexity(path: &Path, report: &ConvexityReport, meta: &Meta) -> Result<()> {
    let rows = report.gaps.iter().enumerate().map(|(n, &(gap, bound))| {
        vec![n.to_string(), fmt_f64(gap), fmt_f64(bound), (gap >= bound).to_string()]
    });
    write_table(path, meta, &["sample", "gap", "lower_bound", "holds"], rows)
}

/// Per-sample Carleman quadratures: columns sample, lambda, lhs, interior, boundary, ratio.
pub fn write_carleman(path: &Path, report: &CarlemanReport, meta: &Meta) -> Result<()> {
    let rows = report.samples.iter().map(|s| {
        vec![
            s.index.to_string(),
            fmt_f64(s.lambda),
            fmt_f64(s.sides.lhs),
            fmt_f64(s.sides.interior),
            fmt_f64(s.sides.boundary),
            s.sides.ratio().map(fmt_f64).unwrap_or_default(),
        ]
    });
    write_table(
        path,
        meta,
        &["sample", "lambda", "lhs", "interior", "boundary", "ratio"],
        rows,
    )
}

/// Directional-derivative samples: columns direction, finite_difference, analytic, rel_error.
pub fn write_gradient_samples(path: &Path, samples: &[GradientSample], meta: &Meta) -> Result<()> {
    let rows = samples.iter().enumerate().map(|(n, s)| {
        vec![n.to_string(), fmt_f64(s.finite_difference), fmt_f64(s.analytic), fmt_f64(s.rel_error)]
    });
    write_table(path, meta, &["direction", "finite_difference", "analytic", "rel_error"], rows)
}

/// `key=value` lines in the given order.
pub fn write_kv(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for (k, v) in entries {
        writeln!(out, "{k}={v}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_kv(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut m = BTreeMap::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format_err(path, format!("expected key=value, got `{line}`")))?;
        m.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(m)
}

//! End-to-end commands: data synthesis, inversion, verification and scoring.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::boundary::{extract_boundary, BoundaryDataSet, DataSettings};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::field::SpatialField;
use crate::forward::{ForwardProblem, ForwardSolverRegistry, SourceModel};
use crate::geometry::GridSet;
use crate::inverse::{minimize, InverseProblem, InversionState};
use crate::io::{self, Meta};
use crate::kernel::KernelModel;
use crate::phantom::{letter_mask, Phantom};
use crate::recovery::{recover_attenuation, score, Metrics, Reconstruction};
use crate::verify::{CheckDetail, CheckOutcome, CheckRegistry, VerifyContext};

pub const BOUNDARY_FILE: &str = "boundary.csv";
pub const FORWARD_MANIFEST: &str = "forward_manifest.txt";
pub const ITERATIONS_FILE: &str = "iterations.csv";
pub const PAIR_FILE: &str = "pair.csv";
pub const RECONSTRUCTION_FILE: &str = "reconstruction.csv";
pub const METRICS_FILE: &str = "metrics.txt";
pub const SCORE_FILE: &str = "score.txt";
pub const VERIFY_FILE: &str = "verify.txt";
pub const CONVEXITY_FILE: &str = "convexity.csv";
pub const CARLEMAN_FILE: &str = "carleman.csv";
pub const GRADIENT_FILE: &str = "gradient.csv";

fn hash_meta(cfg: &RunConfig) -> Meta {
    let mut m = Meta::new();
    m.insert("config_hash".into(), cfg.hash());
    m
}

pub fn kernel(cfg: &RunConfig) -> Result<KernelModel> {
    KernelModel::new(cfg.c_g, cfg.half_span)
}

/// The configured letter phantom on `grid`.
pub fn phantom(cfg: &RunConfig, grid: &GridSet) -> Result<Phantom> {
    if !(cfg.c_a > 0.0) {
        return Err(Error::Config(format!("c_a must be positive, got {}", cfg.c_a)));
    }
    let mask = letter_mask(&cfg.letter, grid)?;
    Ok(Phantom::with_background(grid, mask, cfg.c_a, cfg.mu_s_background))
}

/// Forward solve and data synthesis at step `h` on the strip.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub data: BoundaryDataSet,
    pub iterations: usize,
    pub min_u_omega: f64,
    pub min_u0_omega: f64,
    pub seconds: f64,
}

pub fn synthesize(cfg: &RunConfig, h: f64) -> Result<Synthesis> {
    let start = Instant::now();
    let grid = GridSet::uniform_strip(cfg.geometry()?, h)?;
    let kernel = kernel(cfg)?;
    let problem = ForwardProblem::new(grid.clone(), phantom(cfg, &grid)?, SourceModel::new(cfg.sigma)?, kernel)?;
    let registry = ForwardSolverRegistry::with_defaults(cfg.forward_tol, cfg.forward_max_iters, cfg.direct_unknown_cap);
    let sol = registry.get(&cfg.forward_solver)?.solve(&problem)?;
    let (mut min_u, mut min_u0) = (f64::INFINITY, f64::INFINITY);
    for i in 0..grid.nx() {
        for j in 0..grid.nz() {
            if grid.in_omega(i, j) {
                for k in 0..grid.na() {
                    min_u = min_u.min(sol.u.get(i, j, k));
                    min_u0 = min_u0.min(sol.u0.get(i, j, k));
                }
            }
        }
    }
    let trace = extract_boundary(&sol.u, &grid)?;
    let mu_s_top = vec![cfg.mu_s_background; trace.grid.nx()];
    let data = BoundaryDataSet::synthesize(
        &trace,
        &mu_s_top,
        &kernel,
        DataSettings {
            delta: cfg.delta,
            seed: cfg.seed,
            convention: cfg.neumann_convention,
        },
    )?;
    Ok(Synthesis {
        data,
        iterations: sol.iterations,
        min_u_omega: min_u,
        min_u0_omega: min_u0,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Inverse problem on the Ω-grid of step `h_inverse`, restricted from `data`.
pub fn inverse_problem(cfg: &RunConfig, data: &BoundaryDataSet, h_inverse: f64) -> Result<InverseProblem> {
    let geometry = cfg.geometry()?;
    if data.grid.geometry != geometry {
        return Err(Error::GridMismatch(format!(
            "boundary data geometry {:?} differs from the configured {:?}",
            data.grid.geometry, geometry
        )));
    }
    let ratio = h_inverse / data.grid.x1.step;
    let stride = ratio.round();
    if (ratio - stride).abs() > 1e-9 || stride < 1.0 {
        return Err(Error::GridMismatch(format!(
            "inversion step {h_inverse} is not a multiple of the data step {}",
            data.grid.x1.step
        )));
    }
    let grid = data.grid.omega_subgrid(stride as usize)?;
    let restricted = data.restrict(&grid)?;
    let mu_s = SpatialField::from_fn(&grid, |_, _| cfg.mu_s_background);
    InverseProblem::new(restricted, mu_s, kernel(cfg)?, cfg.inversion())
}

fn manifest_head(cfg: &RunConfig, command: &str) -> Vec<(String, String)> {
    let mut v = vec![
        ("command".to_string(), command.to_string()),
        ("config_hash".to_string(), cfg.hash()),
    ];
    for (k, val) in cfg.entries() {
        v.push((format!("config.{k}"), val));
    }
    v
}

fn out_path(cfg: &RunConfig, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    Ok(cfg.out_dir.join(name))
}

/// Writes the boundary data at forward resolution plus a manifest.
pub fn cmd_forward(cfg: &RunConfig) -> Result<Synthesis> {
    cfg.validate()?;
    let syn = synthesize(cfg, cfg.h_forward)?;
    io::write_boundary(&out_path(cfg, BOUNDARY_FILE)?, &syn.data, &hash_meta(cfg))?;
    let mut m = manifest_head(cfg, "forward");
    m.extend([
        ("forward_iterations".into(), syn.iterations.to_string()),
        ("min_u_omega".into(), io::fmt_f64(syn.min_u_omega)),
        ("min_u0_omega".into(), io::fmt_f64(syn.min_u0_omega)),
        ("min_g".into(), io::fmt_f64(syn.data.g.iter().copied().fold(f64::INFINITY, f64::min))),
        ("files".into(), BOUNDARY_FILE.into()),
    ]);
    io::write_kv(&out_path(cfg, FORWARD_MANIFEST)?, &m)?;
    log::info!(
        "forward: {} iterations, min u on Ω = {:.4e}, {:.1} s",
        syn.iterations,
        syn.min_u_omega,
        syn.seconds
    );
    Ok(syn)
}

/// Outcome of an inversion.
#[derive(Debug, Clone)]
pub struct Inversion {
    pub grid: GridSet,
    pub state: InversionState,
    pub reconstruction: Reconstruction,
    pub metrics: Metrics,
    pub seconds: f64,
}

/// Minimize, recover and score on data already in memory.
pub fn invert(cfg: &RunConfig, data: &BoundaryDataSet) -> Result<Inversion> {
    let start = Instant::now();
    let problem = inverse_problem(cfg, data, cfg.h_inverse)?;
    let state = minimize(&problem)?;
    let grid = problem.grid.clone();
    let a = recover_attenuation(&state.pair.p, &problem.mu_s, &problem.kernel, &grid)?;
    let reconstruction = Reconstruction::with_background(a, &problem.mu_s, cfg.mu_s_background);
    let metrics = score(&reconstruction, &phantom(cfg, &grid)?, &grid)?;
    Ok(Inversion {
        grid,
        state,
        reconstruction,
        metrics,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn metrics_entries(m: &Metrics) -> Vec<(String, String)> {
    vec![
        ("contrast".into(), io::fmt_f64(m.contrast)),
        ("true_contrast".into(), io::fmt_f64(m.true_contrast)),
        ("contrast_error".into(), io::fmt_f64(m.contrast_error)),
        ("l2_rel_error".into(), io::fmt_f64(m.l2_rel_error)),
        ("centroid_offset".into(), io::fmt_f64(m.centroid_offset)),
    ]
}

/// Reads boundary data, inverts and writes log, pair, reconstruction and metrics.
pub fn cmd_invert(cfg: &RunConfig, data_path: &Path) -> Result<Inversion> {
    cfg.validate()?;
    let (data, meta) = io::read_boundary(data_path)?;
    if let Some(h) = meta.get("config_hash") {
        log::info!("boundary data written under config {h}");
    }
    let inv = invert(cfg, &data)?;
    let tag = hash_meta(cfg);
    io::write_iterations(&out_path(cfg, ITERATIONS_FILE)?, &inv.state.history, &tag)?;
    io::write_pair(&out_path(cfg, PAIR_FILE)?, &inv.grid, &inv.state.pair, &tag)?;
    io::write_reconstruction(&out_path(cfg, RECONSTRUCTION_FILE)?, &inv.grid, &inv.reconstruction, &tag)?;
    let mut m = manifest_head(cfg, "invert");
    m.push(("data".into(), data_path.display().to_string()));
    if let Some(h) = meta.get("config_hash") {
        m.push(("data_config_hash".into(), h.clone()));
    }
    m.extend([
        ("stop".into(), inv.state.stop.tag().to_string()),
        ("iterations".into(), inv.state.iter.to_string()),
        ("final_J".into(), io::fmt_f64(inv.state.value)),
        ("final_grad_norm".into(), io::fmt_f64(inv.state.grad_norm)),
        ("grad_norm_kind".into(), cfg.grad_norm.name().into()),
    ]);
    m.extend(metrics_entries(&inv.metrics));
    io::write_kv(&out_path(cfg, METRICS_FILE)?, &m)?;
    log::info!(
        "invert: {} after {} iterations, contrast {:.4} (true {:.4}), {:.1} s",
        inv.state.stop.tag(),
        inv.state.iter,
        inv.metrics.contrast,
        inv.metrics.true_contrast,
        inv.seconds
    );
    Ok(inv)
}

/// Scores a reconstruction file against the configured phantom.
pub fn cmd_score(cfg: &RunConfig, recon_path: &Path) -> Result<Metrics> {
    cfg.validate()?;
    let (grid, a, mu_a, _) = io::read_reconstruction(recon_path)?;
    if grid.geometry != cfg.geometry()? {
        return Err(Error::GridMismatch("reconstruction geometry differs from the config".into()));
    }
    let rec = Reconstruction {
        contrast: crate::recovery::contrast_against(&mu_a, cfg.mu_s_background),
        a_comp: a,
        mu_a_comp: mu_a,
    };
    let metrics = score(&rec, &phantom(cfg, &grid)?, &grid)?;
    let mut m = manifest_head(cfg, "score");
    m.push(("reconstruction".into(), recon_path.display().to_string()));
    m.extend(metrics_entries(&metrics));
    io::write_kv(&out_path(cfg, SCORE_FILE)?, &m)?;
    Ok(metrics)
}

/// Context of the property suite built from the verification settings.
pub fn verify_context(cfg: &RunConfig) -> Result<VerifyContext> {
    let syn = synthesize(cfg, cfg.verify_h_forward)?;
    let problem = inverse_problem(cfg, &syn.data, cfg.verify_h_inverse)?;
    Ok(VerifyContext {
        problem,
        carleman_grid: GridSet::uniform_omega(cfg.geometry()?, cfg.h_inverse)?,
        seed: cfg.seed,
        directions: cfg.verify_directions,
        tau: cfg.verify_tau,
        rel_tol: cfg.verify_rel_tol,
        convexity_pairs: cfg.convexity_pairs,
        convexity_radius: cfg.convexity_radius,
        carleman_samples: cfg.carleman_samples,
        carleman_lambdas: cfg.carleman_lambdas.clone(),
        passes: cfg.smoothing_passes,
    })
}

/// Runs every registered check and writes the reports.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Vec<CheckOutcome>> {
    cfg.validate()?;
    let ctx = verify_context(cfg)?;
    let outcomes = CheckRegistry::with_defaults().run_all(&ctx)?;
    let tag = hash_meta(cfg);
    let mut m = manifest_head(cfg, "verify");
    for o in &outcomes {
        m.push((format!("{}.passed", o.name), o.passed.to_string()));
        for (k, v) in &o.summary {
            m.push((format!("{}.{k}", o.name), v.clone()));
        }
        match &o.detail {
            CheckDetail::Gradient(samples) => {
                io::write_gradient_samples(&out_path(cfg, GRADIENT_FILE)?, samples, &tag)?
            }
            CheckDetail::Convexity(rep) => io::write_convexity(&out_path(cfg, CONVEXITY_FILE)?, rep, &tag)?,
            CheckDetail::Carleman(rep) => io::write_carleman(&out_path(cfg, CARLEMAN_FILE)?, rep, &tag)?,
        }
    }
    m.push(("all_passed".into(), outcomes.iter().all(|o| o.passed).to_string()));
    io::write_kv(&out_path(cfg, VERIFY_FILE)?, &m)?;
    Ok(outcomes)
}

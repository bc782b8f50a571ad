use std::path::Path;

use rte_convex::config::RunConfig;
use rte_convex::io::{read_boundary, read_kv};
use rte_convex::pipeline::{
    cmd_forward, cmd_invert, cmd_score, cmd_verify, BOUNDARY_FILE, CARLEMAN_FILE, CONVEXITY_FILE, GRADIENT_FILE, FORWARD_MANIFEST, ITERATIONS_FILE, METRICS_FILE,
    PAIR_FILE, RECONSTRUCTION_FILE, SCORE_FILE, VERIFY_FILE,
};
use rte_convex::Error;

fn coarse(out: &Path) -> RunConfig {
    RunConfig {
        h_forward: 0.05,
        h_inverse: 0.1,
        out_dir: out.to_path_buf(),
        ..RunConfig::default()
    }
}

fn bytes(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn forward_writes_positive_data_and_a_hashed_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = coarse(dir.path());
    cmd_forward(&cfg).unwrap();
    let (data, meta) = read_boundary(&dir.path().join(BOUNDARY_FILE)).unwrap();
    assert!(data.g.iter().all(|&g| g > 0.0));
    assert!(data.is_finite());
    assert_eq!(meta["config_hash"], cfg.hash());
    let manifest = read_kv(&dir.path().join(FORWARD_MANIFEST)).unwrap();
    assert_eq!(manifest["config_hash"], cfg.hash());
    assert_eq!(manifest["config.h_forward"], "0.05");
}

#[test]
fn noise_free_data_ignore_the_seed_and_noisy_data_are_reproducible() {
    let dirs: Vec<_> = (0..4).map(|_| tempfile::tempdir().unwrap()).collect();
    let run = |d: &Path, delta: f64, seed: u64| {
        let mut cfg = coarse(d);
        cfg.delta = delta;
        cfg.seed = seed;
        cmd_forward(&cfg).unwrap();
        read_boundary(&d.join(BOUNDARY_FILE)).unwrap().0
    };
    let a = run(dirs[0].path(), 0.0, 1);
    let b = run(dirs[1].path(), 0.0, 2);
    assert_eq!(a.g, b.g);
    let c = run(dirs[2].path(), 0.05, 7);
    let d = run(dirs[3].path(), 0.05, 7);
    assert_eq!(bytes(dirs[2].path(), BOUNDARY_FILE), bytes(dirs[3].path(), BOUNDARY_FILE));
    assert_eq!(c, d);
    assert_ne!(c.g, a.g);
}

#[test]
fn invert_and_score_on_a_coarse_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = coarse(dir.path());
    cmd_forward(&cfg).unwrap();
    let data = dir.path().join(BOUNDARY_FILE);
    let inv = cmd_invert(&cfg, &data).unwrap();
    assert!(inv.state.converged());
    assert!(inv.state.grad_norm < cfg.grad_tol);
    for w in inv.state.history.windows(2) {
        assert!(w[1].value <= w[0].value);
    }
    assert!(inv.metrics.contrast.is_finite() && inv.metrics.contrast > 1.0);
    assert!(inv.metrics.l2_rel_error.is_finite() && inv.metrics.centroid_offset.is_finite());
    for f in [ITERATIONS_FILE, PAIR_FILE, RECONSTRUCTION_FILE, METRICS_FILE] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let metrics = read_kv(&dir.path().join(METRICS_FILE)).unwrap();
    assert_eq!(metrics["stop"], "grad_tol");
    assert_eq!(metrics["contrast"].parse::<f64>().unwrap(), inv.metrics.contrast);
    assert_eq!(metrics["true_contrast"].parse::<f64>().unwrap(), 2.0);

    let first: Vec<_> = [ITERATIONS_FILE, PAIR_FILE, RECONSTRUCTION_FILE].iter().map(|f| bytes(dir.path(), f)).collect();
    cmd_invert(&cfg, &data).unwrap();
    let second: Vec<_> = [ITERATIONS_FILE, PAIR_FILE, RECONSTRUCTION_FILE].iter().map(|f| bytes(dir.path(), f)).collect();
    assert_eq!(first, second);

    let scored = cmd_score(&cfg, &dir.path().join(RECONSTRUCTION_FILE)).unwrap();
    assert_eq!(scored, inv.metrics);

    let tag = format!("config_hash={}", cfg.hash());
    for f in [BOUNDARY_FILE, FORWARD_MANIFEST, ITERATIONS_FILE, PAIR_FILE, RECONSTRUCTION_FILE, METRICS_FILE, SCORE_FILE] {
        let text = std::fs::read_to_string(dir.path().join(f)).unwrap();
        assert!(text.contains(&tag), "{f} lacks the config hash");
    }
}

#[test]
fn invert_rejects_data_on_an_incompatible_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = coarse(dir.path());
    cmd_forward(&cfg).unwrap();
    let data = dir.path().join(BOUNDARY_FILE);
    let mut other = cfg.clone();
    other.h_forward = 0.025;
    other.h_inverse = 0.075;
    assert!(matches!(cmd_invert(&other, &data), Err(Error::GridMismatch(_))));
    let mut shifted = cfg.clone();
    shifted.z_high = 3.0;
    assert!(matches!(cmd_invert(&shifted, &data), Err(Error::GridMismatch(_))));
    assert!(cmd_invert(&cfg, &dir.path().join("missing.csv")).is_err());
}

#[test]
fn verify_reports_every_check_and_is_reproducible() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut reports = Vec::new();
    for d in &dirs {
        let mut cfg = coarse(d.path());
        cfg.convexity_pairs = 10;
        cfg.carleman_samples = 10;
        let outcomes = cmd_verify(&cfg).unwrap();
        let names: Vec<_> = outcomes.iter().map(|o| o.name).collect();
        assert_eq!(names, vec!["carleman", "convexity", "gradient"]);
        let by_name = |n: &str| outcomes.iter().find(|o| o.name == n).unwrap();
        assert!(by_name("gradient").passed);
        assert!(by_name("convexity").passed);
        let tag = format!("config_hash={}", cfg.hash());
        for f in [VERIFY_FILE, CONVEXITY_FILE, CARLEMAN_FILE, GRADIENT_FILE] {
            let text = std::fs::read_to_string(d.path().join(f)).unwrap();
            assert!(text.contains(&tag), "{f} lacks the config hash");
        }
        reports.push(bytes(d.path(), VERIFY_FILE));
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn verify_without_regularization_reports_a_zero_bound() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = coarse(dir.path());
    cfg.gamma = 0.0;
    cfg.convexity_pairs = 5;
    cfg.carleman_samples = 2;
    let outcomes = cmd_verify(&cfg).unwrap();
    let conv = outcomes.iter().find(|o| o.name == "convexity").unwrap();
    match &conv.detail {
        rte_convex::verify::CheckDetail::Convexity(rep) => {
            assert_eq!(rep.gaps.len(), 5);
            assert!(rep.gaps.iter().all(|&(_, bound)| bound == 0.0));
        }
        other => panic!("unexpected detail {other:?}"),
    }
}

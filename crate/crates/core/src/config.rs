//! Flat `key = value` run configuration with defaults and a content hash.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::boundary::NeumannConvention;
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::inverse::{GradientNorm, InversionConfig};

/// Every knob of a run. Defaults reproduce the paper's numerical section.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub half_width: f64,
    pub z_low: f64,
    pub z_high: f64,
    pub half_span: f64,
    pub sigma: f64,
    pub c_g: f64,
    pub mu_s_background: f64,
    pub letter: String,
    pub c_a: f64,
    pub h_forward: f64,
    pub h_inverse: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub neumann_convention: NeumannConvention,
    pub forward_solver: String,
    pub forward_tol: f64,
    pub forward_max_iters: usize,
    pub direct_unknown_cap: usize,
    pub rho_init: f64,
    pub grad_tol: f64,
    pub grad_norm: GradientNorm,
    pub max_iters: usize,
    pub s_norm_radius: Option<f64>,
    pub verify_h_forward: f64,
    pub verify_h_inverse: f64,
    pub verify_directions: usize,
    pub verify_tau: f64,
    pub verify_rel_tol: f64,
    pub convexity_pairs: usize,
    pub convexity_radius: f64,
    pub carleman_samples: usize,
    pub carleman_lambdas: Vec<f64>,
    pub smoothing_passes: usize,
    /// Not part of the hash.
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            half_width: 0.5,
            z_low: 1.0,
            z_high: 2.0,
            half_span: 0.5,
            sigma: 0.05,
            c_g: 0.5,
            mu_s_background: 5.0,
            letter: "A".into(),
            c_a: 5.0,
            h_forward: 1.0 / 40.0,
            h_inverse: 1.0 / 20.0,
            lambda: 5.0,
            gamma: 0.001,
            epsilon: 0.01,
            delta: 0.0,
            seed: 1,
            neumann_convention: NeumannConvention::Consistent,
            forward_solver: "fixed_point".into(),
            forward_tol: 1e-10,
            forward_max_iters: 200,
            direct_unknown_cap: 10_000,
            rho_init: 1.0,
            grad_tol: 1e-2,
            grad_norm: GradientNorm::Density,
            max_iters: 200_000,
            s_norm_radius: None,
            verify_h_forward: 0.05,
            verify_h_inverse: 0.1,
            verify_directions: 20,
            verify_tau: 1e-5,
            verify_rel_tol: 1e-5,
            convexity_pairs: 100,
            convexity_radius: 10.0,
            carleman_samples: 50,
            carleman_lambdas: vec![2.0, 5.0, 10.0],
            smoothing_passes: 5,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::Config(format!("`{key}` expects a number, got `{v}`")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| Error::Config(format!("`{key}` expects a nonnegative integer, got `{v}`")))
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Defaults overridden by a `key = value` file (`#` starts a comment).
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::default();
        cfg.apply_text(&text).map_err(|e| match e {
            Error::Config(reason) => Error::Format {
                path: path.to_path_buf(),
                reason,
            },
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Set one field from its textual value.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "half_width" => self.half_width = parse_f64(key, v)?,
            "z_low" => self.z_low = parse_f64(key, v)?,
            "z_high" => self.z_high = parse_f64(key, v)?,
            "half_span" => self.half_span = parse_f64(key, v)?,
            "sigma" => self.sigma = parse_f64(key, v)?,
            "c_g" => self.c_g = parse_f64(key, v)?,
            "mu_s_background" => self.mu_s_background = parse_f64(key, v)?,
            "letter" => self.letter = v.to_string(),
            "c_a" => self.c_a = parse_f64(key, v)?,
            "h_forward" => self.h_forward = parse_f64(key, v)?,
            "h_inverse" => self.h_inverse = parse_f64(key, v)?,
            "lambda" => self.lambda = parse_f64(key, v)?,
            "gamma" => self.gamma = parse_f64(key, v)?,
            "epsilon" => self.epsilon = parse_f64(key, v)?,
            "delta" => self.delta = parse_f64(key, v)?,
            "seed" => {
                self.seed = v
                    .parse()
                    .map_err(|_| Error::Config(format!("`seed` expects an unsigned integer, got `{v}`")))?
            }
            "neumann_convention" => self.neumann_convention = NeumannConvention::parse(v)?,
            "forward_solver" => self.forward_solver = v.to_string(),
            "forward_tol" => self.forward_tol = parse_f64(key, v)?,
            "forward_max_iters" => self.forward_max_iters = parse_usize(key, v)?,
            "direct_unknown_cap" => self.direct_unknown_cap = parse_usize(key, v)?,
            "rho_init" => self.rho_init = parse_f64(key, v)?,
            "grad_tol" => self.grad_tol = parse_f64(key, v)?,
            "grad_norm" => self.grad_norm = GradientNorm::parse(v)?,
            "max_iters" => self.max_iters = parse_usize(key, v)?,
            "s_norm_radius" => {
                self.s_norm_radius = match v {
                    "" | "none" => None,
                    _ => Some(parse_f64(key, v)?),
                }
            }
            "verify_h_forward" => self.verify_h_forward = parse_f64(key, v)?,
            "verify_h_inverse" => self.verify_h_inverse = parse_f64(key, v)?,
            "verify_directions" => self.verify_directions = parse_usize(key, v)?,
            "verify_tau" => self.verify_tau = parse_f64(key, v)?,
            "verify_rel_tol" => self.verify_rel_tol = parse_f64(key, v)?,
            "convexity_pairs" => self.convexity_pairs = parse_usize(key, v)?,
            "convexity_radius" => self.convexity_radius = parse_f64(key, v)?,
            "carleman_samples" => self.carleman_samples = parse_usize(key, v)?,
            "carleman_lambdas" => {
                self.carleman_lambdas = v
                    .split(',')
                    .map(|s| parse_f64(key, s.trim()))
                    .collect::<Result<Vec<_>>>()?
            }
            "smoothing_passes" => self.smoothing_passes = parse_usize(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Sorted `key = value` pairs of every hashed field.
    pub fn entries(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        let f = |x: f64| format!("{x:?}");
        m.insert("half_width", f(self.half_width));
        m.insert("z_low", f(self.z_low));
        m.insert("z_high", f(self.z_high));
        m.insert("half_span", f(self.half_span));
        m.insert("sigma", f(self.sigma));
        m.insert("c_g", f(self.c_g));
        m.insert("mu_s_background", f(self.mu_s_background));
        m.insert("letter", self.letter.clone());
        m.insert("c_a", f(self.c_a));
        m.insert("h_forward", f(self.h_forward));
        m.insert("h_inverse", f(self.h_inverse));
        m.insert("lambda", f(self.lambda));
        m.insert("gamma", f(self.gamma));
        m.insert("epsilon", f(self.epsilon));
        m.insert("delta", f(self.delta));
        m.insert("seed", self.seed.to_string());
        m.insert("neumann_convention", self.neumann_convention.name().into());
        m.insert("forward_solver", self.forward_solver.clone());
        m.insert("forward_tol", f(self.forward_tol));
        m.insert("forward_max_iters", self.forward_max_iters.to_string());
        m.insert("direct_unknown_cap", self.direct_unknown_cap.to_string());
        m.insert("rho_init", f(self.rho_init));
        m.insert("grad_tol", f(self.grad_tol));
        m.insert("grad_norm", self.grad_norm.name().into());
        m.insert("max_iters", self.max_iters.to_string());
        m.insert(
            "s_norm_radius",
            self.s_norm_radius.map(f).unwrap_or_else(|| "none".into()),
        );
        m.insert("verify_h_forward", f(self.verify_h_forward));
        m.insert("verify_h_inverse", f(self.verify_h_inverse));
        m.insert("verify_directions", self.verify_directions.to_string());
        m.insert("verify_tau", f(self.verify_tau));
        m.insert("verify_rel_tol", f(self.verify_rel_tol));
        m.insert("convexity_pairs", self.convexity_pairs.to_string());
        m.insert("convexity_radius", f(self.convexity_radius));
        m.insert("carleman_samples", self.carleman_samples.to_string());
        m.insert("carleman_lambdas", fmt_list(&self.carleman_lambdas));
        m.insert("smoothing_passes", self.smoothing_passes.to_string());
        m
    }

    /// Canonical text: one `key = value` line per hashed field, sorted.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// SHA-256 of [`Self::canonical`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::new(self.half_width, self.z_low, self.z_high, self.half_span)
    }

    pub fn inversion(&self) -> InversionConfig {
        InversionConfig {
            lambda: self.lambda,
            gamma: self.gamma,
            epsilon: self.epsilon,
            rho_init: self.rho_init,
            grad_tol: self.grad_tol,
            grad_norm: self.grad_norm,
            max_iters: self.max_iters,
            s_norm_radius: self.s_norm_radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry()?;
        let positive = [
            ("sigma", self.sigma),
            ("mu_s_background", self.mu_s_background),
            ("c_a", self.c_a),
            ("h_forward", self.h_forward),
            ("h_inverse", self.h_inverse),
            ("forward_tol", self.forward_tol),
            ("verify_h_forward", self.verify_h_forward),
            ("verify_h_inverse", self.verify_h_inverse),
            ("verify_tau", self.verify_tau),
            ("verify_rel_tol", self.verify_rel_tol),
            ("convexity_radius", self.convexity_radius),
        ];
        for (k, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Config(format!("`{k}` must be positive, got {v}")));
            }
        }
        if !(self.delta >= 0.0) {
            return Err(Error::Config(format!("`delta` must be nonnegative, got {}", self.delta)));
        }
        let stride = self.h_inverse / self.h_forward;
        if (stride - stride.round()).abs() > 1e-9 || stride.round() < 1.0 {
            return Err(Error::Config(format!(
                "h_inverse = {} must be an integer multiple of h_forward = {}",
                self.h_inverse, self.h_forward
            )));
        }
        self.inversion()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// h_inverse / h_forward as an integer.
    pub fn stride(&self) -> usize {
        (self.h_inverse / self.h_forward).round() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_numerical_section() {
        let c = RunConfig::default();
        assert_eq!((c.half_width, c.half_span, c.z_low, c.z_high), (0.5, 0.5, 1.0, 2.0));
        assert_eq!((c.sigma, c.c_g, c.mu_s_background), (0.05, 0.5, 5.0));
        assert_eq!((c.h_forward, c.h_inverse), (0.025, 0.05));
        assert_eq!((c.lambda, c.gamma, c.epsilon), (5.0, 0.001, 0.01));
        c.validate().unwrap();
        assert_eq!(c.stride(), 2);
    }

    #[test]
    fn text_round_trip_and_hash() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\nlambda = 3.5\nletter = SZ # trailing\ncarleman_lambdas = 2, 4\n")
            .unwrap();
        assert_eq!(c.lambda, 3.5);
        assert_eq!(c.letter, "SZ");
        assert_eq!(c.carleman_lambdas, vec![2.0, 4.0]);
        let mut d = RunConfig::default();
        d.apply_text(&c.canonical()).unwrap();
        assert_eq!(c.hash(), d.hash());
        assert_ne!(c.hash(), RunConfig::default().hash());
        d.out_dir = PathBuf::from("elsewhere");
        assert_eq!(c.hash(), d.hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = RunConfig::default();
        assert!(c.set("nonsense", "1").is_err());
        assert!(c.set("lambda", "abc").is_err());
        assert!(c.apply_text("lambda 3").is_err());
        c.h_inverse = 0.03;
        assert!(c.validate().is_err());
    }
}

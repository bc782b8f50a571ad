//! `rte`: synthesize boundary data, invert them, score and verify.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rte_convex::config::RunConfig;
use rte_convex::pipeline::{self, BOUNDARY_FILE, RECONSTRUCTION_FILE};
use rte_convex::Error;

#[derive(Parser, Debug)]
#[command(name = "rte", version, about = "Convexification solver for the RTE attenuation coefficient")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the forward problem and write boundary data.
    Forward,
    /// Minimize the weighted functional and recover the attenuation.
    Invert {
        /// Boundary data CSV (default: <out>/boundary.csv).
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Run the gradient, convexity and Carleman property checks.
    Verify,
    /// Score a reconstruction against the configured phantom.
    Score {
        /// Reconstruction CSV (default: <out>/reconstruction.csv).
        #[arg(long)]
        reconstruction: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Overrides {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed of every random stream
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Multiplicative noise level.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Inclusion shape: A, OMEGA or SZ
    #[arg(long, global = true)]
    letter: Option<String>,
    /// Inclusion amplitude.
    #[arg(long = "ca", global = true)]
    c_a: Option<f64>,
    /// Carleman weight parameter
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Regularization weight
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Viscosity coefficient
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Any other config key, as `key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Overrides {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects key=value, got `{kv}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.delta {
            cfg.delta = v;
        }
        if let Some(v) = &self.letter {
            cfg.letter = v.clone();
        }
        if let Some(v) = self.c_a {
            cfg.c_a = v;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = &self.out {
            cfg.out_dir = v.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_PROPERTY: u8 = 3;

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(if err.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE })
}

fn run(cli: Cli) -> ExitCode {
    let cfg = match cli.overrides.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Some(n) = cli.overrides.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match cli.command {
        Command::Forward => match pipeline::cmd_forward(&cfg) {
            Ok(s) => {
                println!(
                    "wrote {} (forward iterations {}, min u on closure(Ω) {:.6e})",
                    cfg.out_dir.join(BOUNDARY_FILE).display(),
                    s.iterations,
                    s.min_u_omega
                );
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Invert { data } => {
            let data = data.unwrap_or_else(|| cfg.out_dir.join(BOUNDARY_FILE));
            match pipeline::cmd_invert(&cfg, &data) {
                Ok(inv) => {
                    println!(
                        "stop={} iterations={} J={:.6e} grad_norm={:.3e} contrast={:.4} true_contrast={:.4} centroid_offset={:.4}",
                        inv.state.stop.tag(),
                        inv.state.iter,
                        inv.state.value,
                        inv.state.grad_norm,
                        inv.metrics.contrast,
                        inv.metrics.true_contrast,
                        inv.metrics.centroid_offset
                    );
                    if inv.state.converged() {
                        ExitCode::SUCCESS
                    } else {
                        eprintln!("error: gradient tolerance not reached within max_iters");
                        ExitCode::from(EXIT_NUMERICAL)
                    }
                }
                Err(e) => fail(&e),
            }
        }
        Command::Verify => match pipeline::cmd_verify(&cfg) {
            Ok(outcomes) => {
                for o in &outcomes {
                    let details: Vec<String> = o.summary.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    println!(
                        "{}: {} ({})",
                        o.name,
                        if o.passed { "PASS" } else { "FAIL" },
                        details.join(", ")
                    );
                }
                if outcomes.iter().all(|o| o.passed) {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_PROPERTY)
                }
            }
            Err(e) => fail(&e),
        },
        Command::Score { reconstruction } => {
            let path = reconstruction.unwrap_or_else(|| cfg.out_dir.join(RECONSTRUCTION_FILE));
            match pipeline::cmd_score(&cfg, &path) {
                Ok(m) => {
                    println!(
                        "contrast={:.4} true_contrast={:.4} l2_rel_error={:.4} centroid_offset={:.4}",
                        m.contrast, m.true_contrast, m.l2_rel_error, m.centroid_offset
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    run(cli)
}

//! Command line front end: seeded optimizer experiments, trajectory
//! similarity metrics, forward kinematics, demonstration generation and
//! spectral denoising.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use nalgebra::DMatrix;

use stodi_core::denoise::{apply_filter, FilterKind, FilterSpec};
use stodi_core::experiment::{generate_demo, run_comparison, DemoShape, ExperimentConfig};
use stodi_core::io::{read_trajectory, write_cartesian, TrajectoryFile};
use stodi_core::kinematics::{fk_point, KinematicChain, NUM_JOINTS};
use stodi_core::metrics::{dft2, dtw, mseps, mses, zero_pad_pair, DtwConfig};
use stodi_core::trajectory::CartesianPath;
use stodi_core::MetricKind;

#[derive(Parser)]
#[command(
    name = "stodi",
    about = "Stochastic trajectory optimization for demonstration imitation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded optimizer comparison experiment from a config file.
    Optimize {
        /// Experiment config (TOML; see configs/ for examples).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's seed list with a single seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the noise standard-deviation multiplier.
        #[arg(long)]
        noise_scale: Option<f64>,
        /// Override the update step scale (1.0 is the plain update rule).
        #[arg(long)]
        step_scale: Option<f64>,
        /// Override the kinematic chain file (default: built-in 7-DOF chain).
        #[arg(long)]
        chain: Option<PathBuf>,
        /// Override the output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Compute a similarity metric between two Cartesian path files.
    Metric {
        /// dtw, mses or mseps.
        #[arg(long)]
        kind: String,
        a: PathBuf,
        b: PathBuf,
    },
    /// Map a joint trajectory file through forward kinematics.
    Fk {
        /// Kinematic chain file (default: built-in 7-DOF chain).
        #[arg(long)]
        chain: Option<PathBuf>,
        input: PathBuf,
        output: PathBuf,
    },
    /// Generate a demonstration path file.
    Demo {
        /// line, circle, semicircle or m-shape.
        #[arg(long)]
        shape: String,
        /// Number of points.
        #[arg(long, default_value_t = 128)]
        n: usize,
        /// Shape size: line length, circle/semicircle radius, M width (m).
        #[arg(long, default_value_t = 0.5)]
        size: f64,
        /// Per-axis Gaussian noise standard deviation (m).
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shape center, comma separated.
        #[arg(long, value_parser = parse_center, default_value = "0.45,0.0,0.45")]
        center: [f64; 3],
        output: PathBuf,
    },
    /// Denoise a Cartesian path file with a spectral filter.
    Denoise {
        /// scale, gain or backstitch.
        #[arg(long)]
        filter: String,
        /// Gain threshold.
        #[arg(long, default_value_t = 20.0)]
        gamma: f64,
        /// Skip re-anchoring the output to the input endpoints.
        #[arg(long)]
        no_anchor: bool,
        input: PathBuf,
        output: PathBuf,
    },
}

fn parse_center(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot = p
            .trim()
            .parse()
            .map_err(|_| format!("non-numeric component {p:?}"))?;
    }
    Ok(out)
}

fn load_cartesian(path: &PathBuf) -> Result<CartesianPath> {
    Ok(read_trajectory(path)
        .with_context(|| format!("reading {}", path.display()))?
        .into_cartesian()?)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Optimize {
            config,
            seed,
            noise_scale,
            step_scale,
            chain,
            output_dir,
        } => {
            let mut cfg = ExperimentConfig::from_toml_file(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            if let Some(s) = seed {
                cfg.seeds = vec![s];
            }
            if let Some(ns) = noise_scale {
                cfg.optimizer.noise_scale = ns;
            }
            if let Some(ss) = step_scale {
                cfg.optimizer.step_scale = ss;
            }
            if let Some(p) = chain {
                cfg.chain = KinematicChain::from_toml_file(&p)?;
            }
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            let report = run_comparison(&cfg)?;
            println!(
                "{:<6} {:<6} {:>6} {:>14} {:>14} {:>7} {:>9}",
                "algo", "metric", "seed", "initial", "final", "iters", "to-110%"
            );
            for row in &report.rows {
                println!(
                    "{:<6} {:<6} {:>6} {:>14.6e} {:>14.6e} {:>7} {:>9}",
                    row.algo.name(),
                    row.metric.name(),
                    row.seed,
                    row.initial_cost,
                    row.final_cost,
                    row.iterations,
                    row.iters_to_threshold
                );
            }
            println!("summary written to {}", report.summary_file.display());
        }
        Command::Metric { kind, a, b } => {
            let kind = MetricKind::parse(&kind)?;
            let pa = load_cartesian(&a)?;
            let pb = load_cartesian(&b)?;
            let value = match kind {
                MetricKind::Dtw => dtw(&pa, &pb, &DtwConfig::default())?,
                MetricKind::Mses => {
                    let (x, y) = zero_pad_pair(&pa, &pb);
                    mses(&dft2(&x), &dft2(&y))?
                }
                MetricKind::Mseps => {
                    let (x, y) = zero_pad_pair(&pa, &pb);
                    mseps(&dft2(&x), &dft2(&y))?
                }
            };
            println!("{value}");
        }
        Command::Fk {
            chain,
            input,
            output,
        } => {
            let chain = match chain {
                Some(p) => KinematicChain::from_toml_file(&p)?,
                None => KinematicChain::panda(),
            };
            let joints = match read_trajectory(&input)? {
                TrajectoryFile::Joint(m) => m,
                TrajectoryFile::Cartesian(_) => {
                    bail!(
                        "{} holds a cartesian path, not joint values",
                        input.display()
                    )
                }
            };
            if joints.ncols() != NUM_JOINTS {
                bail!(
                    "expected {NUM_JOINTS} joint columns, found {}",
                    joints.ncols()
                );
            }
            let mut out = DMatrix::zeros(joints.nrows(), 3);
            for i in 0..joints.nrows() {
                let mut q = [0.0; NUM_JOINTS];
                for (j, slot) in q.iter_mut().enumerate() {
                    *slot = joints[(i, j)];
                }
                if !chain.within_limits(&q) {
                    eprintln!(
                        "warning: waypoint {i} (line {}) is outside the joint limits",
                        i + 2
                    );
                }
                let p = fk_point(&chain, &q);
                out[(i, 0)] = p.x;
                out[(i, 1)] = p.y;
                out[(i, 2)] = p.z;
            }
            write_cartesian(&output, &CartesianPath::new(out)?)?;
        }
        Command::Demo {
            shape,
            n,
            size,
            noise,
            seed,
            center,
            output,
        } => {
            let shape = DemoShape::parse(&shape)?;
            let path = generate_demo(shape, n, size, center, noise, seed)?;
            write_cartesian(&output, &path)?;
        }
        Command::Denoise {
            filter,
            gamma,
            no_anchor,
            input,
            output,
        } => {
            let spec = FilterSpec {
                kind: FilterKind::parse(&filter)?,
                gamma,
                anchor: !no_anchor,
            };
            let path = load_cartesian(&input)?;
            let filtered = apply_filter(&path, &spec)?;
            write_cartesian(&output, &filtered)?;
        }
    }
    Ok(())
}

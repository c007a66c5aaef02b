//! Experiment runner: builds demonstrations, constructs initial trajectories
//! from the demo endpoints, runs seeded optimizer comparisons, and writes
//! trace CSVs plus a machine-readable summary.

use rayon::prelude::*;
use serde::Deserialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, Vector3};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::costs::{CostSpec, ImitationSpec, MetricKind, StateTerm};
use crate::error::{Error, Result};
use crate::io;
use crate::kinematics::{ik_point, KinematicChain, NUM_JOINTS};
use crate::optimizer::{run, AlgoKind, ConvergenceCriterion, RunResult, StodiConfig};
use crate::trajectory::{build_precision_matrix, CartesianPath, JointTrajectory};

/// Built-in demonstration shapes. `size` is the line length, the circle and
/// semicircle radius, or the letter width of the M shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemoShape {
    Line,
    Circle,
    Semicircle,
    MShape,
}

impl DemoShape {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(DemoShape::Line),
            "circle" => Ok(DemoShape::Circle),
            "semicircle" => Ok(DemoShape::Semicircle),
            "m-shape" | "mshape" => Ok(DemoShape::MShape),
            other => Err(Error::Config(format!(
                "unknown demo shape {other:?}; expected line, circle, semicircle or m-shape"
            ))),
        }
    }
}

pub const DEFAULT_DEMO_CENTER: [f64; 3] = [0.45, 0.0, 0.45];

/// Noise-free parametric shape with `npoints` samples.
pub fn clean_shape(
    shape: DemoShape,
    npoints: usize,
    size: f64,
    center: [f64; 3],
) -> Result<CartesianPath> {
    if npoints < 3 {
        return Err(Error::Config(format!(
            "demo shapes need at least 3 points, got {npoints}"
        )));
    }
    if !size.is_finite() || size <= 0.0 {
        return Err(Error::Config(format!(
            "demo size must be positive, got {size}"
        )));
    }
    let n = npoints;
    let mut m = DMatrix::zeros(n, 3);
    match shape {
        DemoShape::Line => {
            // diagonal segment of length `size` in the xy-plane
            let half = 0.5 * size / 2f64.sqrt();
            for i in 0..n {
                let t = i as f64 / (n - 1) as f64;
                m[(i, 0)] = center[0] - half + t * 2.0 * half;
                m[(i, 1)] = center[1] - half + t * 2.0 * half;
                m[(i, 2)] = center[2];
            }
        }
        DemoShape::Circle => {
            for i in 0..n {
                let phi = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                m[(i, 0)] = center[0] + size * phi.cos();
                m[(i, 1)] = center[1] + size * phi.sin();
                m[(i, 2)] = center[2];
            }
        }
        DemoShape::Semicircle => {
            for i in 0..n {
                let phi = std::f64::consts::PI * i as f64 / (n - 1) as f64;
                m[(i, 0)] = center[0] + size * phi.cos();
                m[(i, 1)] = center[1] + size * phi.sin();
                m[(i, 2)] = center[2];
            }
        }
        DemoShape::MShape => {
            // letter M as a polyline, sampled uniformly by arc length
            let w = size;
            let h = 0.6 * size;
            let verts = [
                [-0.5 * w, 0.0],
                [-0.25 * w, h],
                [0.0, 0.4 * h],
                [0.25 * w, h],
                [0.5 * w, 0.0],
            ];
            let mut seg_len = [0.0f64; 4];
            let mut total = 0.0;
            for (s, len) in seg_len.iter_mut().enumerate() {
                let dx = verts[s + 1][0] - verts[s][0];
                let dy = verts[s + 1][1] - verts[s][1];
                *len = (dx * dx + dy * dy).sqrt();
                total += *len;
            }
            for i in 0..n {
                let mut dist = total * i as f64 / (n - 1) as f64;
                let mut seg = 0;
                while seg < 3 && dist > seg_len[seg] {
                    dist -= seg_len[seg];
                    seg += 1;
                }
                let t = if seg_len[seg] > 0.0 {
                    dist / seg_len[seg]
                } else {
                    0.0
                };
                let x = verts[seg][0] + t * (verts[seg + 1][0] - verts[seg][0]);
                let y = verts[seg][1] + t * (verts[seg + 1][1] - verts[seg][1]);
                m[(i, 0)] = center[0] + x;
                m[(i, 1)] = center[1] + y;
                m[(i, 2)] = center[2];
            }
        }
    }
    CartesianPath::new(m)
}

/// Clean shape plus i.i.d. Gaussian displacement of every point
/// (standard deviation `noise_std` per axis).
pub fn generate_demo(
    shape: DemoShape,
    npoints: usize,
    size: f64,
    center: [f64; 3],
    noise_std: f64,
    seed: u64,
) -> Result<CartesianPath> {
    let clean = clean_shape(shape, npoints, size, center)?;
    if noise_std == 0.0 {
        return Ok(clean);
    }
    if !noise_std.is_finite() || noise_std <= 0.0 {
        return Err(Error::Config(format!(
            "noise_std must be non-negative, got {noise_std}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = clean.points().clone();
    for i in 0..m.nrows() {
        for c in 0..3 {
            let z: f64 = rng.sample(StandardNormal);
            m[(i, c)] += noise_std * z;
        }
    }
    CartesianPath::new(m)
}

/// IK seed used when solving for the demo endpoints: a mid-workspace ready
/// posture for the built-in chain.
pub const IK_READY_POSE: [f64; NUM_JOINTS] = [0.0, -0.3, 0.0, -2.2, 0.0, 2.0, 0.8];

/// Straight-line joint interpolation between IK solutions of the demo's
/// first and last points.
pub fn initial_trajectory(
    chain: &KinematicChain,
    demo: &CartesianPath,
    n: usize,
    dt: f64,
) -> Result<JointTrajectory> {
    if demo.len() < 2 {
        return Err(Error::Config("demo path needs at least 2 points".into()));
    }
    let start = demo.point(0);
    let end = demo.point(demo.len() - 1);
    let q_start = ik_point(chain, &Vector3::from_column_slice(&start), &IK_READY_POSE)?;
    // seeding the end solve from the start solution keeps the interpolation short
    let q_end = ik_point(chain, &Vector3::from_column_slice(&end), &q_start)?;
    let pts = DMatrix::from_fn(n, NUM_JOINTS, |i, j| {
        let t = i as f64 / (n - 1) as f64;
        q_start[j] + t * (q_end[j] - q_start[j])
    });
    JointTrajectory::new(pts, dt)
}

// --- configuration file -------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: ExperimentSection,
    trajectory: TrajectorySection,
    #[serde(default)]
    chain: ChainSection,
    demo: DemoSection,
    cost: CostSection,
    optimizer: OptimizerSection,
    #[serde(default)]
    initial: InitialSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    algos: Vec<AlgoKind>,
    output_dir: PathBuf,
    /// Fraction of the final cost defining "iterations to threshold".
    #[serde(default = "default_threshold_fraction")]
    threshold_fraction: f64,
}

fn default_threshold_fraction() -> f64 {
    1.1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectorySection {
    waypoints: usize,
    dt: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainSection {
    file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemoSection {
    file: Option<PathBuf>,
    shape: Option<DemoShape>,
    #[serde(default = "default_demo_points")]
    points: usize,
    #[serde(default = "default_demo_size")]
    size: f64,
    #[serde(default)]
    noise_std: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_demo_center")]
    center: [f64; 3],
}

fn default_demo_points() -> usize {
    32
}

fn default_demo_size() -> f64 {
    0.15
}

fn default_demo_center() -> [f64; 3] {
    DEFAULT_DEMO_CENTER
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostSection {
    /// One run per listed metric, identical settings otherwise.
    #[serde(default = "default_metrics")]
    imitation_metrics: Vec<MetricKind>,
    #[serde(default = "default_imitation_weight")]
    imitation_weight: f64,
    #[serde(default)]
    control_weight: f64,
    lambda: f64,
    #[serde(default)]
    per_joint_control: bool,
    #[serde(default)]
    obstacle: Vec<ObstacleSection>,
    velocity: Option<VelocitySection>,
}

fn default_metrics() -> Vec<MetricKind> {
    vec![MetricKind::Dtw]
}

fn default_imitation_weight() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleSection {
    center: [f64; 3],
    radius: f64,
    weight: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VelocitySection {
    target_speed: f64,
    weight: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimizerSection {
    #[serde(default = "default_rollouts")]
    rollouts: usize,
    #[serde(default = "default_reuse")]
    reuse: usize,
    seeds: Vec<u64>,
    #[serde(default = "default_max_iters")]
    max_iters: usize,
    #[serde(default = "default_noise_scale")]
    noise_scale: f64,
    #[serde(default = "default_noise_decay")]
    noise_decay: f64,
    #[serde(default = "default_step_scale")]
    step_scale: f64,
    #[serde(default = "default_p_refresh")]
    p_refresh_period: usize,
    #[serde(default)]
    minmax_rescale: bool,
    convergence_window: Option<usize>,
    convergence_rel_tol: Option<f64>,
}

fn default_rollouts() -> usize {
    20
}

fn default_reuse() -> usize {
    10
}

fn default_max_iters() -> usize {
    500
}

fn default_noise_scale() -> f64 {
    1.0
}

fn default_noise_decay() -> f64 {
    1.0
}

fn default_step_scale() -> f64 {
    1.0
}

fn default_p_refresh() -> usize {
    10
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialSection {
    file: Option<PathBuf>,
}

/// A fully resolved experiment: demo built, chain loaded, one cost spec per
/// metric, one optimizer config per seed.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub algos: Vec<AlgoKind>,
    pub metrics: Vec<MetricKind>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub threshold_fraction: f64,
    pub waypoints: usize,
    pub dt: f64,
    pub chain: KinematicChain,
    pub demo: CartesianPath,
    pub imitation_weight: f64,
    pub control_weight: f64,
    pub lambda: f64,
    pub per_joint_control: bool,
    pub state_terms: Vec<StateTerm>,
    pub optimizer: StodiConfig,
    pub initial_file: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("experiment config: {e}")))?;

        if file.experiment.algos.is_empty() {
            return Err(Error::Config("at least one algorithm required".into()));
        }
        if file.optimizer.seeds.is_empty() {
            return Err(Error::Config("at least one seed required".into()));
        }
        if file.cost.imitation_metrics.is_empty() {
            return Err(Error::Config(
                "at least one imitation metric required".into(),
            ));
        }
        if file.trajectory.waypoints < 3 {
            return Err(Error::Config(
                "trajectory needs at least 3 waypoints".into(),
            ));
        }
        if !file.experiment.threshold_fraction.is_finite()
            || file.experiment.threshold_fraction < 1.0
        {
            return Err(Error::Config("threshold_fraction must be >= 1".into()));
        }

        let chain = match &file.chain.file {
            Some(p) => KinematicChain::from_toml_file(resolve(base_dir, p))?,
            None => KinematicChain::panda(),
        };

        let demo = match (&file.demo.file, file.demo.shape) {
            (Some(p), _) => io::read_trajectory(resolve(base_dir, p))?.into_cartesian()?,
            (None, Some(shape)) => generate_demo(
                shape,
                file.demo.points,
                file.demo.size,
                file.demo.center,
                file.demo.noise_std,
                file.demo.seed,
            )?,
            (None, None) => {
                return Err(Error::Config(
                    "demo section needs either a file or a shape".into(),
                ))
            }
        };

        let convergence = match (
            file.optimizer.convergence_window,
            file.optimizer.convergence_rel_tol,
        ) {
            (Some(w), Some(t)) => Some(ConvergenceCriterion {
                window: w,
                rel_tol: t,
            }),
            (None, None) => None,
            _ => {
                return Err(Error::Config(
                    "convergence_window and convergence_rel_tol must be set together".into(),
                ))
            }
        };

        let mut state_terms = Vec::new();
        for o in &file.cost.obstacle {
            state_terms.push(StateTerm::ObstacleSphere {
                center: o.center,
                radius: o.radius,
                weight: o.weight,
            });
        }
        if let Some(v) = &file.cost.velocity {
            state_terms.push(StateTerm::VelocityMagnitude {
                target_speed: v.target_speed,
                weight: v.weight,
            });
        }

        let optimizer = StodiConfig {
            rollouts: file.optimizer.rollouts,
            reuse_size: file.optimizer.reuse,
            max_iters: file.optimizer.max_iters,
            convergence,
            p_refresh_period: file.optimizer.p_refresh_period,
            seed: 0, // set per run
            noise_scale: file.optimizer.noise_scale,
            noise_decay: file.optimizer.noise_decay,
            step_scale: file.optimizer.step_scale,
            minmax_rescale: file.optimizer.minmax_rescale,
        };
        optimizer.validate()?;

        let cfg = Self {
            algos: file.experiment.algos,
            metrics: file.cost.imitation_metrics,
            seeds: file.optimizer.seeds,
            // input paths resolve relative to the config file; the output
            // directory is relative to the invocation
            output_dir: file.experiment.output_dir,
            threshold_fraction: file.experiment.threshold_fraction,
            waypoints: file.trajectory.waypoints,
            dt: file.trajectory.dt,
            chain,
            demo,
            imitation_weight: file.cost.imitation_weight,
            control_weight: file.cost.control_weight,
            lambda: file.cost.lambda,
            per_joint_control: file.cost.per_joint_control,
            state_terms,
            optimizer,
            initial_file: file.initial.file.as_ref().map(|p| resolve(base_dir, p)),
        };
        cfg.cost_spec(cfg.metrics[0]).validate()?;
        Ok(cfg)
    }

    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    /// The cost spec for one metric choice; runs differ only in the metric.
    pub fn cost_spec(&self, metric: MetricKind) -> CostSpec {
        CostSpec {
            state_terms: self.state_terms.clone(),
            imitation: Some(ImitationSpec {
                metric,
                weight: self.imitation_weight,
                demo: self.demo.clone(),
            }),
            control_weight: self.control_weight,
            lambda: self.lambda,
            per_joint_control: self.per_joint_control,
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

// --- comparison runs ----------------------------------------------------

/// One row of the comparison summary.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub algo: AlgoKind,
    pub metric: MetricKind,
    pub seed: u64,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub iterations: usize,
    /// First iteration whose tracked cost is within the threshold fraction
    /// of the final cost.
    pub iters_to_threshold: usize,
    pub trace_file: PathBuf,
    pub trajectory_file: PathBuf,
}

#[derive(Debug)]
pub struct ComparisonReport {
    pub rows: Vec<SummaryRow>,
    pub summary_file: PathBuf,
}

/// First index at which the (non-increasing) trace reaches
/// `fraction * final`; falls back to the trace length if never reached.
pub fn iterations_to_threshold(trace: &[f64], fraction: f64) -> usize {
    let Some(&last) = trace.last() else {
        return 0;
    };
    let threshold = fraction * last;
    trace
        .iter()
        .position(|&v| v <= threshold)
        .unwrap_or(trace.len())
}

/// Runs every (metric, algorithm, seed) combination from the same initial
/// trajectory with the same per-seed noise stream, writes per-run trace and
/// trajectory files, and a summary CSV last.
pub fn run_comparison(cfg: &ExperimentConfig) -> Result<ComparisonReport> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::Io {
        path: cfg.output_dir.clone(),
        source: e,
    })?;

    let r = build_precision_matrix(cfg.waypoints, cfg.dt)?;
    let initial = match &cfg.initial_file {
        Some(p) => io::read_trajectory(p)?.into_joint(cfg.dt)?,
        None => initial_trajectory(&cfg.chain, &cfg.demo, cfg.waypoints, cfg.dt)?,
    };
    if initial.num_joints() != NUM_JOINTS {
        return Err(Error::DimensionMismatch(format!(
            "initial trajectory must have {NUM_JOINTS} joints, found {}",
            initial.num_joints()
        )));
    }

    let mut jobs = Vec::new();
    for &metric in &cfg.metrics {
        for &algo in &cfg.algos {
            for &seed in &cfg.seeds {
                jobs.push((metric, algo, seed));
            }
        }
    }

    let rows: Result<Vec<SummaryRow>> = jobs
        .par_iter()
        .map(|&(metric, algo, seed)| {
            let spec = cfg.cost_spec(metric);
            let run_cfg = StodiConfig {
                seed,
                ..cfg.optimizer.clone()
            };
            let result = run(&initial, &run_cfg, &spec, &r, &cfg.chain, algo)?;
            let tag = format!("{}_{}_{}", algo.name(), metric.name(), seed);
            let trace_file = cfg.output_dir.join(format!("trace_{tag}.csv"));
            let trajectory_file = cfg.output_dir.join(format!("traj_{tag}.csv"));
            fs::write(&trace_file, result.traces.to_csv()).map_err(|e| Error::Io {
                path: trace_file.clone(),
                source: e,
            })?;
            io::write_joint(&trajectory_file, &result.best)?;
            Ok(summary_row(
                cfg,
                metric,
                algo,
                seed,
                &result,
                trace_file,
                trajectory_file,
            ))
        })
        .collect();
    let rows = rows?;

    let summary_file = cfg.output_dir.join("summary.csv");
    let mut out = String::from(
        "algo,metric,seed,initial_cost,final_cost,iterations,iters_to_threshold,trace_file,trajectory_file\n",
    );
    for row in &rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.algo.name(),
            row.metric.name(),
            row.seed,
            row.initial_cost,
            row.final_cost,
            row.iterations,
            row.iters_to_threshold,
            row.trace_file.file_name().unwrap().to_string_lossy(),
            row.trajectory_file.file_name().unwrap().to_string_lossy(),
        )
        .expect("string write");
    }
    fs::write(&summary_file, out).map_err(|e| Error::Io {
        path: summary_file.clone(),
        source: e,
    })?;

    Ok(ComparisonReport { rows, summary_file })
}

fn summary_row(
    cfg: &ExperimentConfig,
    metric: MetricKind,
    algo: AlgoKind,
    seed: u64,
    result: &RunResult,
    trace_file: PathBuf,
    trajectory_file: PathBuf,
) -> SummaryRow {
    SummaryRow {
        algo,
        metric,
        seed,
        initial_cost: result.initial_cost,
        final_cost: result.final_cost,
        iterations: result.iterations,
        iters_to_threshold: iterations_to_threshold(
            result.traces.tracked(),
            cfg.threshold_fraction,
        ),
        trace_file,
        trajectory_file,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn line_demo_is_collinear() {
        let p = clean_shape(DemoShape::Line, 20, 0.3, DEFAULT_DEMO_CENTER).unwrap();
        let a = p.point(0);
        let b = p.point(19);
        for i in 0..20 {
            let t = i as f64 / 19.0;
            let expect = [
                a[0] + t * (b[0] - a[0]),
                a[1] + t * (b[1] - a[1]),
                a[2] + t * (b[2] - a[2]),
            ];
            let got = p.point(i);
            for c in 0..3 {
                assert_abs_diff_eq!(got[c], expect[c], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn circle_demo_has_constant_radius() {
        let center = DEFAULT_DEMO_CENTER;
        let p = clean_shape(DemoShape::Circle, 64, 0.2, center).unwrap();
        for i in 0..64 {
            let q = p.point(i);
            let r = ((q[0] - center[0]).powi(2) + (q[1] - center[1]).powi(2)).sqrt();
            assert_abs_diff_eq!(r, 0.2, epsilon = 1e-12);
            assert_abs_diff_eq!(q[2], center[2], epsilon = 1e-12);
        }
    }

    #[test]
    fn mshape_spans_width_and_height() {
        let p = clean_shape(DemoShape::MShape, 101, 0.4, [0.0, 0.0, 0.0]).unwrap();
        let xs: Vec<f64> = (0..101).map(|i| p.point(i)[0]).collect();
        let ys: Vec<f64> = (0..101).map(|i| p.point(i)[1]).collect();
        assert_abs_diff_eq!(xs[0], -0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(xs[100], 0.2, epsilon = 1e-12);
        // arc-length sampling passes near (not exactly through) the peaks
        let ymax = ys.iter().cloned().fold(f64::MIN, f64::max);
        assert!(ymax > 0.23 && ymax <= 0.24 + 1e-12, "ymax {ymax}");
        let ymin = ys.iter().cloned().fold(f64::MAX, f64::min);
        assert_abs_diff_eq!(ymin, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn noisy_demo_displacement_matches_chi_mean() {
        // mean ||N(0, s^2 I_3)|| = s * sqrt(2) * Gamma(2) / Gamma(1.5)
        //                        = s * 2 * sqrt(2 / pi)
        let shape = DemoShape::Circle;
        let clean = clean_shape(shape, 1000, 0.3, DEFAULT_DEMO_CENTER).unwrap();
        let noisy = generate_demo(shape, 1000, 0.3, DEFAULT_DEMO_CENTER, 0.1, 99).unwrap();
        let mean_disp: f64 = (0..1000)
            .map(|i| clean.sq_dist(i, &noisy, i).sqrt())
            .sum::<f64>()
            / 1000.0;
        let expect = 0.1 * 2.0 * (2.0 / std::f64::consts::PI).sqrt();
        assert!(
            (mean_disp - expect).abs() / expect < 0.1,
            "mean displacement {mean_disp} vs chi mean {expect}"
        );
    }

    #[test]
    fn demo_generation_is_deterministic() {
        let a = generate_demo(DemoShape::Line, 50, 0.2, DEFAULT_DEMO_CENTER, 0.05, 3).unwrap();
        let b = generate_demo(DemoShape::Line, 50, 0.2, DEFAULT_DEMO_CENTER, 0.05, 3).unwrap();
        assert_eq!(a.points(), b.points());
    }

    #[test]
    fn rejects_tiny_demos() {
        assert!(clean_shape(DemoShape::Line, 2, 0.2, DEFAULT_DEMO_CENTER).is_err());
        assert!(clean_shape(DemoShape::Line, 10, 0.0, DEFAULT_DEMO_CENTER).is_err());
    }

    #[test]
    fn initial_trajectory_hits_demo_endpoints() {
        let chain = KinematicChain::panda();
        let demo = clean_shape(DemoShape::Line, 16, 0.2, DEFAULT_DEMO_CENTER).unwrap();
        let init = initial_trajectory(&chain, &demo, 16, 0.05).unwrap();
        let ee = crate::kinematics::fk_path(&chain, &init).unwrap();
        let start_err: f64 = ee.sq_dist(0, &demo, 0).sqrt();
        let end_err: f64 = ee.sq_dist(15, &demo, 15).sqrt();
        assert!(start_err < 1e-4, "start error {start_err}");
        assert!(end_err < 1e-4, "end error {end_err}");
    }

    #[test]
    fn threshold_iterations() {
        let trace = [10.0, 6.0, 3.0, 1.05, 1.0];
        assert_eq!(iterations_to_threshold(&trace, 1.1), 3);
        assert_eq!(iterations_to_threshold(&trace, 20.0), 0);
        assert_eq!(iterations_to_threshold(&[], 1.1), 0);
    }

    #[test]
    fn config_parsing_round_trip() {
        let text = r#"
[experiment]
algos = ["stomp", "stodi"]
output_dir = "out"

[trajectory]
waypoints = 16
dt = 0.05

[demo]
shape = "circle"
points = 16
size = 0.12
seed = 7

[cost]
lambda = 0.01

[optimizer]
seeds = [1, 2]
rollouts = 8
reuse = 3
max_iters = 5
noise_scale = 0.3
"#;
        let cfg = ExperimentConfig::from_toml_str(text, Path::new(".")).unwrap();
        assert_eq!(cfg.algos.len(), 2);
        assert_eq!(cfg.metrics, vec![MetricKind::Dtw]);
        assert_eq!(cfg.seeds, vec![1, 2]);
        assert_eq!(cfg.waypoints, 16);
        assert_eq!(cfg.demo.len(), 16);
        assert_eq!(cfg.optimizer.rollouts, 8);
        assert!(cfg.optimizer.convergence.is_none());
    }

    #[test]
    fn unreachable_demo_endpoint_is_a_setup_error() {
        let chain = KinematicChain::panda();
        let demo = clean_shape(DemoShape::Line, 8, 0.2, [3.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            initial_trajectory(&chain, &demo, 8, 0.1),
            Err(Error::NoIkSolution { .. })
        ));
    }

    #[test]
    fn comparison_writes_runs_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!(
            r#"
[experiment]
algos = ["stomp", "stodi"]
output_dir = {:?}

[trajectory]
waypoints = 12
dt = 0.1

[demo]
shape = "line"
points = 12
size = 0.12

[cost]
lambda = 0.001

[optimizer]
seeds = [1, 2]
rollouts = 6
reuse = 2
max_iters = 8
noise_scale = 0.3
"#,
            dir.path().join("out")
        );
        let cfg = ExperimentConfig::from_toml_str(&text, dir.path()).unwrap();
        let report = run_comparison(&cfg).unwrap();

        // one row per (algo, seed) pair
        assert_eq!(report.rows.len(), 4);
        for row in &report.rows {
            assert!(row.trace_file.exists());
            assert!(row.trajectory_file.exists());
            // referenced files parse back
            let traj = crate::io::read_trajectory(&row.trajectory_file).unwrap();
            assert!(matches!(traj, crate::io::TrajectoryFile::Joint(_)));
            if row.algo == AlgoKind::Stodi {
                assert!(row.final_cost <= row.initial_cost);
            }
        }
        let summary = std::fs::read_to_string(&report.summary_file).unwrap();
        assert_eq!(summary.lines().count(), 5);

        // identical rerun produces identical summary bytes
        let report2 = run_comparison(&cfg).unwrap();
        let summary2 = std::fs::read_to_string(&report2.summary_file).unwrap();
        assert_eq!(summary, summary2);
    }

    #[test]
    fn config_rejects_missing_demo() {
        let text = r#"
[experiment]
algos = ["stodi"]
output_dir = "out"

[trajectory]
waypoints = 16
dt = 0.05

[demo]
points = 16

[cost]
lambda = 0.01

[optimizer]
seeds = [1]
"#;
        assert!(ExperimentConfig::from_toml_str(text, Path::new(".")).is_err());
    }
}

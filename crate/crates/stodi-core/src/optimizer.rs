//! The STODI optimizer and its STOMP baseline.
//!
//! Both share one rollout machinery: K noisy trajectories are formed from the
//! current iterate, their per-waypoint state costs feed a per-timestep
//! softmax, and the probability-weighted noise is smoothed through R^-1 and
//! added to the interior waypoints.
//!
//! STOMP updates a single trajectory unconditionally. STODI keeps three: the
//! best trajectory seen so far, a distal exploration trajectory that also
//! updates unconditionally, and a proximal searching trajectory that is
//! periodically reset to the best. A small set of low-cost trajectories is
//! retained across iterations and substituted for the worst rollouts, which
//! stabilizes the update without spending extra noise.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Deserialize;

use crate::costs::{state_cost_rows, total_cost, CostSpec};
use crate::error::{Error, Result};
use crate::kinematics::KinematicChain;
use crate::sampler::{derive_seed, sample_noise, NoiseBatch};
use crate::trajectory::{JointTrajectory, PrecisionMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgoKind {
    Stomp,
    Stodi,
}

impl AlgoKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "stomp" => Ok(AlgoKind::Stomp),
            "stodi" => Ok(AlgoKind::Stodi),
            other => Err(Error::Config(format!(
                "unknown algorithm {other:?}; expected stomp or stodi"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AlgoKind::Stomp => "stomp",
            AlgoKind::Stodi => "stodi",
        }
    }
}

/// Stop once the tracked cost improves by less than `rel_tol` (relative)
/// over the last `window` iterations.
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct ConvergenceCriterion {
    pub window: usize,
    pub rel_tol: f64,
}

#[derive(Debug, Clone)]
pub struct StodiConfig {
    /// Number of noisy rollouts K per iteration.
    pub rollouts: usize,
    /// Reuse-set size n; must be strictly below `rollouts`.
    pub reuse_size: usize,
    pub max_iters: usize,
    pub convergence: Option<ConvergenceCriterion>,
    /// Iterations between proximal-trajectory resets to the best trajectory.
    pub p_refresh_period: usize,
    pub seed: u64,
    /// Standard-deviation multiplier on the sampled noise.
    pub noise_scale: f64,
    /// Per-iteration exponential decay of the noise scale; 1.0 disables it.
    pub noise_decay: f64,
    /// Extension knob scaling the smoothed update; 1.0 reproduces the plain
    /// update rule.
    pub step_scale: f64,
    /// Rescale each cost column to [0, 1] before exponentiation (the STOMP
    /// convention, where lambda acts as the exponent gain) instead of the
    /// plain softmax exp(-S / lambda).
    pub minmax_rescale: bool,
}

impl Default for StodiConfig {
    fn default() -> Self {
        Self {
            rollouts: 20,
            reuse_size: 10,
            max_iters: 500,
            convergence: Some(ConvergenceCriterion {
                window: 25,
                rel_tol: 1e-4,
            }),
            p_refresh_period: 10,
            seed: 0,
            noise_scale: 1.0,
            noise_decay: 1.0,
            step_scale: 1.0,
            minmax_rescale: false,
        }
    }
}

impl StodiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rollouts == 0 {
            return Err(Error::Config("rollouts must be >= 1".into()));
        }
        if self.reuse_size >= self.rollouts {
            return Err(Error::Config(format!(
                "reuse size ({}) must be strictly less than rollouts ({})",
                self.reuse_size, self.rollouts
            )));
        }
        if self.p_refresh_period == 0 {
            return Err(Error::Config("p_refresh_period must be >= 1".into()));
        }
        if !self.noise_scale.is_finite() || self.noise_scale <= 0.0 {
            return Err(Error::Config("noise_scale must be positive".into()));
        }
        if !self.noise_decay.is_finite() || self.noise_decay <= 0.0 || self.noise_decay > 1.0 {
            return Err(Error::Config("noise_decay must be in (0, 1]".into()));
        }
        if !self.step_scale.is_finite() || self.step_scale <= 0.0 {
            return Err(Error::Config("step_scale must be positive".into()));
        }
        if let Some(c) = &self.convergence {
            if c.window == 0 || !c.rel_tol.is_finite() || c.rel_tol <= 0.0 {
                return Err(Error::Config(
                    "convergence needs window >= 1 and rel_tol > 0".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct ReuseSlot {
    traj: JointTrajectory,
    cost: f64,
}

/// Mutable state of one STODI run: the three categorized trajectories, the
/// reuse set and the per-iteration cost traces.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub theta_b: JointTrajectory,
    pub theta_d: JointTrajectory,
    pub theta_p: JointTrajectory,
    pub q_b: f64,
    pub q_d: f64,
    pub q_p: f64,
    reused: Vec<ReuseSlot>,
    pub iter: usize,
    pub q_b_trace: Vec<f64>,
    pub q_d_trace: Vec<f64>,
    pub q_p_trace: Vec<f64>,
}

impl OptimizerState {
    /// All three trajectories start at the initial trajectory; reuse slots
    /// start at infinite cost so they never win a replacement until filled.
    pub fn new(
        initial: JointTrajectory,
        cfg: &StodiConfig,
        spec: &CostSpec,
        r: &PrecisionMatrix,
        chain: &KinematicChain,
    ) -> Result<Self> {
        cfg.validate()?;
        spec.validate()?;
        let q_init = total_cost(&initial, spec, r, chain)?;
        let reused = (0..cfg.reuse_size)
            .map(|_| ReuseSlot {
                traj: initial.clone(),
                cost: f64::INFINITY,
            })
            .collect();
        Ok(Self {
            theta_b: initial.clone(),
            theta_d: initial.clone(),
            theta_p: initial,
            q_b: q_init,
            q_d: q_init,
            q_p: q_init,
            reused,
            iter: 0,
            q_b_trace: Vec::new(),
            q_d_trace: Vec::new(),
            q_p_trace: Vec::new(),
        })
    }

    /// Stored reuse entries as (trajectory, cost) pairs.
    pub fn reuse_entries(&self) -> impl Iterator<Item = (&JointTrajectory, f64)> {
        self.reused.iter().map(|s| (&s.traj, s.cost))
    }
}

/// Per-timestep probability weights for column `j` of the K x N cost matrix.
fn column_weights(s: &DMatrix<f64>, j: usize, lambda: f64, minmax: bool) -> Result<Vec<f64>> {
    let k = s.nrows();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for ki in 0..k {
        let v = s[(ki, j)];
        if !v.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite state cost in rollout {ki}, waypoint {j}"
            )));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }

    let mut weights = Vec::with_capacity(k);
    if minmax {
        let span = hi - lo;
        if span <= 0.0 {
            weights.resize(k, 1.0 / k as f64);
            return Ok(weights);
        }
        for ki in 0..k {
            weights.push((-lambda * (s[(ki, j)] - lo) / span).exp());
        }
    } else {
        // subtracting the column minimum keeps the largest exponent at zero
        for ki in 0..k {
            weights.push((-(s[(ki, j)] - lo) / lambda).exp());
        }
    }
    let sum: f64 = weights.iter().sum();
    if !sum.is_finite() || sum <= 0.0 {
        return Err(Error::Numeric(format!(
            "degenerate probability column at waypoint {j}"
        )));
    }
    for w in weights.iter_mut() {
        *w /= sum;
    }
    Ok(weights)
}

/// State cost rows and total cost of each rollout theta + eps_k; evaluated
/// in parallel, accumulated in index order.
fn evaluate_rollouts(
    theta: &JointTrajectory,
    eps: &[DMatrix<f64>],
    spec: &CostSpec,
    r: &PrecisionMatrix,
    chain: &KinematicChain,
) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let evals: Vec<Result<(DVector<f64>, f64)>> = eps
        .par_iter()
        .map(|e| {
            let rollout = theta.offset_by(e)?;
            let rows = state_cost_rows(&rollout, spec, chain)?;
            let q = rows.sum()
                + if spec.control_weight > 0.0 {
                    spec.control_weight
                        * if spec.per_joint_control {
                            crate::trajectory::control_cost_per_joint(&rollout, r)?
                        } else {
                            crate::trajectory::control_cost(&rollout, r)?
                        }
                } else {
                    0.0
                };
            Ok((rows, q))
        })
        .collect();

    let n = theta.num_waypoints();
    let mut s = DMatrix::zeros(eps.len(), n);
    let mut costs = Vec::with_capacity(eps.len());
    for (k, ev) in evals.into_iter().enumerate() {
        let (rows, q) = ev?;
        if !q.is_finite() {
            return Err(Error::Numeric(format!("rollout {k} has non-finite cost")));
        }
        s.row_mut(k).copy_from(&rows.transpose());
        costs.push(q);
    }
    Ok((s, costs))
}

/// Substitutes stored low-cost trajectories for the worst rollouts: the
/// highest-cost rollouts are paired with the cheapest stored entries, and a
/// substitution happens only when the stored cost is strictly lower. The
/// noise row becomes the implied offset theta_stored - theta so the update
/// formula stays coherent, and the cost rows are recomputed.
fn replace_with_reused(
    theta: &JointTrajectory,
    eps: &mut [DMatrix<f64>],
    s: &mut DMatrix<f64>,
    costs: &mut [f64],
    reused: &[ReuseSlot],
    spec: &CostSpec,
    chain: &KinematicChain,
) -> Result<()> {
    if reused.is_empty() {
        return Ok(());
    }
    let k = eps.len();
    let mut worst: Vec<usize> = (0..k).collect();
    worst.sort_by(|&a, &b| {
        costs[b]
            .partial_cmp(&costs[a])
            .expect("rollout costs are finite")
            .then(a.cmp(&b))
    });
    let mut slots: Vec<usize> = (0..reused.len()).collect();
    slots.sort_by(|&a, &b| {
        reused[a]
            .cost
            .partial_cmp(&reused[b].cost)
            .expect("stored costs are comparable")
            .then(a.cmp(&b))
    });

    for (&wi, &si) in worst.iter().zip(slots.iter()) {
        let slot = &reused[si];
        if slot.cost < costs[wi] {
            eps[wi] = slot.traj.points() - theta.points();
            let rows = state_cost_rows(&slot.traj, spec, chain)?;
            s.row_mut(wi).copy_from(&rows.transpose());
            costs[wi] = slot.cost;
        } else {
            // remaining pairs are monotonically harder to improve
            break;
        }
    }
    Ok(())
}

/// The probability-weighted noise combination and smoothed update shared by
/// both optimizers: delta_j = sum_k P_kj eps_k[j] over interior waypoints,
/// then theta + step_scale * R^-1 delta with endpoints untouched.
fn weighted_update(
    theta: &JointTrajectory,
    eps: &[DMatrix<f64>],
    s: &DMatrix<f64>,
    lambda: f64,
    r: &PrecisionMatrix,
    step_scale: f64,
    minmax: bool,
) -> Result<JointTrajectory> {
    let n = theta.num_waypoints();
    let m = theta.num_joints();
    let mut delta = DMatrix::zeros(n - 2, m);
    for j in 1..n - 1 {
        let weights = column_weights(s, j, lambda, minmax)?;
        for (k, ek) in eps.iter().enumerate() {
            let w = weights[k];
            for c in 0..m {
                delta[(j - 1, c)] += w * ek[(j, c)];
            }
        }
    }
    let smoothed = r.r_inv() * delta * step_scale;
    theta.with_interior_delta(&smoothed)
}

/// One full noisy update pass: rollouts, optional reuse substitution,
/// weighted update, and the updated trajectory's total cost.
#[allow(clippy::too_many_arguments)]
fn noisy_pass(
    theta: &JointTrajectory,
    batch: &NoiseBatch,
    reused: &[ReuseSlot],
    spec: &CostSpec,
    r: &PrecisionMatrix,
    chain: &KinematicChain,
    step_scale: f64,
    minmax: bool,
) -> Result<(JointTrajectory, f64)> {
    let mut eps: Vec<DMatrix<f64>> = batch.iter().cloned().collect();
    let (mut s, mut costs) = evaluate_rollouts(theta, &eps, spec, r, chain)?;
    replace_with_reused(theta, &mut eps, &mut s, &mut costs, reused, spec, chain)?;
    let updated = weighted_update(theta, &eps, &s, spec.lambda, r, step_scale, minmax)?;
    let q = total_cost(&updated, spec, r, chain)?;
    if !q.is_finite() {
        return Err(Error::Numeric(
            "updated trajectory has non-finite cost".into(),
        ));
    }
    Ok((updated, q))
}

/// One plain STOMP update of a single trajectory, returning the updated
/// trajectory and its total cost.
pub fn stomp_step(
    theta: &JointTrajectory,
    batch: &NoiseBatch,
    spec: &CostSpec,
    r: &PrecisionMatrix,
    chain: &KinematicChain,
) -> Result<(JointTrajectory, f64)> {
    noisy_pass(theta, batch, &[], spec, r, chain, 1.0, false)
}

fn offer_to_reuse(reused: &mut [ReuseSlot], traj: &JointTrajectory, cost: f64) {
    if reused.is_empty() {
        return;
    }
    let mut max_idx = 0;
    for (i, slot) in reused.iter().enumerate() {
        if slot.cost > reused[max_idx].cost {
            max_idx = i;
        }
    }
    if cost < reused[max_idx].cost {
        reused[max_idx] = ReuseSlot {
            traj: traj.clone(),
            cost,
        };
    }
}

/// Noise scale at one iteration, including the optional exponential decay.
fn iteration_noise_scale(cfg: &StodiConfig, iter: usize) -> f64 {
    if cfg.noise_decay == 1.0 {
        cfg.noise_scale
    } else {
        cfg.noise_scale * cfg.noise_decay.powi(iter as i32)
    }
}

/// One STODI iteration: a single noise batch is drawn and shared by the
/// distal and proximal passes; each pass updates unconditionally and offers
/// its result to the reuse set; the best trajectory takes the running
/// minimum; and the proximal trajectory is reset to the best on schedule.
pub fn stodi_iteration(
    state: &mut OptimizerState,
    cfg: &StodiConfig,
    spec: &CostSpec,
    r: &PrecisionMatrix,
    chain: &KinematicChain,
) -> Result<()> {
    let m = state.theta_b.num_joints();
    let iter_seed = derive_seed(cfg.seed, state.iter as u64);
    let batch = sample_noise(
        r,
        cfg.rollouts,
        m,
        iter_seed,
        iteration_noise_scale(cfg, state.iter),
    )?;

    let (theta_d, q_d) = noisy_pass(
        &state.theta_d,
        &batch,
        &state.reused,
        spec,
        r,
        chain,
        cfg.step_scale,
        cfg.minmax_rescale,
    )?;
    offer_to_reuse(&mut state.reused, &theta_d, q_d);
    state.theta_d = theta_d;
    state.q_d = q_d;

    let (theta_p, q_p) = noisy_pass(
        &state.theta_p,
        &batch,
        &state.reused,
        spec,
        r,
        chain,
        cfg.step_scale,
        cfg.minmax_rescale,
    )?;
    offer_to_reuse(&mut state.reused, &theta_p, q_p);
    state.theta_p = theta_p;
    state.q_p = q_p;

    if state.q_d.min(state.q_p) < state.q_b {
        if state.q_d <= state.q_p {
            state.theta_b = state.theta_d.clone();
            state.q_b = state.q_d;
        } else {
            state.theta_b = state.theta_p.clone();
            state.q_b = state.q_p;
        }
    }

    state.q_d_trace.push(state.q_d);
    state.q_p_trace.push(state.q_p);
    state.q_b_trace.push(state.q_b);
    state.iter += 1;

    if state.iter.is_multiple_of(cfg.p_refresh_period) {
        state.theta_p = state.theta_b.clone();
        state.q_p = state.q_b;
    }
    Ok(())
}

/// Per-iteration cost histories of one run.
#[derive(Debug, Clone)]
pub enum Traces {
    Stodi {
        q_b: Vec<f64>,
        q_d: Vec<f64>,
        q_p: Vec<f64>,
    },
    Stomp {
        q: Vec<f64>,
        q_best: Vec<f64>,
    },
}

impl Traces {
    pub fn len(&self) -> usize {
        match self {
            Traces::Stodi { q_b, .. } => q_b.len(),
            Traces::Stomp { q, .. } => q.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The monotone cost history used for convergence checks and summaries:
    /// best-so-far for both algorithms.
    pub fn tracked(&self) -> &[f64] {
        match self {
            Traces::Stodi { q_b, .. } => q_b,
            Traces::Stomp { q_best, .. } => q_best,
        }
    }

    /// CSV rendering with columns iter,q_b,q_d,q_p (STODI) or
    /// iter,q,q_best (STOMP).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Traces::Stodi { q_b, q_d, q_p } => {
                out.push_str("iter,q_b,q_d,q_p\n");
                for i in 0..q_b.len() {
                    out.push_str(&format!("{},{},{},{}\n", i, q_b[i], q_d[i], q_p[i]));
                }
            }
            Traces::Stomp { q, q_best } => {
                out.push_str("iter,q,q_best\n");
                for i in 0..q.len() {
                    out.push_str(&format!("{},{},{}\n", i, q[i], q_best[i]));
                }
            }
        }
        out
    }
}

/// Outcome of one optimization run.
#[derive(Debug, Clone)]
pub struct RunResult {
    /// Best trajectory found (best-so-far for STOMP too, so comparisons
    /// between the algorithms are fair).
    pub best: JointTrajectory,
    /// The raw final iterate: theta for STOMP, the distal trajectory for
    /// STODI.
    pub last_iterate: JointTrajectory,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub iterations: usize,
    pub traces: Traces,
}

fn converged(trace: &[f64], crit: Option<&ConvergenceCriterion>) -> bool {
    let Some(c) = crit else {
        return false;
    };
    if trace.len() <= c.window {
        return false;
    }
    let prev = trace[trace.len() - 1 - c.window];
    let now = trace[trace.len() - 1];
    let rel = (prev - now) / prev.abs().max(1e-12);
    rel < c.rel_tol
}

/// Runs one optimizer from an initial trajectory until convergence of the
/// tracked cost or the iteration budget.
pub fn run(
    initial: &JointTrajectory,
    cfg: &StodiConfig,
    spec: &CostSpec,
    r: &PrecisionMatrix,
    chain: &KinematicChain,
    algo: AlgoKind,
) -> Result<RunResult> {
    cfg.validate()?;
    spec.validate()?;
    if initial.num_waypoints() != r.num_waypoints() {
        return Err(Error::DimensionMismatch(format!(
            "initial trajectory has {} waypoints, precision matrix was built for {}",
            initial.num_waypoints(),
            r.num_waypoints()
        )));
    }

    match algo {
        AlgoKind::Stodi => {
            let mut state = OptimizerState::new(initial.clone(), cfg, spec, r, chain)?;
            let initial_cost = state.q_b;
            while state.iter < cfg.max_iters {
                stodi_iteration(&mut state, cfg, spec, r, chain)?;
                if converged(&state.q_b_trace, cfg.convergence.as_ref()) {
                    break;
                }
            }
            Ok(RunResult {
                best: state.theta_b.clone(),
                last_iterate: state.theta_d.clone(),
                initial_cost,
                final_cost: state.q_b,
                iterations: state.iter,
                traces: Traces::Stodi {
                    q_b: state.q_b_trace,
                    q_d: state.q_d_trace,
                    q_p: state.q_p_trace,
                },
            })
        }
        AlgoKind::Stomp => {
            let initial_cost = total_cost(initial, spec, r, chain)?;
            let m = initial.num_joints();
            let mut theta = initial.clone();
            let mut best = initial.clone();
            let mut q_best = initial_cost;
            let mut q_trace = Vec::new();
            let mut q_best_trace = Vec::new();
            let mut iter = 0;
            while iter < cfg.max_iters {
                let iter_seed = derive_seed(cfg.seed, iter as u64);
                let batch = sample_noise(
                    r,
                    cfg.rollouts,
                    m,
                    iter_seed,
                    iteration_noise_scale(cfg, iter),
                )?;
                let (next, q) = noisy_pass(
                    &theta,
                    &batch,
                    &[],
                    spec,
                    r,
                    chain,
                    cfg.step_scale,
                    cfg.minmax_rescale,
                )?;
                theta = next;
                if q < q_best {
                    q_best = q;
                    best = theta.clone();
                }
                q_trace.push(q);
                q_best_trace.push(q_best);
                iter += 1;
                if converged(&q_best_trace, cfg.convergence.as_ref()) {
                    break;
                }
            }
            Ok(RunResult {
                best,
                last_iterate: theta,
                initial_cost,
                final_cost: q_best,
                iterations: iter,
                traces: Traces::Stomp {
                    q: q_trace,
                    q_best: q_best_trace,
                },
            })
        }
    }
}

//! Assembly of the optimization cost: pluggable per-waypoint state terms, a
//! whole-trajectory imitation term spread uniformly over rows, and the
//! control cost quadratic form.
//!
//! The imitation term compares the end-effector path of the candidate
//! trajectory against a demonstration path, using DTW or one of the spectral
//! metrics. Folding it into the per-row cost vector (as q_d / N) is what lets
//! a whole-trajectory similarity participate in the per-timestep softmax
//! weights of the optimizers.

use nalgebra::DVector;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::kinematics::{fk_path, KinematicChain};
use crate::metrics::{dft2, dtw, mseps, mses, zero_pad_pair, DtwConfig};
use crate::trajectory::{
    control_cost, control_cost_per_joint, CartesianPath, JointTrajectory, PrecisionMatrix,
};

/// Similarity metric used by the imitation term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Dtw,
    Mses,
    Mseps,
}

impl MetricKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dtw" => Ok(MetricKind::Dtw),
            "mses" => Ok(MetricKind::Mses),
            "mseps" => Ok(MetricKind::Mseps),
            other => Err(Error::Config(format!(
                "unknown metric {other:?}; expected dtw, mses or mseps"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Dtw => "dtw",
            MetricKind::Mses => "mses",
            MetricKind::Mseps => "mseps",
        }
    }
}

/// Per-waypoint state cost terms, evaluated on the end-effector position.
#[derive(Debug, Clone)]
pub enum StateTerm {
    /// Hinge penalty inside a sphere: weight * max(0, radius - distance).
    ObstacleSphere {
        center: [f64; 3],
        radius: f64,
        weight: f64,
    },
    /// Squared deviation of the finite-difference speed from a target speed.
    VelocityMagnitude { target_speed: f64, weight: f64 },
}

#[derive(Debug, Clone)]
pub struct ImitationSpec {
    pub metric: MetricKind,
    pub weight: f64,
    pub demo: CartesianPath,
}

/// The full cost specification for one optimization run.
#[derive(Debug, Clone)]
pub struct CostSpec {
    pub state_terms: Vec<StateTerm>,
    pub imitation: Option<ImitationSpec>,
    pub control_weight: f64,
    /// Sensitivity of the per-timestep softmax over rollout costs.
    pub lambda: f64,
    /// Use the per-joint control cost instead of the joint-sum quadratic form.
    pub per_joint_control: bool,
}

impl Default for CostSpec {
    fn default() -> Self {
        Self {
            state_terms: Vec::new(),
            imitation: None,
            control_weight: 0.0,
            lambda: 10.0,
            per_joint_control: false,
        }
    }
}

impl CostSpec {
    /// Cost with a single imitation term and nothing else.
    pub fn imitation_only(metric: MetricKind, demo: CartesianPath, lambda: f64) -> Self {
        Self {
            imitation: Some(ImitationSpec {
                metric,
                weight: 1.0,
                demo,
            }),
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(Error::Config(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.control_weight < 0.0 {
            return Err(Error::Config("control weight must be >= 0".into()));
        }
        for term in &self.state_terms {
            let w = match term {
                StateTerm::ObstacleSphere { weight, .. } => *weight,
                StateTerm::VelocityMagnitude { weight, .. } => *weight,
            };
            if w < 0.0 {
                return Err(Error::Config("state term weights must be >= 0".into()));
            }
        }
        if let Some(imit) = &self.imitation {
            if imit.weight < 0.0 {
                return Err(Error::Config("imitation weight must be >= 0".into()));
            }
            if imit.demo.is_empty() {
                return Err(Error::Config("imitation demo path is empty".into()));
            }
        }
        Ok(())
    }
}

/// Whole-trajectory similarity between an end-effector path and the demo.
pub fn imitation_cost(ee_path: &CartesianPath, imit: &ImitationSpec) -> Result<f64> {
    let raw = match imit.metric {
        MetricKind::Dtw => dtw(ee_path, &imit.demo, &DtwConfig::default())?,
        MetricKind::Mses => {
            let (pa, pb) = zero_pad_pair(ee_path, &imit.demo);
            mses(&dft2(&pa), &dft2(&pb))?
        }
        MetricKind::Mseps => {
            let (pa, pb) = zero_pad_pair(ee_path, &imit.demo);
            mseps(&dft2(&pa), &dft2(&pb))?
        }
    };
    Ok(imit.weight * raw)
}

fn state_term_cost(term: &StateTerm, path: &CartesianPath, i: usize, dt: f64) -> f64 {
    match term {
        StateTerm::ObstacleSphere {
            center,
            radius,
            weight,
        } => {
            let p = path.point(i);
            let d = ((p[0] - center[0]).powi(2)
                + (p[1] - center[1]).powi(2)
                + (p[2] - center[2]).powi(2))
            .sqrt();
            weight * (radius - d).max(0.0)
        }
        StateTerm::VelocityMagnitude {
            target_speed,
            weight,
        } => {
            let n = path.len();
            // forward difference; backward at the last row
            let (a, b) = if i + 1 < n { (i, i + 1) } else { (i - 1, i) };
            let speed = path.sq_dist(a, path, b).sqrt() / dt;
            weight * (speed - target_speed).powi(2)
        }
    }
}

/// Per-waypoint state cost vector: the sum of the state terms at each row
/// plus the imitation cost spread uniformly as q_d / N.
pub fn state_cost_rows(
    traj: &JointTrajectory,
    spec: &CostSpec,
    chain: &KinematicChain,
) -> Result<DVector<f64>> {
    let n = traj.num_waypoints();
    let mut rows = DVector::zeros(n);
    if spec.state_terms.is_empty() && spec.imitation.is_none() {
        return Ok(rows);
    }

    let ee_path = fk_path(chain, traj)?;

    for term in &spec.state_terms {
        for i in 0..n {
            rows[i] += state_term_cost(term, &ee_path, i, traj.dt());
        }
    }

    if let Some(imit) = &spec.imitation {
        let q_d = imitation_cost(&ee_path, imit)?;
        let spread = q_d / n as f64;
        for i in 0..n {
            rows[i] += spread;
        }
    }

    Ok(rows)
}

/// The full cost Q: the state cost rows summed, plus the weighted control
/// cost. This is the quantity the optimizers track and rank rollouts by.
pub fn total_cost(
    traj: &JointTrajectory,
    spec: &CostSpec,
    r: &PrecisionMatrix,
    chain: &KinematicChain,
) -> Result<f64> {
    let state: f64 = state_cost_rows(traj, spec, chain)?.sum();
    let control = if spec.control_weight > 0.0 {
        let c = if spec.per_joint_control {
            control_cost_per_joint(traj, r)?
        } else {
            control_cost(traj, r)?
        };
        spec.control_weight * c
    } else {
        0.0
    };
    Ok(state + control)
}

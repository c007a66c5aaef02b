//! Position-only forward and inverse kinematics for a 7-DOF serial arm
//! described by modified Denavit-Hartenberg parameters.
//!
//! One chain is built in (Panda-style geometry); alternatives load from a
//! small TOML file. Orientation is ignored throughout: imitation costs only
//! compare end-effector positions.

use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::Deserialize;
use std::path::Path;

use crate::error::{Error, Result};
use crate::trajectory::{CartesianPath, JointTrajectory};

pub const NUM_JOINTS: usize = 7;

/// One modified-DH row: link length `a` and offset `d` in meters, twist
/// `alpha` and joint angle offset `theta_offset` in radians.
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct DhRow {
    pub a: f64,
    pub d: f64,
    pub alpha: f64,
    #[serde(default)]
    pub theta_offset: f64,
}

#[derive(Debug, Clone)]
pub struct KinematicChain {
    dh_rows: [DhRow; NUM_JOINTS],
    joint_limits: [(f64, f64); NUM_JOINTS],
}

#[derive(Debug, Deserialize)]
struct ChainFile {
    dh_rows: Vec<DhRow>,
    joint_limits: Vec<[f64; 2]>,
}

impl KinematicChain {
    pub fn new(
        dh_rows: [DhRow; NUM_JOINTS],
        joint_limits: [(f64, f64); NUM_JOINTS],
    ) -> Result<Self> {
        for (i, (lo, hi)) in joint_limits.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(Error::Config(format!(
                    "joint {i}: lower limit {lo} must be below upper limit {hi}"
                )));
            }
        }
        Ok(Self {
            dh_rows,
            joint_limits,
        })
    }

    /// Built-in 7-DOF chain with Panda-style modified-DH values. The flange
    /// offset is folded into the last row's `d`, which is along the final
    /// joint axis and therefore does not disturb the wrist-roll geometry.
    pub fn panda() -> Self {
        const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;
        #[rustfmt::skip]
        let rows = [
            DhRow { a:  0.0,    d: 0.333, alpha:  0.0,     theta_offset: 0.0 },
            DhRow { a:  0.0,    d: 0.0,   alpha: -HALF_PI, theta_offset: 0.0 },
            DhRow { a:  0.0,    d: 0.316, alpha:  HALF_PI, theta_offset: 0.0 },
            DhRow { a:  0.0825, d: 0.0,   alpha:  HALF_PI, theta_offset: 0.0 },
            DhRow { a: -0.0825, d: 0.384, alpha: -HALF_PI, theta_offset: 0.0 },
            DhRow { a:  0.0,    d: 0.0,   alpha:  HALF_PI, theta_offset: 0.0 },
            DhRow { a:  0.088,  d: 0.107, alpha:  HALF_PI, theta_offset: 0.0 },
        ];
        let limits = [
            (-2.8973, 2.8973),
            (-1.7628, 1.7628),
            (-2.8973, 2.8973),
            (-3.0718, -0.0698),
            (-2.8973, 2.8973),
            (-0.0175, 3.7525),
            (-2.8973, 2.8973),
        ];
        Self::new(rows, limits).expect("built-in chain is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let parsed: ChainFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("chain file: {e}")))?;
        if parsed.dh_rows.len() != NUM_JOINTS {
            return Err(Error::Config(format!(
                "chain file must list exactly {NUM_JOINTS} dh_rows, found {}",
                parsed.dh_rows.len()
            )));
        }
        if parsed.joint_limits.len() != NUM_JOINTS {
            return Err(Error::Config(format!(
                "chain file must list exactly {NUM_JOINTS} joint_limits, found {}",
                parsed.joint_limits.len()
            )));
        }
        let mut rows = [parsed.dh_rows[0]; NUM_JOINTS];
        rows.copy_from_slice(&parsed.dh_rows);
        let mut limits = [(0.0, 0.0); NUM_JOINTS];
        for (slot, pair) in limits.iter_mut().zip(&parsed.joint_limits) {
            *slot = (pair[0], pair[1]);
        }
        Self::new(rows, limits)
    }

    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn dh_rows(&self) -> &[DhRow; NUM_JOINTS] {
        &self.dh_rows
    }

    pub fn joint_limits(&self) -> &[(f64, f64); NUM_JOINTS] {
        &self.joint_limits
    }

    /// Upper bound on the reach: the sum of all link lengths and offsets.
    pub fn reach(&self) -> f64 {
        self.dh_rows.iter().map(|r| r.a.abs() + r.d.abs()).sum()
    }

    pub fn within_limits(&self, q: &[f64; NUM_JOINTS]) -> bool {
        q.iter()
            .zip(&self.joint_limits)
            .all(|(v, (lo, hi))| v >= lo && v <= hi)
    }

    /// Midpoint of every joint range; a reasonable default IK seed.
    pub fn mid_configuration(&self) -> [f64; NUM_JOINTS] {
        let mut q = [0.0; NUM_JOINTS];
        for (slot, (lo, hi)) in q.iter_mut().zip(&self.joint_limits) {
            *slot = 0.5 * (lo + hi);
        }
        q
    }
}

/// End-effector position for one joint configuration, folding the modified-DH
/// transforms left to right.
pub fn fk_point(chain: &KinematicChain, q: &[f64; NUM_JOINTS]) -> Vector3<f64> {
    let mut rot = Matrix3::<f64>::identity();
    let mut pos = Vector3::<f64>::zeros();
    for (row, &qi) in chain.dh_rows.iter().zip(q.iter()) {
        let theta = qi + row.theta_offset;
        let (st, ct) = theta.sin_cos();
        let (sa, ca) = row.alpha.sin_cos();
        // modified-DH link transform: RotX(alpha) TransX(a) RotZ(theta) TransZ(d)
        let r = Matrix3::new(
            ct,
            -st,
            0.0, //
            st * ca,
            ct * ca,
            -sa, //
            st * sa,
            ct * sa,
            ca,
        );
        let t = Vector3::new(row.a, -row.d * sa, row.d * ca);
        pos += rot * t;
        rot *= r;
    }
    pos
}

/// Maps every row of a 7-joint trajectory through the forward kinematics.
pub fn fk_path(chain: &KinematicChain, traj: &JointTrajectory) -> Result<CartesianPath> {
    if traj.num_joints() != NUM_JOINTS {
        return Err(Error::DimensionMismatch(format!(
            "fk_path needs {} joints, trajectory has {}",
            NUM_JOINTS,
            traj.num_joints()
        )));
    }
    let n = traj.num_waypoints();
    let mut m = DMatrix::zeros(n, 3);
    for i in 0..n {
        let mut q = [0.0; NUM_JOINTS];
        for (j, slot) in q.iter_mut().enumerate() {
            *slot = traj.points()[(i, j)];
        }
        let p = fk_point(chain, &q);
        m[(i, 0)] = p.x;
        m[(i, 1)] = p.y;
        m[(i, 2)] = p.z;
    }
    CartesianPath::new(m)
}

const IK_DAMPING: f64 = 0.05;
const IK_STEP_CLAMP: f64 = 0.2;
const IK_MAX_ITERS: usize = 200;
const IK_CONVERGE_TOL: f64 = 1e-6;
const IK_ACCEPT_TOL: f64 = 1e-4;
const JACOBIAN_EPS: f64 = 1e-6;

/// Position Jacobian by central finite differences.
fn position_jacobian(chain: &KinematicChain, q: &[f64; NUM_JOINTS]) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(3, NUM_JOINTS);
    for j in 0..NUM_JOINTS {
        let mut qp = *q;
        let mut qm = *q;
        qp[j] += JACOBIAN_EPS;
        qm[j] -= JACOBIAN_EPS;
        let diff = (fk_point(chain, &qp) - fk_point(chain, &qm)) / (2.0 * JACOBIAN_EPS);
        jac[(0, j)] = diff.x;
        jac[(1, j)] = diff.y;
        jac[(2, j)] = diff.z;
    }
    jac
}

/// Damped-least-squares inverse kinematics for the end-effector position.
///
/// Iterates q += J^T (J J^T + damping^2 I)^-1 e with the step norm clamped,
/// until the residual drops below 1e-6 m or the iteration budget runs out.
/// Succeeds when the best residual seen is within 1e-4 m.
pub fn ik_point(
    chain: &KinematicChain,
    target: &Vector3<f64>,
    seed: &[f64; NUM_JOINTS],
) -> Result<[f64; NUM_JOINTS]> {
    if target.norm() > chain.reach() {
        return Err(Error::NoIkSolution {
            residual: target.norm() - chain.reach(),
        });
    }

    let mut q = *seed;
    let mut best_q = q;
    let mut best_residual = f64::INFINITY;

    for _ in 0..IK_MAX_ITERS {
        let err = target - fk_point(chain, &q);
        let residual = err.norm();
        if residual < best_residual {
            best_residual = residual;
            best_q = q;
        }
        if residual < IK_CONVERGE_TOL {
            break;
        }

        let jac = position_jacobian(chain, &q);
        let jjt = &jac * jac.transpose() + Matrix3::identity() * (IK_DAMPING * IK_DAMPING);
        let rhs = match jjt.lu().solve(&err) {
            Some(v) => v,
            None => return Err(Error::Numeric("singular damped normal matrix".into())),
        };
        let mut step = jac.transpose() * rhs;
        let norm = step.norm();
        if norm > IK_STEP_CLAMP {
            step *= IK_STEP_CLAMP / norm;
        }
        for (slot, d) in q.iter_mut().zip(step.iter()) {
            *slot += d;
        }
    }

    if best_residual <= IK_ACCEPT_TOL {
        Ok(best_q)
    } else {
        Err(Error::NoIkSolution {
            residual: best_residual,
        })
    }
}

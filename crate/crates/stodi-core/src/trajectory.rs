//! Trajectory containers and the precision matrix used for control costs
//! and smooth noise generation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A joint-space trajectory: an N x M matrix of joint positions (radians)
/// sampled at a uniform interval `dt`.
///
/// Row `i` is the configuration of all M joints at timestep `i`. The first
/// and last rows are treated as fixed boundary conditions by the optimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTrajectory {
    points: DMatrix<f64>,
    dt: f64,
}

impl JointTrajectory {
    /// Builds a trajectory, validating N >= 3, finite entries and dt > 0.
    pub fn new(points: DMatrix<f64>, dt: f64) -> Result<Self> {
        if points.nrows() < 3 {
            return Err(Error::InvalidSize(format!(
                "need at least 3 waypoints, got {}",
                points.nrows()
            )));
        }
        if points.ncols() == 0 {
            return Err(Error::InvalidSize("need at least 1 joint".into()));
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidSize(format!("dt must be positive, got {dt}")));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("joint trajectory entry".into()));
        }
        Ok(Self { points, dt })
    }

    /// Constant trajectory holding configuration `q` for `n` timesteps.
    pub fn constant(q: &[f64], n: usize, dt: f64) -> Result<Self> {
        let m = q.len();
        let points = DMatrix::from_fn(n, m, |_, j| q[j]);
        Self::new(points, dt)
    }

    /// Number of waypoints N.
    pub fn num_waypoints(&self) -> usize {
        self.points.nrows()
    }

    /// Number of joints M.
    pub fn num_joints(&self) -> usize {
        self.points.ncols()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Motion duration T = (N - 1) * dt.
    pub fn duration(&self) -> f64 {
        (self.num_waypoints() - 1) as f64 * self.dt
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    /// Joint configuration at timestep `i` as a plain vector.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.points.row(i).iter().copied().collect()
    }

    /// Sums the joint values per timestep, restricted to interior waypoints.
    /// This is the operand of the control cost quadratic form.
    pub fn interior_row_sums(&self) -> DVector<f64> {
        let n = self.num_waypoints();
        DVector::from_fn(n - 2, |i, _| self.points.row(i + 1).sum())
    }

    /// Interior block (rows 1..N-1) of one joint column.
    pub fn interior_column(&self, joint: usize) -> DVector<f64> {
        let n = self.num_waypoints();
        DVector::from_fn(n - 2, |i, _| self.points[(i + 1, joint)])
    }

    /// Returns a copy offset by a full N x M matrix (used to form noisy
    /// rollouts; the offset's endpoint rows are zero by construction).
    pub fn offset_by(&self, eps: &DMatrix<f64>) -> Result<Self> {
        if eps.nrows() != self.points.nrows() || eps.ncols() != self.points.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "offset is {}x{}, trajectory is {}x{}",
                eps.nrows(),
                eps.ncols(),
                self.points.nrows(),
                self.points.ncols()
            )));
        }
        Self::new(&self.points + eps, self.dt)
    }

    /// Returns a copy with `delta` added to the interior rows; the first and
    /// last rows are left untouched.
    pub fn with_interior_delta(&self, delta: &DMatrix<f64>) -> Result<Self> {
        let n = self.num_waypoints();
        let m = self.num_joints();
        if delta.nrows() != n - 2 || delta.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "interior delta is {}x{}, expected {}x{}",
                delta.nrows(),
                delta.ncols(),
                n - 2,
                m
            )));
        }
        let mut points = self.points.clone();
        for i in 0..n - 2 {
            for j in 0..m {
                points[(i + 1, j)] += delta[(i, j)];
            }
        }
        Self::new(points, self.dt)
    }
}

/// An end-effector path: an N x 3 matrix of Cartesian positions (meters),
/// columns x, y, z.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianPath {
    points: DMatrix<f64>,
}

impl CartesianPath {
    pub fn new(points: DMatrix<f64>) -> Result<Self> {
        if points.ncols() != 3 {
            return Err(Error::DimensionMismatch(format!(
                "cartesian path needs 3 columns, got {}",
                points.ncols()
            )));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("cartesian path entry".into()));
        }
        Ok(Self { points })
    }

    pub fn from_rows(rows: &[[f64; 3]]) -> Self {
        let points = DMatrix::from_fn(rows.len(), 3, |i, j| rows[i][j]);
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn point(&self, i: usize) -> [f64; 3] {
        [
            self.points[(i, 0)],
            self.points[(i, 1)],
            self.points[(i, 2)],
        ]
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    /// Squared Euclidean distance between row `i` of `self` and row `j` of `other`.
    pub fn sq_dist(&self, i: usize, other: &CartesianPath, j: usize) -> f64 {
        let mut acc = 0.0;
        for c in 0..3 {
            let d = self.points[(i, c)] - other.points[(j, c)];
            acc += d * d;
        }
        acc
    }

    /// Total energy sum_i ||p_i||^2.
    pub fn energy(&self) -> f64 {
        self.points.iter().map(|v| v * v).sum()
    }

    /// Root mean squared row distance to `other` (paths must have equal length).
    pub fn rmse(&self, other: &CartesianPath) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "rmse needs equal lengths, got {} and {}",
                self.len(),
                other.len()
            )));
        }
        let acc: f64 = (0..self.len()).map(|i| self.sq_dist(i, other, i)).sum();
        Ok((acc / self.len() as f64).sqrt())
    }
}

/// The control-cost matrix R over the N-2 interior waypoints, together with
/// its inverse and a factor of the inverse used to draw smooth noise.
///
/// R = A^T A where A is the (N_int + 2) x N_int second-order finite-difference
/// operator with clamped zero boundary conditions, scaled by 1/dt^2. The Gram
/// construction makes R symmetric positive definite, so noise drawn from
/// N(0, R^-1) is smooth and vanishes at the trajectory endpoints.
#[derive(Debug, Clone)]
pub struct PrecisionMatrix {
    r: DMatrix<f64>,
    r_inv: DMatrix<f64>,
    noise_factor: DMatrix<f64>,
    num_waypoints: usize,
    dt: f64,
}

impl PrecisionMatrix {
    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn r_inv(&self) -> &DMatrix<f64> {
        &self.r_inv
    }

    /// Factor L with L L^T = R^-1, suitable for sampling N(0, R^-1) as L z.
    pub fn noise_factor(&self) -> &DMatrix<f64> {
        &self.noise_factor
    }

    /// Full trajectory length N this matrix was built for.
    pub fn num_waypoints(&self) -> usize {
        self.num_waypoints
    }

    /// Interior waypoint count N_int = N - 2 (the dimension of R).
    pub fn interior_len(&self) -> usize {
        self.r.nrows()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// Second-order finite-difference operator mapping the N_int interior values
/// to N_int + 2 acceleration samples, with the boundary values clamped to
/// zero. Column c carries the stencil (1, -2, 1)/dt^2 at rows c, c+1, c+2.
fn accel_operator(n_int: usize, dt: f64) -> DMatrix<f64> {
    let inv_dt2 = 1.0 / (dt * dt);
    let mut a = DMatrix::zeros(n_int + 2, n_int);
    for c in 0..n_int {
        a[(c, c)] = inv_dt2;
        a[(c + 1, c)] = -2.0 * inv_dt2;
        a[(c + 2, c)] = inv_dt2;
    }
    a
}

/// Builds the precision matrix for an N-waypoint trajectory sampled at `dt`.
pub fn build_precision_matrix(n: usize, dt: f64) -> Result<PrecisionMatrix> {
    if n < 3 {
        return Err(Error::InvalidSize(format!(
            "precision matrix needs N >= 3, got {n}"
        )));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidSize(format!("dt must be positive, got {dt}")));
    }
    let n_int = n - 2;
    let a = accel_operator(n_int, dt);
    let r = a.transpose() * &a;

    // R is positive definite by construction; fall back to a clamped
    // eigendecomposition pseudo-inverse if the factorization ever fails.
    let r_inv = match r.clone().cholesky() {
        Some(chol) => chol.inverse(),
        None => pseudo_inverse_sym(&r)?,
    };

    let noise_factor = sym_factor(&r_inv)?;

    Ok(PrecisionMatrix {
        r,
        r_inv,
        noise_factor,
        num_waypoints: n,
        dt,
    })
}

/// Pseudo-inverse of a symmetric PSD matrix via eigendecomposition, clamping
/// eigenvalues below 1e-12 to zero.
fn pseudo_inverse_sym(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = m.clone().symmetric_eigen();
    let mut inv_vals = eig.eigenvalues.clone();
    for v in inv_vals.iter_mut() {
        *v = if *v < 1e-12 { 0.0 } else { 1.0 / *v };
    }
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&inv_vals) * q.transpose())
}

/// Symmetric square-root-style factor L with L L^T = m, via eigendecomposition
/// with eigenvalues below 1e-12 clamped to zero.
fn sym_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = m.clone().symmetric_eigen();
    let mut sqrt_vals = eig.eigenvalues.clone();
    for v in sqrt_vals.iter_mut() {
        if !v.is_finite() {
            return Err(Error::Numeric(
                "non-finite eigenvalue in noise factor".into(),
            ));
        }
        *v = if *v < 1e-12 { 0.0 } else { v.sqrt() };
    }
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals))
}

/// The control cost (1/2) s^T R s where s is the per-timestep sum of joint
/// values restricted to interior waypoints.
pub fn control_cost(traj: &JointTrajectory, r: &PrecisionMatrix) -> Result<f64> {
    if traj.num_waypoints() != r.num_waypoints() {
        return Err(Error::DimensionMismatch(format!(
            "trajectory has {} waypoints, precision matrix was built for {}",
            traj.num_waypoints(),
            r.num_waypoints()
        )));
    }
    let s = traj.interior_row_sums();
    Ok(0.5 * (r.r() * &s).dot(&s))
}

/// Per-joint control cost variant: (1/2) sum_j c_j^T R c_j over joint columns.
pub fn control_cost_per_joint(traj: &JointTrajectory, r: &PrecisionMatrix) -> Result<f64> {
    if traj.num_waypoints() != r.num_waypoints() {
        return Err(Error::DimensionMismatch(format!(
            "trajectory has {} waypoints, precision matrix was built for {}",
            traj.num_waypoints(),
            r.num_waypoints()
        )));
    }
    let mut acc = 0.0;
    for j in 0..traj.num_joints() {
        let c = traj.interior_column(j);
        acc += 0.5 * (r.r() * &c).dot(&c);
    }
    Ok(acc)
}

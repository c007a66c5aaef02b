//! Stochastic trajectory optimization for demonstration imitation.
//!
//! The library optimizes joint-space trajectories of a 7-DOF arm so that the
//! end-effector path imitates a demonstration while optionally trading off
//! state and control costs. Two stochastic optimizers are provided: the
//! STOMP-style single-trajectory update, and STODI, which categorizes the
//! iterate into best / distal / proximal trajectories and reuses low-cost
//! rollouts for a more stable sampled gradient.
//!
//! Trajectory similarity can be measured in the time domain (dynamic time
//! warping) or in the frequency domain (MSE on spectra or power spectra of
//! the 2-D DFT), and demonstration paths can be cleaned up with spectral
//! filters before imitation.

pub mod costs;
pub mod denoise;
pub mod error;
pub mod experiment;
mod fft;
pub mod io;
pub mod kinematics;
pub mod metrics;
pub mod optimizer;
pub mod sampler;
pub mod trajectory;

#[cfg(test)]
mod test_support;

pub use costs::{CostSpec, ImitationSpec, MetricKind, StateTerm};
pub use denoise::{apply_filter, FilterKind, FilterSpec};
pub use error::{Error, Result};
pub use experiment::{generate_demo, run_comparison, DemoShape, ExperimentConfig};
pub use kinematics::{fk_path, fk_point, ik_point, KinematicChain, NUM_JOINTS};
pub use metrics::{
    dft2, dtw, mseps, mses, spectral_cross_term, zero_pad_pair, DtwConfig, PointDistance, Spectrum,
};
pub use optimizer::{
    run, stodi_iteration, stomp_step, AlgoKind, OptimizerState, RunResult, StodiConfig, Traces,
};
pub use sampler::{sample_noise, NoiseBatch};
pub use trajectory::{
    build_precision_matrix, control_cost, CartesianPath, JointTrajectory, PrecisionMatrix,
};

//! Seeded generation of the K smooth noise sequences added to rollout
//! trajectories. Each joint column of a sequence is drawn from N(0, R^-1)
//! over the interior waypoints; endpoint rows are exactly zero.
//!
//! Reproducibility contract: sequence k is drawn from ChaCha8 stream k of a
//! generator seeded with the batch seed, so batches are bit-identical for a
//! fixed (seed, K, M, scale, R) regardless of scheduling.

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::trajectory::PrecisionMatrix;

/// A batch of K noise matrices, each N x M with zero first and last rows.
#[derive(Debug, Clone)]
pub struct NoiseBatch {
    eps: Vec<DMatrix<f64>>,
    seed: u64,
    scale: f64,
}

impl NoiseBatch {
    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn eps(&self, k: usize) -> &DMatrix<f64> {
        &self.eps[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &DMatrix<f64>> {
        self.eps.iter()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// splitmix64 step; used to derive per-iteration seeds from a base seed.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws K noise sequences for an N-waypoint, M-joint trajectory.
pub fn sample_noise(
    r: &PrecisionMatrix,
    k: usize,
    m: usize,
    seed: u64,
    scale: f64,
) -> Result<NoiseBatch> {
    if k == 0 {
        return Err(Error::Config("noise batch needs K >= 1".into()));
    }
    if m == 0 {
        return Err(Error::Config("noise batch needs M >= 1".into()));
    }
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::Config(format!(
            "noise scale must be positive, got {scale}"
        )));
    }
    let n = r.num_waypoints();
    let n_int = r.interior_len();
    let factor = r.noise_factor();
    if factor.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("noise factor is not finite".into()));
    }

    let mut eps = Vec::with_capacity(k);
    for stream in 0..k {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream as u64);
        let mut mat = DMatrix::zeros(n, m);
        for joint in 0..m {
            let z = DVector::from_fn(n_int, |_, _| rng.sample::<f64, _>(StandardNormal));
            let col = factor * z * scale;
            for i in 0..n_int {
                mat[(i + 1, joint)] = col[i];
            }
        }
        eps.push(mat);
    }

    Ok(NoiseBatch { eps, seed, scale })
}

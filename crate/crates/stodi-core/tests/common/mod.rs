//! Helpers shared by the integration suites.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use stodi_core::trajectory::CartesianPath;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_path(rng: &mut ChaCha8Rng, len: usize) -> CartesianPath {
    let rows: Vec<[f64; 3]> = (0..len)
        .map(|_| {
            [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ]
        })
        .collect();
    CartesianPath::from_rows(&rows)
}

/// Two random paths sharing first and last points, as imitation pairs do.
pub fn endpoint_matched_pair(
    rng: &mut ChaCha8Rng,
    len_a: usize,
    len_b: usize,
) -> (CartesianPath, CartesianPath) {
    let a = random_path(rng, len_a);
    let mut rows: Vec<[f64; 3]> = (0..len_b)
        .map(|_| {
            [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ]
        })
        .collect();
    rows[0] = a.point(0);
    rows[len_b - 1] = a.point(len_a - 1);
    (a, CartesianPath::from_rows(&rows))
}

//! Shared generators for the unit tests.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::ops::Range;

use crate::trajectory::CartesianPath;

pub fn random_path(len: usize, seed: u64) -> CartesianPath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_path_in(&mut rng, len..len + 1)
}

pub fn random_path_in(rng: &mut ChaCha8Rng, len_range: Range<usize>) -> CartesianPath {
    let len = rng.random_range(len_range);
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

//! Shared fixtures for the criterion benchmarks in `benches/`.

use sgdg::project::plane_wave;
use sgdg::{CoeffVector, Space};

/// The plane wave used throughout the experiments, projected onto `space`.
pub fn wave_coefficients(space: &Space) -> CoeffVector {
    let wave: Vec<i64> = [1, 2, -1].iter().copied().cycle().take(space.dim).collect();
    plane_wave(space, &wave, 1.3, 0.4).expect("benchmark space fits in memory")
}

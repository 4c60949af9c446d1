//! Deterministic Monte Carlo hit counting.
//!
//! The sample range is cut into fixed chunks; chunk `c` draws from a ChaCha8
//! stream selected by `(seed, c)`. Hit counts are integers, so the total is
//! identical whatever the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const CHUNK: u64 = 16_384;

/// Number of samples for which `trial` returns true.
pub fn count_hits<F>(samples: u64, seed: u64, trial: F) -> u64
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len).filter(|_| trial(&mut rng)).count() as u64
        })
        .sum()
}

/// A hit-or-miss volume estimate over a sampling region of known volume.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HitEstimate {
    pub value: f64,
    pub stderr: f64,
    pub hits: u64,
    pub samples: u64,
}

impl HitEstimate {
    pub fn new(hits: u64, samples: u64, region_volume: f64) -> Self {
        if samples == 0 {
            return Self { value: 0.0, stderr: 0.0, hits, samples };
        }
        let p = hits as f64 / samples as f64;
        Self {
            value: region_volume * p,
            stderr: region_volume * (p * (1.0 - p) / samples as f64).sqrt(),
            hits,
            samples,
        }
    }
}

/// Uniform point of the axis-aligned box `[lo, hi]`.
pub fn uniform_in_box<R: rand::Rng>(rng: &mut R, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    lo.iter().zip(hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect()
}

/// Uniform point of the unit sphere `S^{n-1}` for n = 2 or 3.
pub fn uniform_on_sphere<R: rand::Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    match n {
        2 => vec![phi.cos(), phi.sin()],
        3 => {
            let z = 2.0 * rng.random::<f64>() - 1.0;
            let s = (1.0 - z * z).max(0.0).sqrt();
            vec![s * phi.cos(), s * phi.sin(), z]
        }
        _ => panic!("sphere sampling implemented for n = 2, 3 only"),
    }
}

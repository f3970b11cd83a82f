//! Seeded random streams. Every stream is a ChaCha8 keystream keyed by the
//! run seed and selected by a stream index, so per-point work can be
//! partitioned without sharing a generator.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform point on the unit sphere of `Cⁿ` (normalised complex Gaussian).
pub fn unit_direction<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

pub fn phase<R: Rng>(rng: &mut R) -> Complex64 {
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    Complex64::from_polar(1.0, theta)
}

//! Reproducible synthetic Satake-angle streams.
//!
//! Every stream is driven by a ChaCha8 generator seeded from the model seed and
//! consumes draws in ascending prime order, so a longer stream extends a shorter
//! one with the same seed.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EigenformError;
use crate::sums::sieve;

#[derive(Clone, Debug, PartialEq)]
pub enum AngleDistribution {
    /// Density `(2/π) sin²θ` on `[0, π]`.
    SatoTateSemicircle,
    /// Uniform on `[0, π]`.
    UniformAngle,
    /// Explicit angles, with an optional fallback for unlisted primes.
    FixedTable { angles: BTreeMap<u64, f64>, default: Option<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngleStreamModel {
    pub kind: AngleDistribution,
    pub seed: u64,
}

impl AngleStreamModel {
    pub fn semicircle(seed: u64) -> Self {
        Self { kind: AngleDistribution::SatoTateSemicircle, seed }
    }

    pub fn uniform(seed: u64) -> Self {
        Self { kind: AngleDistribution::UniformAngle, seed }
    }

    pub fn constant(theta: f64) -> Self {
        Self { kind: AngleDistribution::FixedTable { angles: BTreeMap::new(), default: Some(theta) }, seed: 0 }
    }
}

/// One Sato–Tate angle by rejection from the uniform law (acceptance rate 1/2).
pub fn semicircle_angle(rng: &mut impl Rng) -> f64 {
    loop {
        let theta = PI * rng.random::<f64>();
        let s = theta.sin();
        if rng.random::<f64>() < s * s {
            return theta;
        }
    }
}

/// Angles `θ_p ∈ [0, π]` for each prime in `primes` (ascending).
pub fn angles_for(model: &AngleStreamModel, primes: &[u64]) -> Result<Vec<f64>, EigenformError> {
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    primes
        .iter()
        .map(|&p| match &model.kind {
            AngleDistribution::SatoTateSemicircle => Ok(semicircle_angle(&mut rng)),
            AngleDistribution::UniformAngle => Ok(PI * rng.random::<f64>()),
            AngleDistribution::FixedTable { angles, default } => angles
                .get(&p)
                .copied()
                .or(*default)
                .ok_or(EigenformError::MissingCoefficient(p)),
        })
        .collect()
}

/// `(p, θ_p)` for all primes `p ≤ pmax`.
pub fn sample_angles(model: &AngleStreamModel, pmax: u64) -> Result<Vec<(u64, f64)>, EigenformError> {
    let primes = if pmax >= 2 { sieve(pmax).primes } else { Vec::new() };
    let angles = angles_for(model, &primes)?;
    Ok(primes.into_iter().zip(angles).collect())
}

/// Angle pairs `(θ₁, θ₂)` distributed as the eigenvalue angles of a Haar-random
/// element of USp(4): density proportional to
/// `(cos θ₁ − cos θ₂)² sin²θ₁ sin²θ₂` on `[0, π]²`.
///
/// Sampled by drawing both angles from the Sato–Tate law and accepting with
/// probability `(cos θ₁ − cos θ₂)² / 4`.
pub fn usp4_angle_pairs(seed: u64, count: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let t1 = semicircle_angle(&mut rng);
            let t2 = semicircle_angle(&mut rng);
            let gap = t1.cos() - t2.cos();
            if 4.0 * rng.random::<f64>() < gap * gap {
                break (t1, t2);
            }
        })
        .collect()
}

/// SplitMix64 finalizer, used to derive per-source seeds from an experiment seed.
pub fn mix_seed(global: u64, local: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix(global ^ splitmix(local))
}

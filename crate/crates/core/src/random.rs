//! Seeded randomness for settings, states and unitaries.
//!
//! Every stream is a ChaCha8 generator seeded from a `u64`. Sub-streams
//! (restarts, sampled terms, trials) use `seed + index` with wrapping
//! addition; see [`derive_seed`]. Records are reproducible on a given
//! platform; bit-equality across platforms is not promised.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{BlochVector, Mat2, MeasurementSettings, SettingPair, StateVector};
use crate::error::Result;

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derive_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_add(index)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Uniform direction on the sphere from a normalized Gaussian triple.
pub fn random_bloch<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    loop {
        let v = [gaussian(rng), gaussian(rng), gaussian(rng)];
        if let Some(b) = BlochVector::from_direction(v) {
            return b;
        }
    }
}

pub fn random_settings<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<MeasurementSettings> {
    let pairs = (0..n)
        .map(|_| SettingPair {
            a: random_bloch(rng),
            a_prime: random_bloch(rng),
        })
        .collect();
    MeasurementSettings::new(pairs)
}

/// Random settings with `a_j ⊥ a'_j` on every qubit.
pub fn random_orthogonal_settings<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> Result<MeasurementSettings> {
    let pairs = (0..n)
        .map(|_| {
            let a = random_bloch(rng);
            loop {
                let r = random_bloch(rng).to_array();
                let d = crate::algebra::dot3(r, a.to_array());
                let av = a.to_array();
                let perp = [r[0] - d * av[0], r[1] - d * av[1], r[2] - d * av[2]];
                if crate::algebra::norm3(perp) > 1e-3 {
                    let a_prime = BlochVector::from_direction(perp).expect("nonzero");
                    break SettingPair { a, a_prime };
                }
            }
        })
        .collect();
    MeasurementSettings::new(pairs)
}

/// Haar-distributed element of U(2): a uniform unit quaternion as SU(2)
/// times a uniform global phase.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    let q = loop {
        let q = [gaussian(rng), gaussian(rng), gaussian(rng), gaussian(rng)];
        let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            break q.map(|x| x / norm);
        }
    };
    let alpha = Complex64::new(q[0], q[1]);
    let beta = Complex64::new(q[2], q[3]);
    let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
    Mat2::new(alpha, -beta.conj(), beta, alpha.conj()) * phase
}

pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<StateVector> {
    let amps = (0..1usize << n)
        .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
        .collect();
    StateVector::normalized(n, amps)
}

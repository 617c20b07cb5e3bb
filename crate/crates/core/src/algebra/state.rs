//! Pure n-qubit states and the in-place single-qubit kernel.
//!
//! Amplitude index `i` is read as an n-bit string with qubit 1 as the most
//! significant bit, matching left-to-right tensor order `A_1 ⊗ ... ⊗ A_n`.

use num_complex::Complex64;

use super::pauli::Mat2;
use crate::error::{MerminError, Result};

/// Tolerance on `|Σ|amp|² - 1|` for a valid state.
pub const STATE_NORM_TOL: f64 = 1e-10;

/// Largest qubit count accepted for state vectors (2^24 amplitudes, 256 MiB).
pub const MAX_STATE_QUBITS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Builds a state, validating length `2^n` and unit norm.
    pub fn new(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_qubits(n)?;
        if amplitudes.len() != 1 << n {
            return Err(MerminError::DimensionMismatch {
                expected: 1 << n,
                found: amplitudes.len(),
            });
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > STATE_NORM_TOL {
            return Err(MerminError::Invalid(format!(
                "state norm² is {norm_sqr}, expected 1 within {STATE_NORM_TOL:e}"
            )));
        }
        Ok(Self { n, amplitudes })
    }

    /// Infers `n` from the length, which must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(MerminError::Invalid(format!(
                "state length {len} is not a power of two >= 2"
            )));
        }
        Self::new(len.trailing_zeros() as usize, amplitudes)
    }

    /// Scales an arbitrary nonzero vector to unit norm.
    pub fn normalized(n: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(MerminError::Invalid("cannot normalize a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::new(n, amplitudes)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_qubits(n)?;
        if index >= 1 << n {
            return Err(MerminError::Invalid(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amplitudes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(MerminError::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// Applies `U_1 ⊗ ... ⊗ U_n` and renormalizes away rounding drift.
    pub fn apply_local_unitaries(&self, unitaries: &[Mat2]) -> Result<StateVector> {
        if unitaries.len() != self.n {
            return Err(MerminError::DimensionMismatch {
                expected: self.n,
                found: unitaries.len(),
            });
        }
        let mut amps = self.amplitudes.clone();
        apply_product(&mut amps, self.n, unitaries);
        StateVector::normalized(self.n, amps)
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_STATE_QUBITS {
        return Err(MerminError::Invalid(format!(
            "qubit count {n} outside 1..={MAX_STATE_QUBITS}"
        )));
    }
    Ok(())
}

/// `Σ conj(a_i) b_i`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Applies `m` to qubit `j` (1-based) of an n-qubit amplitude array in place.
pub fn apply_single_qubit(amps: &mut [Complex64], n: usize, j: usize, m: &Mat2) {
    debug_assert!(j >= 1 && j <= n);
    debug_assert_eq!(amps.len(), 1 << n);
    let stride = 1usize << (n - j);
    let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    for block in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
            let (a0, a1) = (*u, *v);
            *u = m00 * a0 + m01 * a1;
            *v = m10 * a0 + m11 * a1;
        }
    }
}

/// Applies `ops[0] ⊗ ... ⊗ ops[n-1]` in place, one factor at a time.
pub fn apply_product(amps: &mut [Complex64], n: usize, ops: &[Mat2]) {
    debug_assert_eq!(ops.len(), n);
    for (idx, op) in ops.iter().enumerate() {
        apply_single_qubit(amps, n, idx + 1, op);
    }
}

/// `⟨φ| ops[0] ⊗ ... ⊗ ops[n-1] |φ⟩` without forming the 2^n × 2^n matrix.
pub fn product_expectation(state: &StateVector, ops: &[Mat2]) -> Result<Complex64> {
    if ops.len() != state.n() {
        return Err(MerminError::DimensionMismatch {
            expected: state.n(),
            found: ops.len(),
        });
    }
    let mut work = state.amplitudes().to_vec();
    apply_product(&mut work, state.n(), ops);
    Ok(inner(state.amplitudes(), &work))
}

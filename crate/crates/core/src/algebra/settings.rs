use serde::{Deserialize, Serialize};

use super::pauli::{pauli_observable, pauli_triple, sigma_x, sigma_y, BlochVector, LocalObservable, Mat2, PauliTriple};
use crate::error::{MerminError, Result};

/// One qubit's pair of measurement directions `(a_j, a'_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingPair {
    pub a: BlochVector,
    pub a_prime: BlochVector,
}

/// Measurement directions for every qubit, qubit 1 first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SettingPair>", into = "Vec<SettingPair>")]
pub struct MeasurementSettings {
    pairs: Vec<SettingPair>,
}

impl MeasurementSettings {
    pub fn new(pairs: Vec<SettingPair>) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(MerminError::Invalid(format!(
                "settings need at least 2 qubits, got {}",
                pairs.len()
            )));
        }
        Ok(Self { pairs })
    }

    pub fn from_vectors(pairs: Vec<(BlochVector, BlochVector)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(a, a_prime)| SettingPair { a, a_prime })
                .collect(),
        )
    }

    /// Mermin's original choice `A_j = σ_x`, `A'_j = σ_y` on every qubit.
    pub fn mermin_xy(n: usize) -> Result<Self> {
        Self::from_vectors(vec![(BlochVector::X, BlochVector::Y); n])
    }

    /// `A_j = U_j σ_x U_j†`, `A'_j = U_j σ_y U_j†`.
    pub fn rotated_xy(unitaries: &[Mat2]) -> Result<Self> {
        let pairs = unitaries
            .iter()
            .map(|u| {
                let ua = u * sigma_x() * u.adjoint();
                let ub = u * sigma_y() * u.adjoint();
                Ok((
                    BlochVector::from_observable(&ua)?,
                    BlochVector::from_observable(&ub)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_vectors(pairs)
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[SettingPair] {
        &self.pairs
    }

    /// Pair for qubit `j`, 1-based.
    pub fn pair(&self, j: usize) -> Result<&SettingPair> {
        if j == 0 || j > self.n() {
            return Err(MerminError::QubitOutOfRange {
                index: j,
                n: self.n(),
            });
        }
        Ok(&self.pairs[j - 1])
    }

    pub fn set_pair(&mut self, j: usize, pair: SettingPair) -> Result<()> {
        self.pair(j)?;
        self.pairs[j - 1] = pair;
        Ok(())
    }

    pub fn observables(&self) -> Vec<(LocalObservable, LocalObservable)> {
        self.pairs
            .iter()
            .map(|p| (pauli_observable(p.a), pauli_observable(p.a_prime)))
            .collect()
    }

    pub fn triples(&self) -> Vec<PauliTriple> {
        self.pairs
            .iter()
            .map(|p| pauli_triple(p.a, p.a_prime))
            .collect()
    }

    /// `A_j + i A'_j` for every qubit; `M_n` is `Im`-part of their tensor product.
    pub fn raising_factors(&self) -> Vec<Mat2> {
        let i = num_complex::Complex64::new(0.0, 1.0);
        self.pairs
            .iter()
            .map(|p| p.a.matrix() + p.a_prime.matrix() * i)
            .collect()
    }
}

impl TryFrom<Vec<SettingPair>> for MeasurementSettings {
    type Error = MerminError;

    fn try_from(pairs: Vec<SettingPair>) -> Result<Self> {
        Self::new(pairs)
    }
}

impl From<MeasurementSettings> for Vec<SettingPair> {
    fn from(s: MeasurementSettings) -> Self {
        s.pairs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::pauli::{identity2, max_abs_diff2};

    #[test]
    fn needs_two_qubits() {
        assert!(MeasurementSettings::mermin_xy(1).is_err());
        assert_eq!(MeasurementSettings::mermin_xy(3).unwrap().n(), 3);
    }

    #[test]
    fn identity_rotation_is_mermin_xy() {
        let s = MeasurementSettings::rotated_xy(&[identity2(); 4]).unwrap();
        assert_eq!(s, MeasurementSettings::mermin_xy(4).unwrap());
    }

    #[test]
    fn pair_indexing_is_one_based() {
        let s = MeasurementSettings::mermin_xy(2).unwrap();
        assert!(s.pair(0).is_err());
        assert!(s.pair(3).is_err());
        let p = s.pair(2).unwrap();
        assert!(max_abs_diff2(&p.a.matrix(), &sigma_x()) == 0.0);
    }
}

//! Single-qubit spin observables `a·σ` and the algebra of observable pairs.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MerminError, Result};

pub type Mat2 = Matrix2<Complex64>;
pub type Ket = Vector2<Complex64>;

/// Tolerance on `|‖a‖ - 1|` accepted for user-supplied Bloch vectors.
pub const UNIT_NORM_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity2() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, ONE)
}

pub fn sigma_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sigma_y() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn sigma_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

/// The three Pauli matrices in x, y, z order.
pub fn paulis() -> [Mat2; 3] {
    [sigma_x(), sigma_y(), sigma_z()]
}

/// `v·σ` for an arbitrary real 3-vector (no normalization).
pub fn spin_matrix(v: [f64; 3]) -> Mat2 {
    let [x, y, z] = v;
    Mat2::new(
        Complex64::new(z, 0.0),
        Complex64::new(x, -y),
        Complex64::new(x, y),
        Complex64::new(-z, 0.0),
    )
}

/// Real coefficients `v_k = Tr(σ_k m) / 2` of the traceless Hermitian part of `m`.
pub fn bloch_components(m: &Mat2) -> [f64; 3] {
    let x = (m[(0, 1)] + m[(1, 0)]).re / 2.0;
    let y = (m[(1, 0)] - m[(0, 1)]).im / 2.0;
    let z = (m[(0, 0)] - m[(1, 1)]).re / 2.0;
    [x, y, z]
}

pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Unit direction in R³ parameterizing the spin observable `a·σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochVector {
    x: f64,
    y: f64,
    z: f64,
}

impl BlochVector {
    pub const X: BlochVector = BlochVector {
        x: 1.0,
        y: 0.0,
        z: 0.0,
    };
    pub const Y: BlochVector = BlochVector {
        x: 0.0,
        y: 1.0,
        z: 0.0,
    };
    pub const Z: BlochVector = BlochVector {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    /// Validates unit norm within [`UNIT_NORM_TOL`]. The components are kept
    /// as given; nothing is renormalized.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = norm3([x, y, z]);
        let deviation = (norm - 1.0).abs();
        if !norm.is_finite() || deviation > UNIT_NORM_TOL {
            return Err(MerminError::NonUnitVector {
                x,
                y,
                z,
                deviation,
            });
        }
        Ok(Self { x, y, z })
    }

    /// Normalizes a direction; `None` when the norm is below `1e-14`.
    pub fn from_direction(v: [f64; 3]) -> Option<Self> {
        let norm = norm3(v);
        if !norm.is_finite() || norm < 1e-14 {
            return None;
        }
        Some(Self {
            x: v[0] / norm,
            y: v[1] / norm,
            z: v[2] / norm,
        })
    }

    /// Bloch vector of a traceless Hermitian unitary, e.g. `U σ_x U†`.
    pub fn from_observable(m: &Mat2) -> Result<Self> {
        let [x, y, z] = bloch_components(m);
        Self::new(x, y, z)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        dot3(self.to_array(), other.to_array())
    }

    pub fn cross(&self, other: &BlochVector) -> [f64; 3] {
        cross3(self.to_array(), other.to_array())
    }

    pub fn matrix(&self) -> Mat2 {
        spin_matrix(self.to_array())
    }
}

impl TryFrom<[f64; 3]> for BlochVector {
    type Error = MerminError;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<BlochVector> for [f64; 3] {
    fn from(v: BlochVector) -> Self {
        v.to_array()
    }
}

/// A ±1-valued spin observable on one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalObservable {
    pub matrix: Mat2,
    pub source: BlochVector,
}

pub fn pauli_observable(a: BlochVector) -> LocalObservable {
    LocalObservable {
        matrix: a.matrix(),
        source: a,
    }
}

/// The pair `(A, A')` together with `(A, A') = a·a'` and `A'' = (a×a')·σ`.
///
/// `A A' = dot·I + i A''` and `A' A = dot·I - i A''`; the operator norm of
/// `A''` is `√(1 - dot²)`, so `A''` is not unit unless the pair is orthogonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTriple {
    pub a: LocalObservable,
    pub a_prime: LocalObservable,
    pub dot: f64,
    pub cross: [f64; 3],
    pub a_double_prime: Mat2,
}

impl PauliTriple {
    pub fn commutator(&self) -> Mat2 {
        self.a.matrix * self.a_prime.matrix - self.a_prime.matrix * self.a.matrix
    }

    pub fn anticommutator(&self) -> Mat2 {
        self.a.matrix * self.a_prime.matrix + self.a_prime.matrix * self.a.matrix
    }

    /// Operator norm of `A''`, i.e. `‖a×a'‖`.
    pub fn double_prime_norm(&self) -> f64 {
        norm3(self.cross)
    }
}

pub fn pauli_triple(a: BlochVector, a_prime: BlochVector) -> PauliTriple {
    let cross = a.cross(&a_prime);
    PauliTriple {
        a: pauli_observable(a),
        a_prime: pauli_observable(a_prime),
        dot: a.dot(&a_prime),
        cross,
        a_double_prime: spin_matrix(cross),
    }
}

/// Normalized +1 eigenvector of `c·σ` for a unit direction `c`. The
/// branch avoids the vanishing component near the poles.
pub fn plus_eigenvector(c: [f64; 3]) -> Ket {
    let [x, y, z] = c;
    let v = if z >= 0.0 {
        Ket::new(Complex64::new(1.0 + z, 0.0), Complex64::new(x, y))
    } else {
        Ket::new(Complex64::new(x, -y), Complex64::new(1.0 - z, 0.0))
    };
    v / Complex64::new(v.norm(), 0.0)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff2(a: &Mat2, b: &Mat2) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const TOL: f64 = 1e-12;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_observables_are_paulis() {
        let z = pauli_observable(BlochVector::new(0.0, 0.0, 1.0).unwrap());
        assert_eq!(z.matrix, Mat2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)));
        let x = pauli_observable(BlochVector::new(1.0, 0.0, 0.0).unwrap());
        assert_eq!(x.matrix, Mat2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)));
        let y = pauli_observable(BlochVector::new(0.0, 1.0, 0.0).unwrap());
        assert_eq!(y.matrix, Mat2::new(c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)));
    }

    #[test]
    fn non_unit_vectors_are_rejected() {
        assert!(matches!(
            BlochVector::new(1.0, 1.0, 0.0),
            Err(MerminError::NonUnitVector { .. })
        ));
        assert!(BlochVector::new(1.0 + 1e-8, 0.0, 0.0).is_err());
        assert!(BlochVector::new(1.0 + 1e-10, 0.0, 0.0).is_ok());
        assert!(BlochVector::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(BlochVector::from_direction([0.0, 0.0, 0.0]).is_none());
    }

    #[test]
    fn triple_of_orthogonal_axes() {
        let t = pauli_triple(BlochVector::X, BlochVector::Y);
        assert_eq!(t.dot, 0.0);
        assert!(max_abs_diff2(&t.a_double_prime, &sigma_z()) < TOL);
    }

    #[test]
    fn triple_of_parallel_vectors() {
        let t = pauli_triple(BlochVector::X, BlochVector::X);
        assert_eq!(t.dot, 1.0);
        assert!(t.a_double_prime.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn triple_at_sixty_degrees() {
        let theta = PI / 3.0;
        let ap = BlochVector::new(theta.cos(), theta.sin(), 0.0).unwrap();
        let t = pauli_triple(BlochVector::X, ap);
        assert!((t.dot - 0.5).abs() < TOL);
        // A'' = (a×a')·σ = sin θ σ_z here; operator norm from the singular values.
        let m = t.a_double_prime;
        let svd = m.svd(false, false);
        let op_norm = svd.singular_values.max();
        assert!((op_norm - 0.75f64.sqrt()).abs() < TOL);
        // direct arithmetic: A A' - dot I = i A''
        let lhs = t.a.matrix * t.a_prime.matrix - identity2() * c(t.dot, 0.0);
        assert!(max_abs_diff2(&lhs, &(m * I)) < TOL);
    }

    #[test]
    fn bloch_components_round_trip() {
        let v = [0.3, -0.4, 0.2];
        let back = bloch_components(&spin_matrix(v));
        for k in 0..3 {
            assert!((back[k] - v[k]).abs() < TOL);
        }
    }

    #[test]
    fn serde_validates() {
        let ok: BlochVector = serde_json_like([0.0, 0.6, 0.8]).unwrap();
        assert_eq!(ok.to_array(), [0.0, 0.6, 0.8]);
        assert!(serde_json_like([0.0, 0.6, 0.9]).is_err());
    }

    fn serde_json_like(v: [f64; 3]) -> Result<BlochVector> {
        BlochVector::try_from(v)
    }
}

//! Maximal violation of the Mermin inequality characterizes GHZ states up to
//! local unitaries. This module turns the necessity argument into checks:
//!
//! 1. a maximal violation forces `a_j ⊥ a'_j` on every qubit
//!    ([`orthogonality_defects`], [`norm_bound_scalar`]);
//! 2. then `(A_j, A'_j, A''_j)` obey the Pauli relations, and in the
//!    eigenbasis of `A''_j` ([`double_prime_basis`]) the top eigenspace of
//!    `M_n²` is spanned by `|0…0⟩` and `|1…1⟩` ([`max_eigenspace_structure`]);
//! 3. the `+2^(n-1)` eigenvector has equal weights with a fixed relative
//!    phase, from which the unitaries `U_j` with `|φ⟩ = ⊗U_j |GHZ⟩` are
//!    assembled ([`extract_ghz_lu`]).

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    apply_product, hermitian_eigensystem, inner, norm3, plus_eigenvector, spin_matrix, Ket, Mat2,
    MeasurementSettings, StateVector,
};
use crate::error::{MerminError, Result};
use crate::mermin::{build_mermin_product_form, ghz_state, mermin_expectation, quantum_bound};

/// Default tolerances of the characterization procedures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Largest accepted `|a_j·a'_j|`.
    pub orth: f64,
    /// Allowed shortfall of `⟨M_n⟩` below `2^(n-1)`.
    pub viol: f64,
    /// Coefficient magnitudes in the double-prime product basis.
    pub coeff: f64,
    /// Radians, for the relative phase of the two surviving coefficients.
    pub phase: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            orth: 1e-8,
            viol: 1e-6,
            coeff: 1e-6,
            phase: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    /// `x_j = a_j·a'_j`, qubit 1 first.
    pub defects: Vec<f64>,
    pub max_abs_defect: f64,
}

impl OrthogonalityReport {
    /// First qubit (1-based) whose defect exceeds `tol`.
    pub fn first_violation(&self, tol: f64) -> Option<(usize, f64)> {
        self.defects
            .iter()
            .enumerate()
            .find(|(_, x)| x.abs() > tol)
            .map(|(j, &x)| (j + 1, x))
    }
}

pub fn orthogonality_defects(settings: &MeasurementSettings) -> OrthogonalityReport {
    let defects: Vec<f64> = settings.pairs().iter().map(|p| p.a.dot(&p.a_prime)).collect();
    let max_abs_defect = defects.iter().map(|x| x.abs()).fold(0.0, f64::max);
    OrthogonalityReport {
        defects,
        max_abs_defect,
    }
}

/// Upper bound on `‖M_n²‖` as a function of the defects `x_j`:
///
/// ```text
/// 2^(n-1) ( Σ_{|S| even} Π_{j∈S} √(1 - x_j²)  -  [n even] (-1)^(n/2) Π_j x_j )
/// ```
///
/// The even-subset sum runs over all even sizes including the empty set and
/// is evaluated as `(Π(1 + s_j) + Π(1 - s_j)) / 2`. Its maximum over
/// `[-1, 1]^n` is `2^(2(n-1))`, reached only at `x = 0`.
pub fn norm_bound_scalar(xs: &[f64]) -> Result<f64> {
    let n = xs.len();
    if n < 2 {
        return Err(MerminError::Invalid(format!("need at least 2 defects, got {n}")));
    }
    if let Some(x) = xs.iter().find(|x| !(x.abs() <= 1.0)) {
        return Err(MerminError::Invalid(format!("defect {x} outside [-1, 1]")));
    }
    let s: Vec<f64> = xs.iter().map(|x| (1.0 - x * x).max(0.0).sqrt()).collect();
    let plus: f64 = s.iter().map(|v| 1.0 + v).product();
    let minus: f64 = s.iter().map(|v| 1.0 - v).product();
    let mut inner_sum = 0.5 * (plus + minus);
    if n % 2 == 0 {
        let parity = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
        inner_sum -= parity * xs.iter().product::<f64>();
    }
    Ok(2f64.powi(n as i32 - 1) * inner_sum)
}

/// Eigenbasis of `A''_j` on one qubit, with the phase `α_j` such that
/// `A_j|0⟩_j = e^{-iα_j}|1⟩_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitBasis {
    pub ket0: Ket,
    pub ket1: Ket,
    pub alpha: f64,
}

impl QubitBasis {
    /// `V_j` with columns `ket0`, `ket1`: maps `|0⟩ ↦ |0⟩_j`, `|1⟩ ↦ |1⟩_j`.
    pub fn v_matrix(&self) -> Mat2 {
        Mat2::from_columns(&[self.ket0, self.ket1])
    }

    /// `A_j` rebuilt from its action on the basis:
    /// `e^{iα}|0⟩⟨1| + e^{-iα}|1⟩⟨0|`.
    pub fn reconstruct_a(&self) -> Mat2 {
        let e = Complex64::from_polar(1.0, self.alpha);
        self.ket0 * self.ket1.adjoint() * e + self.ket1 * self.ket0.adjoint() * e.conj()
    }

    /// `A'_j` rebuilt as `-i e^{iα}|0⟩⟨1| + i e^{-iα}|1⟩⟨0|`.
    pub fn reconstruct_a_prime(&self) -> Mat2 {
        let i = Complex64::new(0.0, 1.0);
        let e = Complex64::from_polar(1.0, self.alpha);
        self.ket0 * self.ket1.adjoint() * (-i * e) + self.ket1 * self.ket0.adjoint() * (i * e.conj())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoublePrimeBasis {
    pub qubits: Vec<QubitBasis>,
}

impl DoublePrimeBasis {
    pub fn n(&self) -> usize {
        self.qubits.len()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.qubits.iter().map(|q| q.alpha).collect()
    }

    pub fn v_matrices(&self) -> Vec<Mat2> {
        self.qubits.iter().map(QubitBasis::v_matrix).collect()
    }

    /// Same basis with `ket0 → e^{iβ0} ket0`, `ket1 → e^{iβ1} ket1` per
    /// qubit; `α_j` shifts to `α_j - β0 + β1` so the defining relations
    /// still hold.
    pub fn regauged(&self, phases: &[(f64, f64)]) -> Result<DoublePrimeBasis> {
        if phases.len() != self.n() {
            return Err(MerminError::DimensionMismatch {
                expected: self.n(),
                found: phases.len(),
            });
        }
        let qubits = self
            .qubits
            .iter()
            .zip(phases)
            .map(|(q, &(b0, b1))| QubitBasis {
                ket0: q.ket0 * Complex64::from_polar(1.0, b0),
                ket1: q.ket1 * Complex64::from_polar(1.0, b1),
                alpha: (q.alpha - b0 + b1).rem_euclid(TAU),
            })
            .collect();
        Ok(DoublePrimeBasis { qubits })
    }

    /// Coefficients `λ_ε = ⟨ε_1…ε_n|φ⟩` in the product basis `⊗|ε_j⟩_j`.
    pub fn coefficients(&self, state: &StateVector) -> Result<Vec<Complex64>> {
        if state.n() != self.n() {
            return Err(MerminError::DimensionMismatch {
                expected: self.n(),
                found: state.n(),
            });
        }
        let mut amps = state.amplitudes().to_vec();
        let adjoints: Vec<Mat2> = self.v_matrices().iter().map(|v| v.adjoint()).collect();
        apply_product(&mut amps, self.n(), &adjoints);
        Ok(amps)
    }
}

/// Fixes the free phase: the largest-magnitude component becomes real and
/// positive, ties (within 1e-12) going to the lower index.
fn fix_gauge(v: Ket) -> Ket {
    let (m0, m1) = (v[0].norm(), v[1].norm());
    let pivot = if m1 > m0 + 1e-12 { v[1] } else { v[0] };
    v * (pivot.conj() / pivot.norm())
}

fn check_orthogonal(settings: &MeasurementSettings, tol: f64) -> Result<OrthogonalityReport> {
    let report = orthogonality_defects(settings);
    if let Some((qubit, defect)) = report.first_violation(tol) {
        return Err(MerminError::NotOrthogonal { qubit, defect });
    }
    Ok(report)
}

/// Per-qubit eigenbasis of `A''_j/‖A''_j‖` and the phases `α_j`.
///
/// Requires every `|a_j·a'_j| ≤ tol_orth`. The relations
/// `A''|0⟩ = |0⟩`, `A''|1⟩ = -|1⟩`, `A|0⟩ = e^{-iα}|1⟩`, `A|1⟩ = e^{iα}|0⟩`,
/// `A'|0⟩ = ie^{-iα}|1⟩` and `A'|1⟩ = -ie^{iα}|0⟩` are verified to
/// `1e-9 + 2|a_j·a'_j|`.
pub fn double_prime_basis(settings: &MeasurementSettings, tol_orth: f64) -> Result<DoublePrimeBasis> {
    let report = check_orthogonal(settings, tol_orth)?;
    let i = Complex64::new(0.0, 1.0);
    let mut qubits = Vec::with_capacity(settings.n());
    for (idx, (pair, defect)) in settings.pairs().iter().zip(&report.defects).enumerate() {
        let qubit = idx + 1;
        let cross = pair.a.cross(&pair.a_prime);
        let len = norm3(cross);
        if len < 1e-12 {
            return Err(MerminError::NotOrthogonal {
                qubit,
                defect: *defect,
            });
        }
        let c = cross.map(|v| v / len);
        let ket0 = fix_gauge(plus_eigenvector(c));
        let ket1 = fix_gauge(plus_eigenvector(c.map(|v| -v)));

        let a = pair.a.matrix();
        let a_prime = pair.a_prime.matrix();
        let amp = (ket1.adjoint() * a * ket0)[(0, 0)];
        let alpha = (-amp.arg()).rem_euclid(TAU);
        let e = Complex64::from_polar(1.0, alpha);

        let tol = 1e-9 + 2.0 * defect.abs();
        let dp = spin_matrix(c);
        let checks: [(&'static str, Ket, Ket); 6] = [
            ("A''|0> = |0>", dp * ket0, ket0),
            ("A''|1> = -|1>", dp * ket1, -ket1),
            ("A|0> = e^{-i alpha}|1>", a * ket0, ket1 * e.conj()),
            ("A|1> = e^{i alpha}|0>", a * ket1, ket0 * e),
            ("A'|0> = i e^{-i alpha}|1>", a_prime * ket0, ket1 * (i * e.conj())),
            ("A'|1> = -i e^{i alpha}|0>", a_prime * ket1, ket0 * (-i * e)),
        ];
        for (equation, lhs, rhs) in checks {
            let err = (lhs - rhs).norm();
            if err > tol {
                return Err(MerminError::ExtractionCheck {
                    equation,
                    detail: format!("qubit {qubit}: residual {err:.3e} > {tol:.3e}"),
                });
            }
        }
        qubits.push(QubitBasis { ket0, ket1, alpha });
    }
    Ok(DoublePrimeBasis { qubits })
}

/// The `2^(2(n-1))` eigenspace of `M_n²`.
#[derive(Debug, Clone)]
pub struct EigenspaceStructure {
    pub eigenvalue: f64,
    pub dimension: usize,
    pub basis: Vec<StateVector>,
    /// Largest weight any basis vector puts outside `span{|0…0⟩_j, |1…1⟩_j}`
    /// of the double-prime product basis.
    pub leakage: f64,
}

/// Eigenvectors of the dense `M_n²` whose eigenvalue is within
/// `1e-8·2^(2(n-1))` of `2^(2(n-1))`, re-expressed in the double-prime basis.
pub fn max_eigenspace_structure(
    settings: &MeasurementSettings,
    tol_orth: f64,
) -> Result<EigenspaceStructure> {
    let n = settings.n();
    let basis_dp = double_prime_basis(settings, tol_orth)?;
    let m = build_mermin_product_form(settings)?;
    let m2 = m.compose(&m)?;
    let target = quantum_bound(n).powi(2);
    let es = hermitian_eigensystem(&m2)?;
    let basis: Vec<StateVector> = es
        .values
        .iter()
        .zip(es.vectors)
        .filter(|(v, _)| (*v - target).abs() <= 1e-8 * target)
        .map(|(_, vec)| vec)
        .collect();
    let last = (1usize << n) - 1;
    let mut leakage = 0.0f64;
    for v in &basis {
        let c = basis_dp.coefficients(v)?;
        let inside = c[0].norm_sqr() + c[last].norm_sqr();
        leakage = leakage.max((1.0 - inside).max(0.0));
    }
    Ok(EigenspaceStructure {
        eigenvalue: target,
        dimension: basis.len(),
        basis,
        leakage,
    })
}

/// Certificate that `|φ⟩ = U_1 ⊗ … ⊗ U_n |GHZ⟩`.
#[derive(Debug, Clone)]
pub struct ExtractionWitness {
    pub u: Vec<Mat2>,
    /// Basis changes `V_j`, `|0⟩ ↦ |0⟩_j`, `|1⟩ ↦ |1⟩_j`.
    pub v: Vec<Mat2>,
    pub alphas: Vec<f64>,
    pub phi: f64,
    pub theta: f64,
    /// `λ_{0…0}`.
    pub a_coeff: Complex64,
    /// `λ_{1…1}`.
    pub b_coeff: Complex64,
    pub max_other_coeff: f64,
    /// `|arg(b / (i a e^{-iΣα}))|`.
    pub phase_mismatch: f64,
    pub expectation: f64,
    /// `⟨φ|U_1⊗…⊗U_n|GHZ⟩`.
    pub overlap: Complex64,
    /// `1 - |overlap|`.
    pub fidelity_residual: f64,
}

impl ExtractionWitness {
    pub fn overlap_phase(&self) -> f64 {
        self.overlap.arg()
    }
}

/// Recovers `U_j` with `|φ⟩ = ⊗U_j |GHZ⟩` for a state that maximally
/// violates the Mermin inequality under `settings`, using the default
/// tolerances and gauge.
pub fn extract_ghz_lu(state: &StateVector, settings: &MeasurementSettings) -> Result<ExtractionWitness> {
    extract_ghz_lu_with(state, settings, &Tolerances::default())
}

pub fn extract_ghz_lu_with(
    state: &StateVector,
    settings: &MeasurementSettings,
    tol: &Tolerances,
) -> Result<ExtractionWitness> {
    let basis = double_prime_basis(settings, tol.orth)?;
    extract_with_basis(state, settings, &basis, tol)
}

/// Extraction against an explicit double-prime basis (any gauge).
pub fn extract_with_basis(
    state: &StateVector,
    settings: &MeasurementSettings,
    basis: &DoublePrimeBasis,
    tol: &Tolerances,
) -> Result<ExtractionWitness> {
    let n = settings.n();
    if n < 3 {
        return Err(MerminError::Invalid(format!(
            "GHZ characterization holds for n >= 3, got n = {n}"
        )));
    }
    if basis.n() != n {
        return Err(MerminError::DimensionMismatch {
            expected: n,
            found: basis.n(),
        });
    }
    check_orthogonal(settings, tol.orth)?;

    let expectation = mermin_expectation(state, settings)?;
    let required = quantum_bound(n) - tol.viol;
    if !(expectation >= required) {
        return Err(MerminError::NotMaximalViolator {
            value: expectation,
            required,
        });
    }

    let coeffs = basis.coefficients(state)?;
    let last = coeffs.len() - 1;
    let (a, b) = (coeffs[0], coeffs[last]);
    let max_other_coeff = coeffs[1..last].iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max_other_coeff > tol.coeff {
        return Err(MerminError::ExtractionCheck {
            equation: "state = a|0...0> + b|1...1>",
            detail: format!("other coefficient of magnitude {max_other_coeff:.3e} > {:.1e}", tol.coeff),
        });
    }
    for (name, c) in [("|a|", a), ("|b|", b)] {
        let dev = (c.norm() - FRAC_1_SQRT_2).abs();
        if dev > tol.coeff {
            return Err(MerminError::ExtractionCheck {
                equation: "|a| = |b| = 1/sqrt(2)",
                detail: format!("{name} = {} deviates by {dev:.3e}", c.norm()),
            });
        }
    }

    let alphas = basis.alphas();
    let alpha_sum: f64 = alphas.iter().sum();
    let i = Complex64::new(0.0, 1.0);
    let predicted_b = i * a * Complex64::from_polar(1.0, -alpha_sum);
    let phase_mismatch = (b / predicted_b).arg().abs();
    if phase_mismatch > tol.phase {
        return Err(MerminError::ExtractionCheck {
            equation: "i a e^{-i sum alpha} = b",
            detail: format!("phase mismatch {phase_mismatch:.3e} rad > {:.1e}", tol.phase),
        });
    }

    let sqrt2 = std::f64::consts::SQRT_2;
    let phi = (a * sqrt2).arg().rem_euclid(TAU);
    let theta = (b * sqrt2 / i).arg().rem_euclid(TAU);

    let v = basis.v_matrices();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut u = v.clone();
    u[0] = v[0] * Mat2::new(Complex64::from_polar(1.0, phi), zero, zero, one);
    u[1] = v[1] * Mat2::new(one, zero, zero, Complex64::from_polar(1.0, theta));

    let mut image = ghz_state(n)?.into_amplitudes();
    apply_product(&mut image, n, &u);
    let overlap = inner(state.amplitudes(), &image);

    Ok(ExtractionWitness {
        u,
        v,
        alphas,
        phi,
        theta,
        a_coeff: a,
        b_coeff: b,
        max_other_coeff,
        phase_mismatch,
        expectation,
        fidelity_residual: 1.0 - overlap.norm(),
        overlap,
    })
}

/// Forward direction of the characterization: `⊗U_j |GHZ⟩` together with the
/// rotated settings `A_j = U_j σ_x U_j†`, `A'_j = U_j σ_y U_j†`, under which
/// it reaches `⟨M_n⟩ = 2^(n-1)`.
pub fn lu_ghz_instance(unitaries: &[Mat2]) -> Result<(StateVector, MeasurementSettings)> {
    let n = unitaries.len();
    let state = ghz_state(n)?.apply_local_unitaries(unitaries)?;
    let settings = MeasurementSettings::rotated_xy(unitaries)?;
    Ok((state, settings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{
        hermitian_eigensystem, identity2, max_abs_diff2, sigma_x, BlochVector,
        DenseOperator,
    };
    use crate::mermin::w_state;
    use crate::random::{random_orthogonal_settings, random_unitary, rng_from_seed};

    /// Direct subset enumeration of the scalar bound.
    fn bound_by_subsets(xs: &[f64]) -> f64 {
        let n = xs.len();
        let mut sum = 0.0;
        for mask in 0u32..1 << n {
            if mask.count_ones() % 2 == 0 {
                sum += (0..n)
                    .filter(|j| mask >> j & 1 == 1)
                    .map(|j| (1.0 - xs[j] * xs[j]).sqrt())
                    .product::<f64>();
            }
        }
        if n % 2 == 0 {
            let parity = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
            sum -= parity * xs.iter().product::<f64>();
        }
        2f64.powi(n as i32 - 1) * sum
    }

    #[test]
    fn defects() {
        let r = orthogonality_defects(&MeasurementSettings::mermin_xy(4).unwrap());
        assert!(r.defects.iter().all(|&x| x == 0.0));
        let s = MeasurementSettings::from_vectors(vec![(BlochVector::X, BlochVector::X); 3]).unwrap();
        assert_eq!(orthogonality_defects(&s).defects, vec![1.0; 3]);
        let ang = 80f64.to_radians();
        let ap = BlochVector::new(ang.cos(), ang.sin(), 0.0).unwrap();
        let s = MeasurementSettings::from_vectors(vec![(BlochVector::X, ap), (BlochVector::X, BlochVector::Y)])
            .unwrap();
        let r = orthogonality_defects(&s);
        assert!((r.defects[0] - 0.17364817766693033).abs() < 1e-15);
        assert_eq!(r.first_violation(0.1).map(|(q, _)| q), Some(1));
    }

    #[test]
    fn scalar_bound_values() {
        assert_eq!(norm_bound_scalar(&[0.0; 4]).unwrap(), 64.0);
        assert_eq!(norm_bound_scalar(&[1.0; 4]).unwrap(), 0.0);
        assert_eq!(norm_bound_scalar(&[0.0; 5]).unwrap(), 256.0);
        assert!(norm_bound_scalar(&[1.5, 0.0, 0.0]).is_err());
        assert!(norm_bound_scalar(&[f64::NAN, 0.0, 0.0]).is_err());
        let mut rng = rng_from_seed(1);
        use rand::Rng;
        for n in 2..=7 {
            for _ in 0..50 {
                let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
                let a = norm_bound_scalar(&xs).unwrap();
                let b = bound_by_subsets(&xs);
                assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
            }
        }
    }

    fn grid_unique_max(n: usize) {
        let steps: Vec<f64> = (0..=20).map(|k| -1.0 + 0.1 * k as f64).collect();
        let peak = norm_bound_scalar(&vec![0.0; n]).unwrap();
        assert_eq!(peak, 2f64.powi(2 * (n as i32 - 1)));
        let total = steps.len().pow(n as u32);
        for mut idx in 0..total {
            let mut xs = Vec::with_capacity(n);
            for _ in 0..n {
                xs.push(steps[idx % steps.len()]);
                idx /= steps.len();
            }
            let v = norm_bound_scalar(&xs).unwrap();
            if xs.iter().all(|x| x.abs() < 1e-12) {
                assert!((v - peak).abs() < 1e-9);
            } else {
                assert!(v < peak - 1e-9, "{xs:?} -> {v}");
            }
        }
    }

    #[test]
    fn scalar_bound_grid_even() {
        grid_unique_max(4);
    }

    #[test]
    fn scalar_bound_grid_odd() {
        grid_unique_max(3);
    }

    #[test]
    fn basis_for_xy() {
        let b = double_prime_basis(&MeasurementSettings::mermin_xy(3).unwrap(), 1e-8).unwrap();
        for q in &b.qubits {
            assert!((q.ket0 - Ket::new(1.0.into(), 0.0.into())).norm() < 1e-15);
            assert!((q.ket1 - Ket::new(0.0.into(), 1.0.into())).norm() < 1e-15);
            assert_eq!(q.alpha, 0.0);
        }
    }

    #[test]
    fn basis_for_yz_matches_eigensolver() {
        let s = MeasurementSettings::from_vectors(vec![(BlochVector::Y, BlochVector::Z); 3]).unwrap();
        let b = double_prime_basis(&s, 1e-8).unwrap();
        let es = hermitian_eigensystem(
            &DenseOperator::from_matrix(1, nalgebra::DMatrix::from_fn(2, 2, |r, c| sigma_x()[(r, c)]))
                .unwrap(),
        )
        .unwrap();
        let q = b.qubits[0];
        for (ket, vec) in [(q.ket0, &es.vectors[0]), (q.ket1, &es.vectors[1])] {
            let overlap = ket[0].conj() * vec.amplitudes()[0] + ket[1].conj() * vec.amplitudes()[1];
            assert!((overlap.norm() - 1.0).abs() < 1e-12);
        }
        let h = FRAC_1_SQRT_2;
        assert!((q.ket0 - Ket::new(h.into(), h.into())).norm() < 1e-15);
        assert!((q.ket1 - Ket::new(h.into(), (-h).into())).norm() < 1e-15);
    }

    #[test]
    fn basis_round_trip_random() {
        let mut rng = rng_from_seed(4);
        for _ in 0..50 {
            let s = random_orthogonal_settings(3, &mut rng).unwrap();
            let b = double_prime_basis(&s, 1e-8).unwrap();
            for (q, p) in b.qubits.iter().zip(s.pairs()) {
                assert!(max_abs_diff2(&q.reconstruct_a(), &p.a.matrix()) < 1e-10);
                assert!(max_abs_diff2(&q.reconstruct_a_prime(), &p.a_prime.matrix()) < 1e-10);
                let v = q.v_matrix();
                assert!(max_abs_diff2(&(v.adjoint() * v), &identity2()) < 1e-12);
            }
        }
    }

    #[test]
    fn basis_rejects_non_orthogonal() {
        let ang = 80f64.to_radians();
        let ap = BlochVector::new(ang.cos(), ang.sin(), 0.0).unwrap();
        let s = MeasurementSettings::from_vectors(vec![(BlochVector::X, ap); 3]).unwrap();
        assert!(matches!(
            double_prime_basis(&s, 1e-8),
            Err(MerminError::NotOrthogonal { qubit: 1, .. })
        ));
    }

    #[test]
    fn eigenspace_xy() {
        for n in [3, 4] {
            let e = max_eigenspace_structure(&MeasurementSettings::mermin_xy(n).unwrap(), 1e-8).unwrap();
            assert_eq!(e.dimension, 2);
            assert!(e.leakage < 1e-10);
        }
        // n = 3 oracle: M₃² = 4(I + Z₁Z₂ + Z₁Z₃ + Z₂Z₃) is diagonal, and the
        // value 16 occurs only at |000⟩ and |111⟩.
        let diag: Vec<i32> = (0..8u32)
            .map(|i| {
                let z = |q: u32| if i >> (2 - q) & 1 == 0 { 1 } else { -1 };
                4 * (1 + z(0) * z(1) + z(0) * z(2) + z(1) * z(2))
            })
            .collect();
        let peaks: Vec<usize> = (0..8).filter(|&i| diag[i] == 16).collect();
        assert_eq!(peaks, vec![0, 7]);
    }

    #[test]
    fn eigenspace_random_orthogonal() {
        let mut rng = rng_from_seed(8);
        for _ in 0..50 {
            let s = random_orthogonal_settings(3, &mut rng).unwrap();
            let e = max_eigenspace_structure(&s, 1e-8).unwrap();
            assert_eq!(e.dimension, 2);
            assert!(e.leakage < 1e-9);
        }
    }

    #[test]
    fn extract_ghz_itself() {
        for n in 3..=6 {
            let w = extract_ghz_lu(&ghz_state(n).unwrap(), &MeasurementSettings::mermin_xy(n).unwrap())
                .unwrap();
            assert!(w.fidelity_residual < 1e-10);
            assert!(w.phi.abs() < 1e-12 && w.theta.abs() < 1e-12);
            for u in &w.u {
                assert!(max_abs_diff2(u, &identity2()) < 1e-12);
            }
            assert!((w.overlap - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn extract_random_lu_instances() {
        let mut rng = rng_from_seed(12);
        for n in 3..=6 {
            for _ in 0..10 {
                let us: Vec<Mat2> = (0..n).map(|_| random_unitary(&mut rng)).collect();
                let (state, settings) = lu_ghz_instance(&us).unwrap();
                let w = extract_ghz_lu(&state, &settings).unwrap();
                assert!(w.fidelity_residual < 1e-10, "{}", w.fidelity_residual);
                // the witness reproduces the state exactly, not just up to phase
                let rebuilt = ghz_state(n).unwrap().apply_local_unitaries(&w.u).unwrap();
                let diff: f64 = rebuilt
                    .amplitudes()
                    .iter()
                    .zip(state.amplitudes())
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max);
                assert!(diff < 1e-10);
            }
        }
    }

    #[test]
    fn w_state_is_rejected() {
        for n in 3..=5 {
            let err = extract_ghz_lu(&w_state(n).unwrap(), &MeasurementSettings::mermin_xy(n).unwrap())
                .unwrap_err();
            assert!(matches!(err, MerminError::NotMaximalViolator { .. }));
        }
    }

    #[test]
    fn extraction_rejects_non_orthogonal_and_small_n() {
        let ang = 80f64.to_radians();
        let ap = BlochVector::new(ang.cos(), ang.sin(), 0.0).unwrap();
        let s = MeasurementSettings::from_vectors(vec![(BlochVector::X, ap); 3]).unwrap();
        assert!(matches!(
            extract_ghz_lu(&ghz_state(3).unwrap(), &s),
            Err(MerminError::NotOrthogonal { .. })
        ));
        assert!(extract_ghz_lu(&ghz_state(2).unwrap(), &MeasurementSettings::mermin_xy(2).unwrap())
            .is_err());
    }

    #[test]
    fn gauge_independence() {
        use rand::Rng;
        let mut rng = rng_from_seed(99);
        for n in 3..=5 {
            let us: Vec<Mat2> = (0..n).map(|_| random_unitary(&mut rng)).collect();
            let (state, settings) = lu_ghz_instance(&us).unwrap();
            let basis = double_prime_basis(&settings, 1e-8).unwrap();
            let base = extract_with_basis(&state, &settings, &basis, &Tolerances::default()).unwrap();
            for _ in 0..10 {
                let phases: Vec<(f64, f64)> = (0..n)
                    .map(|_| (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)))
                    .collect();
                let g = basis.regauged(&phases).unwrap();
                let w = extract_with_basis(&state, &settings, &g, &Tolerances::default()).unwrap();
                assert!((w.fidelity_residual - base.fidelity_residual).abs() < 1e-10);
            }
        }
    }
}

//! The Bell-Mermin operator
//!
//! ```text
//! M_n = (1/2i) (⊗_j (A_j + i A'_j) - ⊗_j (A_j - i A'_j))
//! ```
//!
//! built two ways (product form and the signed sum over odd primed subsets),
//! evaluated without dense matrices, and checked against the closed form of
//! `M_n²` in terms of `A''_j = (a_j × a'_j)·σ`.

use itertools::Itertools;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    check_dense_cap, identity2, inner, apply_product, product_expectation, tensor_chain,
    DenseOperator, Mat2, MeasurementSettings, StateVector,
};
use crate::error::{MerminError, Result};

/// One product in the expansion of `M_n`: `A'_j` on the primed qubits, `A_j`
/// elsewhere, weighted by `sign = (-1)^((k-1)/2)` for `k` primed qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MerminTerm {
    /// Sorted 1-based qubit indices carrying `A'`.
    pub primed: Vec<usize>,
    pub sign: i8,
}

impl MerminTerm {
    /// Bit `j-1` set for each primed qubit `j`.
    pub fn primed_mask(&self) -> u64 {
        self.primed.iter().fold(0u64, |m, &j| m | 1 << (j - 1))
    }

    pub fn is_primed(&self, j: usize) -> bool {
        self.primed.binary_search(&j).is_ok()
    }

    /// The local factors of this term, qubit 1 first.
    pub fn factors(&self, settings: &MeasurementSettings) -> Vec<Mat2> {
        settings
            .pairs()
            .iter()
            .enumerate()
            .map(|(idx, p)| {
                if self.is_primed(idx + 1) {
                    p.a_prime.matrix()
                } else {
                    p.a.matrix()
                }
            })
            .collect()
    }
}

/// Sign of a term with `k` primed factors.
pub fn term_sign(k: usize) -> i8 {
    debug_assert!(k % 2 == 1);
    if (k - 1) / 2 % 2 == 0 {
        1
    } else {
        -1
    }
}

/// All odd-size primed subsets of `{1..n}`, `2^(n-1)` of them, grouped by
/// size and lexicographic within a size.
pub fn mermin_terms(n: usize) -> Result<Vec<MerminTerm>> {
    if n < 2 {
        return Err(MerminError::Invalid(format!("Mermin operator needs n >= 2, got {n}")));
    }
    if n > 63 {
        return Err(MerminError::Invalid(format!("n = {n} too large to enumerate")));
    }
    let mut terms = Vec::with_capacity(1 << (n - 1));
    for k in (1..=n).step_by(2) {
        let sign = term_sign(k);
        for primed in (1..=n).combinations(k) {
            terms.push(MerminTerm { primed, sign });
        }
    }
    Ok(terms)
}

/// Which construction to use for the dense operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuildForm {
    Product,
    Expansion,
}

pub fn build_mermin(settings: &MeasurementSettings, form: BuildForm) -> Result<DenseOperator> {
    match form {
        BuildForm::Product => build_mermin_product_form(settings),
        BuildForm::Expansion => build_mermin_expansion(settings),
    }
}

/// `(P - P†) / 2i` with `P = ⊗_j (A_j + i A'_j)`.
pub fn build_mermin_product_form(settings: &MeasurementSettings) -> Result<DenseOperator> {
    let n = settings.n();
    check_dense_cap("dense Mermin operator", n)?;
    let p = tensor_chain(&settings.raising_factors(), n)?.into_matrix();
    let half_over_i = Complex64::new(0.0, -0.5);
    let dim = p.nrows();
    let m = nalgebra::DMatrix::from_fn(dim, dim, |r, c| (p[(r, c)] - p[(c, r)].conj()) * half_over_i);
    DenseOperator::from_matrix(n, m)
}

/// Signed sum of the `2^(n-1)` tensor products, summed in [`mermin_terms`] order.
pub fn build_mermin_expansion(settings: &MeasurementSettings) -> Result<DenseOperator> {
    let n = settings.n();
    check_dense_cap("dense Mermin operator", n)?;
    let mut acc = DenseOperator::zeros(n)?;
    for term in mermin_terms(n)? {
        let product = tensor_chain(&term.factors(settings), n)?;
        acc.add_assign_scaled(&product, f64::from(term.sign));
    }
    Ok(acc)
}

fn check_state_matches(state: &StateVector, settings: &MeasurementSettings) -> Result<()> {
    if state.n() != settings.n() {
        return Err(MerminError::DimensionMismatch {
            expected: settings.n(),
            found: state.n(),
        });
    }
    Ok(())
}

/// Per-term correlators `⟨φ|⊗ local factors|φ⟩`, in [`mermin_terms`] order.
pub fn term_correlators(
    state: &StateVector,
    settings: &MeasurementSettings,
) -> Result<Vec<(MerminTerm, f64)>> {
    check_state_matches(state, settings)?;
    let n = settings.n();
    let terms = mermin_terms(n)?;
    Ok(terms
        .into_par_iter()
        .map(|term| {
            let mut work = state.amplitudes().to_vec();
            apply_product(&mut work, n, &term.factors(settings));
            let value = inner(state.amplitudes(), &work).re;
            (term, value)
        })
        .collect())
}

/// `⟨φ|M_n|φ⟩` as the signed sum of term correlators, each obtained by
/// applying its 2×2 factors to the amplitudes in place. Costs
/// `O(n 2^n)` per term; the sum is reduced in fixed term order, so the
/// result does not depend on the thread count.
pub fn mermin_expectation_matrix_free(
    state: &StateVector,
    settings: &MeasurementSettings,
) -> Result<f64> {
    Ok(term_correlators(state, settings)?
        .into_iter()
        .map(|(t, v)| f64::from(t.sign) * v)
        .sum())
}

/// `⟨φ|M_n|φ⟩ = Im ⟨φ|⊗_j (A_j + i A'_j)|φ⟩`: a single pass over the
/// product form, `O(n 2^n)` in total.
pub fn mermin_expectation(state: &StateVector, settings: &MeasurementSettings) -> Result<f64> {
    check_state_matches(state, settings)?;
    Ok(product_expectation(state, &settings.raising_factors())?.im)
}

/// Residual of the closed form of `M_n²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub max_abs_residual: f64,
    /// Frobenius norms of `M_n²` and of the assembled right-hand side.
    pub lhs_norm: f64,
    pub rhs_norm: f64,
}

/// Right-hand side of the `M_n²` identity:
///
/// ```text
/// 2^(n-1) Σ_{|S| even} Π_{j∈S} A''_j  -  [n even] (-1)^(n/2) 2^(n-1) Π_j (a_j·a'_j)
/// ```
///
/// with `A''_j` unnormalized. Each even subset contributes the tensor chain
/// with `A''_j` on `S` and identities elsewhere.
pub fn mermin_squared_rhs(settings: &MeasurementSettings) -> Result<DenseOperator> {
    let n = settings.n();
    check_dense_cap("dense Mermin operator", n)?;
    let triples = settings.triples();
    let scale = 2f64.powi(n as i32 - 1);
    let mut rhs = DenseOperator::zeros(n)?;
    for k in (0..=n).step_by(2) {
        for subset in (0..n).combinations(k) {
            let mut ops = vec![identity2(); n];
            for &j in &subset {
                ops[j] = triples[j].a_double_prime;
            }
            rhs.add_assign_scaled(&tensor_chain(&ops, n)?, scale);
        }
    }
    if n % 2 == 0 {
        let parity = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let dots: f64 = triples.iter().map(|t| t.dot).product();
        let id = DenseOperator::identity(n)?;
        rhs.add_assign_scaled(&id, -parity * scale * dots);
    }
    Ok(rhs)
}

/// Compares `M_n · M_n` (dense product) with [`mermin_squared_rhs`]. The
/// residual is reported, never asserted.
pub fn mermin_squared_identity_check(settings: &MeasurementSettings) -> Result<IdentityReport> {
    let m = build_mermin_product_form(settings)?;
    let lhs = m.compose(&m)?;
    let rhs = mermin_squared_rhs(settings)?;
    Ok(IdentityReport {
        max_abs_residual: lhs.max_abs_diff(&rhs)?,
        lhs_norm: lhs.matrix().norm(),
        rhs_norm: rhs.matrix().norm(),
    })
}

/// `(|0…0⟩ + i|1…1⟩)/√2`; note the relative phase `i`.
pub fn ghz_state(n: usize) -> Result<StateVector> {
    if n < 2 {
        return Err(MerminError::Invalid(format!("GHZ state needs n >= 2, got {n}")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    amps[0] = Complex64::new(h, 0.0);
    amps[(1 << n) - 1] = Complex64::new(0.0, h);
    StateVector::new(n, amps)
}

/// Equal superposition of the `n` weight-one bitstrings.
pub fn w_state(n: usize) -> Result<StateVector> {
    if n < 2 {
        return Err(MerminError::Invalid(format!("W state needs n >= 2, got {n}")));
    }
    let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for k in 0..n {
        amps[1 << k] = amp;
    }
    StateVector::new(n, amps)
}

/// Upper bound `2^(n-1)` on `‖M_n‖`: the expansion has that many unit-norm terms.
pub fn quantum_bound(n: usize) -> f64 {
    2f64.powi(n as i32 - 1)
}

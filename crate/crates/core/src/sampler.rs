//! Finite-shot estimates of `⟨M_n⟩` from simulated local measurements.
//!
//! For each term of the expansion every qubit is measured in the eigenbasis
//! of its factor (`A'_j` on primed qubits, `A_j` elsewhere). Outcome
//! probabilities are computed exactly from the state and the shot counts are
//! drawn multinomially. The RNG is ChaCha8; term `k` (in expansion order) of
//! a run seeded with `s` uses seed `s + k`.

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{apply_product, plus_eigenvector, Mat2, MeasurementSettings, StateVector};
use crate::error::{MerminError, Result};
use crate::mermin::{mermin_terms, term_sign, MerminTerm};
use crate::random::{derive_seed, rng_from_seed};

/// Number of shots per term, or exact outcome probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shots {
    Exact,
    Finite(u64),
}

/// Counts per outcome pattern. Index bit `n - j` set means qubit j read `-1`
/// (same ordering as amplitude indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub term: MerminTerm,
    pub counts: Vec<u64>,
    pub shots: u64,
    pub seed: u64,
}

impl ShotRecord {
    /// Sample mean of the product of outcomes.
    pub fn correlator(&self) -> f64 {
        let signed: i64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, &c)| if i.count_ones() % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum();
        signed as f64 / self.shots as f64
    }

    /// Standard error of [`correlator`](Self::correlator) from the unbiased
    /// sample variance of the ±1 products; zero for a single shot.
    pub fn std_error(&self) -> f64 {
        let n = self.shots as f64;
        if self.shots < 2 {
            return 0.0;
        }
        let m = self.correlator();
        let var = ((1.0 - m * m) * n / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEstimate {
    pub term: MerminTerm,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MerminEstimate {
    pub value: f64,
    pub std_error: f64,
    pub per_term_correlators: Vec<TermEstimate>,
    /// Empty in exact mode.
    pub records: Vec<ShotRecord>,
}

fn validate_term(term: &MerminTerm, n: usize) -> Result<()> {
    let k = term.primed.len();
    if k % 2 == 0 {
        return Err(MerminError::Invalid(format!("term has even primed count {k}")));
    }
    if term.primed.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MerminError::Invalid("term indices must be strictly increasing".into()));
    }
    if let Some(&j) = term.primed.iter().find(|&&j| j == 0 || j > n) {
        return Err(MerminError::QubitOutOfRange { index: j, n });
    }
    if term.sign != term_sign(k) {
        return Err(MerminError::Invalid(format!(
            "term sign {} does not match primed count {k}",
            term.sign
        )));
    }
    Ok(())
}

/// Outcome distribution of the term's product measurement.
pub fn term_probabilities(
    state: &StateVector,
    settings: &MeasurementSettings,
    term: &MerminTerm,
) -> Result<Vec<f64>> {
    let n = settings.n();
    if state.n() != n {
        return Err(MerminError::DimensionMismatch {
            expected: n,
            found: state.n(),
        });
    }
    validate_term(term, n)?;
    // Rows of W† are ⟨+|, ⟨-| of each local observable.
    let rotations: Vec<Mat2> = settings
        .pairs()
        .iter()
        .enumerate()
        .map(|(idx, p)| {
            let dir = if term.is_primed(idx + 1) { p.a_prime } else { p.a }.to_array();
            let plus = plus_eigenvector(dir);
            let minus = plus_eigenvector(dir.map(|v| -v));
            Mat2::from_columns(&[plus, minus]).adjoint()
        })
        .collect();
    let mut amps = state.amplitudes().to_vec();
    apply_product(&mut amps, n, &rotations);
    Ok(amps.iter().map(|a| a.norm_sqr()).collect())
}

fn exact_correlator(probs: &[f64]) -> f64 {
    let v: f64 = probs
        .iter()
        .enumerate()
        .map(|(i, p)| if i.count_ones() % 2 == 0 { *p } else { -*p })
        .sum();
    v.clamp(-1.0, 1.0)
}

/// Multinomial draw by sequential conditional binomials.
fn multinomial(probs: &[f64], shots: u64, seed: u64) -> Vec<u64> {
    let mut rng = rng_from_seed(seed);
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass: f64 = probs.iter().sum();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == probs.len() - 1 || mass <= 0.0 {
            counts[i] = remaining;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, q).expect("valid binomial").sample(&mut rng);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    counts
}

pub fn sample_term(
    state: &StateVector,
    settings: &MeasurementSettings,
    term: &MerminTerm,
    shots: u64,
    seed: u64,
) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(MerminError::Invalid("shots must be >= 1".into()));
    }
    let probs = term_probabilities(state, settings, term)?;
    Ok(ShotRecord {
        term: term.clone(),
        counts: multinomial(&probs, shots, seed),
        shots,
        seed,
    })
}

/// `Σ sign · correlator` over all terms, with standard errors combined in
/// quadrature.
pub fn estimate_mermin(
    state: &StateVector,
    settings: &MeasurementSettings,
    shots: Shots,
    seed: u64,
) -> Result<MerminEstimate> {
    if let Shots::Finite(s) = shots {
        if s < 2 {
            return Err(MerminError::Invalid("shots per term must be >= 2".into()));
        }
    }
    let terms = mermin_terms(settings.n())?;
    let per_term: Vec<(TermEstimate, Option<ShotRecord>)> = terms
        .into_par_iter()
        .enumerate()
        .map(|(k, term)| match shots {
            Shots::Exact => {
                let probs = term_probabilities(state, settings, &term)?;
                Ok((
                    TermEstimate {
                        estimate: exact_correlator(&probs),
                        std_error: 0.0,
                        term,
                    },
                    None,
                ))
            }
            Shots::Finite(s) => {
                let rec = sample_term(state, settings, &term, s, derive_seed(seed, k as u64))?;
                Ok((
                    TermEstimate {
                        term,
                        estimate: rec.correlator(),
                        std_error: rec.std_error(),
                    },
                    Some(rec),
                ))
            }
        })
        .collect::<Result<_>>()?;

    let value = per_term
        .iter()
        .map(|(t, _)| f64::from(t.term.sign) * t.estimate)
        .sum();
    let std_error = per_term
        .iter()
        .map(|(t, _)| t.std_error * t.std_error)
        .sum::<f64>()
        .sqrt();
    let (per_term_correlators, records): (Vec<_>, Vec<_>) = per_term.into_iter().unzip();
    Ok(MerminEstimate {
        value,
        std_error,
        per_term_correlators,
        records: records.into_iter().flatten().collect(),
    })
}

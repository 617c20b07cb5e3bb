//! Local-hidden-variable maximum of the Mermin polynomial by enumerating all
//! deterministic ±1 strategies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mermin::{mermin_terms, quantum_bound, MerminTerm};
use crate::error::{MerminError, Result};

/// Largest `n` for which [`lhv_max`] enumerates (4^10 strategies).
pub const LHV_CAP: usize = 10;

/// Predetermined outcomes: `eps[j]` for `A_{j+1}` and `eps_prime[j]` for `A'_{j+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicAssignment {
    pub eps: Vec<i8>,
    pub eps_prime: Vec<i8>,
}

impl DeterministicAssignment {
    pub fn new(eps: Vec<i8>, eps_prime: Vec<i8>) -> Result<Self> {
        if eps.len() != eps_prime.len() {
            return Err(MerminError::DimensionMismatch {
                expected: eps.len(),
                found: eps_prime.len(),
            });
        }
        if eps.iter().chain(&eps_prime).any(|&v| v != 1 && v != -1) {
            return Err(MerminError::Invalid("assignment values must be +1 or -1".into()));
        }
        Ok(Self { eps, eps_prime })
    }

    /// Decodes a 2n-bit counter: bit `j` (j < n) set means `eps[j] = -1`,
    /// bit `n + j` set means `eps_prime[j] = -1`.
    pub fn from_counter(counter: u64, n: usize) -> Self {
        let bit = |k: usize| if counter >> k & 1 == 1 { -1 } else { 1 };
        Self {
            eps: (0..n).map(bit).collect(),
            eps_prime: (0..n).map(|j| bit(n + j)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.eps.len()
    }
}

/// Mermin polynomial with every observable replaced by its assigned value.
pub fn mermin_polynomial_value(assignment: &DeterministicAssignment, n: usize) -> Result<i64> {
    if assignment.eps.len() != n || assignment.eps_prime.len() != n {
        return Err(MerminError::DimensionMismatch {
            expected: n,
            found: assignment.eps.len().min(assignment.eps_prime.len()),
        });
    }
    let terms = mermin_terms(n)?;
    Ok(terms
        .iter()
        .map(|t| {
            let prod: i64 = (1..=n)
                .map(|j| {
                    i64::from(if t.is_primed(j) {
                        assignment.eps_prime[j - 1]
                    } else {
                        assignment.eps[j - 1]
                    })
                })
                .product();
            i64::from(t.sign) * prod
        })
        .sum())
}

/// Same polynomial for local expectations in `[-1, 1]` (independent local
/// response functions). Multilinear, so its extremes sit on ±1 vertices.
pub fn mermin_polynomial_real(eps: &[f64], eps_prime: &[f64]) -> Result<f64> {
    let n = eps.len();
    if eps_prime.len() != n {
        return Err(MerminError::DimensionMismatch {
            expected: n,
            found: eps_prime.len(),
        });
    }
    Ok(mermin_terms(n)?
        .iter()
        .map(|t| {
            let prod: f64 = (1..=n)
                .map(|j| if t.is_primed(j) { eps_prime[j - 1] } else { eps[j - 1] })
                .product();
            f64::from(t.sign) * prod
        })
        .sum())
}

/// Closed-form classical bound: `2^(n/2)` for even n, `2^((n-1)/2)` for odd n.
pub fn lhv_bound(n: usize) -> i64 {
    1i64 << (n / 2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhvResult {
    pub n: usize,
    /// Largest `|value|` over all strategies.
    pub max_value: i64,
    /// Largest signed value; equals `max_value` by the global-flip symmetry.
    pub max_raw_value: i64,
    pub argmax: DeterministicAssignment,
    pub argmax_counter: u64,
    pub bound_formula: i64,
    pub strategies_scanned: u64,
}

struct Packed {
    masks: Vec<(u64, i64)>,
    full: u64,
}

impl Packed {
    fn new(n: usize, terms: &[MerminTerm]) -> Self {
        Self {
            masks: terms.iter().map(|t| (t.primed_mask(), i64::from(t.sign))).collect(),
            full: (1u64 << n) - 1,
        }
    }

    fn value(&self, counter: u64, n: usize) -> i64 {
        let neg = counter & self.full;
        let neg_prime = counter >> n;
        self.masks
            .iter()
            .map(|&(primed, sign)| {
                let flips = (neg & !primed) | (neg_prime & primed);
                if flips.count_ones() % 2 == 0 {
                    sign
                } else {
                    -sign
                }
            })
            .sum()
    }
}

/// Maximum of `|Mermin polynomial|` over all `4^n` deterministic strategies.
///
/// Ties resolve to the lowest counter, so the reported argmax is independent
/// of how the range is split across threads.
pub fn lhv_max(n: usize) -> Result<LhvResult> {
    if n < 2 {
        return Err(MerminError::Invalid(format!("lhv_max needs n >= 2, got {n}")));
    }
    if n > LHV_CAP {
        return Err(MerminError::CapExceeded {
            what: "LHV enumeration",
            n,
            cap: LHV_CAP,
        });
    }
    let terms = mermin_terms(n)?;
    let packed = Packed::new(n, &terms);
    let total = 1u64 << (2 * n);

    // Best is (|value|, raw max) with the lowest counter kept on ties.
    let better = |a: (i64, u64), b: (i64, u64)| {
        if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    let (best_abs, best_raw) = (0..total)
        .into_par_iter()
        .map(|c| {
            let v = packed.value(c, n);
            ((v.abs(), c), (v, c))
        })
        .reduce(
            || ((i64::MIN, u64::MAX), (i64::MIN, u64::MAX)),
            |x, y| (better(x.0, y.0), better(x.1, y.1)),
        );

    Ok(LhvResult {
        n,
        max_value: best_abs.0,
        max_raw_value: best_raw.0,
        argmax: DeterministicAssignment::from_counter(best_abs.1, n),
        argmax_counter: best_abs.1,
        bound_formula: lhv_bound(n),
        strategies_scanned: total,
    })
}

/// `2^(n-1)` over the classical bound: `2^((n-2)/2)` for even n, `2^((n-1)/2)`
/// for odd n. Both are powers of two, so the division is exact.
pub fn violation_ratio(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(MerminError::Invalid(format!("violation ratio needs n >= 2, got {n}")));
    }
    Ok(quantum_bound(n) / lhv_bound(n) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use crate::random::rng_from_seed;

    fn all(n: usize, v: i8) -> Vec<i8> {
        vec![v; n]
    }

    #[test]
    fn hand_evaluations() {
        let a = DeterministicAssignment::new(all(3, 1), all(3, 1)).unwrap();
        assert_eq!(mermin_polynomial_value(&a, 3).unwrap(), 2);
        let a = DeterministicAssignment::new(all(2, 1), all(2, 1)).unwrap();
        assert_eq!(mermin_polynomial_value(&a, 2).unwrap(), 2);
        let a = DeterministicAssignment::new(all(3, 1), all(3, -1)).unwrap();
        assert_eq!(mermin_polynomial_value(&a, 3).unwrap(), -2);
    }

    #[test]
    fn length_mismatch() {
        let a = DeterministicAssignment::new(all(3, 1), all(3, 1)).unwrap();
        assert!(mermin_polynomial_value(&a, 4).is_err());
        assert!(DeterministicAssignment::new(all(3, 1), all(2, 1)).is_err());
        assert!(DeterministicAssignment::new(vec![1, 0], all(2, 1)).is_err());
    }

    #[test]
    fn packed_matches_direct_evaluation() {
        for n in 2..=4 {
            let terms = mermin_terms(n).unwrap();
            let packed = Packed::new(n, &terms);
            for c in 0..1u64 << (2 * n) {
                let a = DeterministicAssignment::from_counter(c, n);
                assert_eq!(packed.value(c, n), mermin_polynomial_value(&a, n).unwrap());
            }
        }
    }

    #[test]
    fn small_maxima() {
        assert_eq!(lhv_max(2).unwrap().max_value, 2);
        assert_eq!(lhv_max(3).unwrap().max_value, 2);
        let r4 = lhv_max(4).unwrap();
        assert_eq!(r4.max_value, 4);
        assert_eq!(r4.strategies_scanned, 256);
        assert_eq!(r4.max_raw_value, r4.max_value);
        let v = mermin_polynomial_value(&r4.argmax, 4).unwrap();
        assert_eq!(v.abs(), 4);
    }

    #[test]
    fn argmax_is_lowest_counter() {
        let r = lhv_max(3).unwrap();
        let terms = mermin_terms(3).unwrap();
        let packed = Packed::new(3, &terms);
        let first = (0..64u64).find(|&c| packed.value(c, 3).abs() == r.max_value).unwrap();
        assert_eq!(r.argmax_counter, first);
    }

    #[test]
    fn caps() {
        assert!(matches!(lhv_max(11), Err(MerminError::CapExceeded { .. })));
        assert!(lhv_max(1).is_err());
    }

    #[test]
    fn ratios() {
        assert_eq!(violation_ratio(3).unwrap(), 2.0);
        assert_eq!(violation_ratio(4).unwrap(), 2.0);
        assert_eq!(violation_ratio(9).unwrap(), 16.0);
        for n in 3..=20 {
            let expected = if n % 2 == 0 {
                2f64.powi((n as i32 - 2) / 2)
            } else {
                2f64.powi((n as i32 - 1) / 2)
            };
            assert_eq!(violation_ratio(n).unwrap(), expected);
        }
    }

    #[test]
    fn mixed_strategies_never_beat_vertices() {
        let mut rng = rng_from_seed(17);
        for n in 2..=5 {
            let best = lhv_max(n).unwrap().max_value as f64;
            for _ in 0..1000 {
                let eps: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
                let epsp: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
                assert!(mermin_polynomial_real(&eps, &epsp).unwrap().abs() <= best + 1e-12);
            }
        }
    }
}

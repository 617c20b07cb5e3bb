//! See-saw search over measurement settings for a fixed state, and the
//! optimal state for fixed settings.
//!
//! `⟨M_n⟩` is linear in each pair `(a_j, a'_j)`: `⟨M_n⟩ = a_j·g + a'_j·g'`
//! with `g`, `g'` independent of qubit j's settings. Each step sets
//! `a_j ← g/‖g‖` and `a'_j ← g'/‖g'‖`, which is the exact maximum over that
//! block, so the objective never decreases.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    apply_single_qubit, hermitian_eigensystem, identity2, inner, norm3, paulis, BlochVector,
    MeasurementSettings, SettingPair, StateVector,
};
use crate::error::{MerminError, Result};
use crate::mermin::{build_mermin_product_form, mermin_expectation};
use crate::random::{derive_seed, random_settings, rng_from_seed};

/// Gradients below this norm leave the corresponding direction unchanged.
pub const ZERO_GRADIENT: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeesawConfig {
    pub max_sweeps: usize,
    pub convergence_tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self {
            max_sweeps: 200,
            convergence_tol: 1e-10,
            restarts: 20,
            seed: 0,
        }
    }
}

impl SeesawConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 {
            return Err(MerminError::Invalid("max_sweeps must be >= 1".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(MerminError::Invalid("convergence_tol must be > 0".into()));
        }
        if self.restarts == 0 {
            return Err(MerminError::Invalid("restarts must be >= 1".into()));
        }
        Ok(())
    }
}

/// A direction left unchanged because its gradient vanished.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroGradientEvent {
    pub sweep: usize,
    pub qubit: usize,
    pub primed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeesawResult {
    pub best_value: f64,
    pub best_settings: MeasurementSettings,
    pub sweeps_used: usize,
    pub restart_index: usize,
    /// Objective before the first sweep followed by the value after each sweep.
    pub history: Vec<f64>,
    pub zero_gradient_events: Vec<ZeroGradientEvent>,
    /// Final value of every restart, in restart order.
    pub restart_values: Vec<f64>,
}

/// Linear coefficients `(g, g')` of `⟨M_n⟩` in `a_j` and `a'_j` (1-based `j`).
///
/// With every other qubit carrying `A_l + iA'_l`, let
/// `Q_k = ⟨φ|(… ⊗ σ_k ⊗ …)|φ⟩` with `σ_k` on qubit j. Then `g_k = Im Q_k`
/// and `g'_k = Re Q_k`: three matrix-free expectations serve both vectors.
pub fn local_gradient_vectors(
    state: &StateVector,
    settings: &MeasurementSettings,
    j: usize,
) -> Result<([f64; 3], [f64; 3])> {
    let n = settings.n();
    if state.n() != n {
        return Err(MerminError::DimensionMismatch {
            expected: n,
            found: state.n(),
        });
    }
    settings.pair(j)?;
    let mut factors = settings.raising_factors();
    factors[j - 1] = identity2();
    let mut rest = state.amplitudes().to_vec();
    for (idx, f) in factors.iter().enumerate() {
        if idx + 1 != j {
            apply_single_qubit(&mut rest, n, idx + 1, f);
        }
    }
    let mut g = [0.0; 3];
    let mut g_prime = [0.0; 3];
    for (k, sigma) in paulis().iter().enumerate() {
        let mut work = rest.clone();
        apply_single_qubit(&mut work, n, j, sigma);
        let q: Complex64 = inner(state.amplitudes(), &work);
        g[k] = q.im;
        g_prime[k] = q.re;
    }
    Ok((g, g_prime))
}

struct Ascent {
    value: f64,
    settings: MeasurementSettings,
    sweeps: usize,
    history: Vec<f64>,
    events: Vec<ZeroGradientEvent>,
}

fn ascend(
    state: &StateVector,
    mut settings: MeasurementSettings,
    max_sweeps: usize,
    tol: f64,
) -> Result<Ascent> {
    let n = settings.n();
    let mut value = mermin_expectation(state, &settings)?;
    let mut history = vec![value];
    let mut events = Vec::new();
    let mut sweeps = 0;
    for sweep in 1..=max_sweeps {
        sweeps = sweep;
        for j in 1..=n {
            let current = *settings.pair(j)?;
            let (g, _) = local_gradient_vectors(state, &settings, j)?;
            let a = BlochVector::from_direction(g).filter(|_| norm3(g) >= ZERO_GRADIENT);
            let a = a.unwrap_or_else(|| {
                events.push(ZeroGradientEvent { sweep, qubit: j, primed: false });
                current.a
            });
            settings.set_pair(j, SettingPair { a, a_prime: current.a_prime })?;

            let (_, gp) = local_gradient_vectors(state, &settings, j)?;
            let a_prime = BlochVector::from_direction(gp).filter(|_| norm3(gp) >= ZERO_GRADIENT);
            let a_prime = a_prime.unwrap_or_else(|| {
                events.push(ZeroGradientEvent { sweep, qubit: j, primed: true });
                current.a_prime
            });
            settings.set_pair(j, SettingPair { a, a_prime })?;
        }
        let next = mermin_expectation(state, &settings)?;
        history.push(next);
        let improvement = next - value;
        value = next;
        if improvement < tol {
            break;
        }
    }
    Ok(Ascent {
        value,
        settings,
        sweeps,
        history,
        events,
    })
}

/// Multi-start see-saw over settings for a fixed state.
///
/// Restart 0 starts from `init`; restart `r >= 1` draws all `2n` directions
/// from the stream seeded with `seed + r`. Restarts run in parallel and the
/// winner is the largest value with ties going to the lowest restart index.
pub fn seesaw_settings(
    state: &StateVector,
    init: &MeasurementSettings,
    config: &SeesawConfig,
) -> Result<SeesawResult> {
    config.validate()?;
    let n = init.n();
    if state.n() != n {
        return Err(MerminError::DimensionMismatch {
            expected: n,
            found: state.n(),
        });
    }
    let runs: Vec<Ascent> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                init.clone()
            } else {
                random_settings(n, &mut rng_from_seed(derive_seed(config.seed, r as u64)))?
            };
            ascend(state, start, config.max_sweeps, config.convergence_tol)
        })
        .collect::<Result<_>>()?;

    let restart_values: Vec<f64> = runs.iter().map(|a| a.value).collect();
    let mut best = 0;
    for (r, v) in restart_values.iter().enumerate() {
        if *v > restart_values[best] {
            best = r;
        }
    }
    let winner = runs.into_iter().nth(best).expect("at least one restart");
    Ok(SeesawResult {
        best_value: winner.value,
        best_settings: winner.settings,
        sweeps_used: winner.sweeps,
        restart_index: best,
        history: winner.history,
        zero_gradient_events: winner.events,
        restart_values,
    })
}

/// Largest eigenvalue of `M_n` and a matching eigenvector.
pub fn optimal_state(settings: &MeasurementSettings) -> Result<(f64, StateVector)> {
    let m = build_mermin_product_form(settings)?;
    let es = hermitian_eigensystem(&m)?;
    let value = es.values[0];
    let state = es.vectors.into_iter().next().expect("non-empty spectrum");
    Ok((value, state))
}

#[derive(Debug, Clone)]
pub struct JointResult {
    pub value: f64,
    pub state: StateVector,
    pub settings: MeasurementSettings,
    /// Value after each (state, settings) round.
    pub history: Vec<f64>,
}

/// Alternates [`optimal_state`] and a single-start [`seesaw_settings`] until
/// a round improves by less than `config.convergence_tol`.
pub fn seesaw_joint(
    init: &MeasurementSettings,
    config: &SeesawConfig,
    max_rounds: usize,
) -> Result<JointResult> {
    config.validate()?;
    let single = SeesawConfig {
        restarts: 1,
        ..*config
    };
    let mut settings = init.clone();
    let (mut value, mut state) = optimal_state(&settings)?;
    let mut history = vec![value];
    for _ in 0..max_rounds {
        let s = seesaw_settings(&state, &settings, &single)?;
        settings = s.best_settings;
        let (next, next_state) = optimal_state(&settings)?;
        history.push(next);
        let improvement = next - value;
        value = next;
        state = next_state;
        if improvement < config.convergence_tol {
            break;
        }
    }
    Ok(JointResult {
        value,
        state,
        settings,
        history,
    })
}

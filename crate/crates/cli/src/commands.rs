use mermin_core::characterization::extract_ghz_lu_with;
use mermin_core::algebra::{hermitian_eigenvalues, operator_norm, Mat2, MAX_STATE_QUBITS};
use mermin_core::random::{
    derive_seed, random_orthogonal_settings, random_settings, random_state, rng_from_seed,
};
use mermin_core::{
    build_mermin, build_mermin_expansion, build_mermin_product_form, estimate_mermin,
    ghz_state, lhv_max, mermin_expectation,
    mermin_squared_identity_check, norm_bound_scalar, optimal_state, orthogonality_defects,
    quantum_bound, seesaw_settings, violation_ratio, w_state, BuildForm, MeasurementSettings,
    MerminError, SeesawConfig, Shots, Tolerances,
};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::Failure;
use crate::formats::{self, Source};
use crate::report::Table;
use crate::{
    BuildArgs, ExtractArgs, Form, GenSettingsArgs, GenStateArgs, LhvArgs, NormArgs,
    QuantumMaxArgs, SampleArgs, SeesawArgs, SettingsKind, StateKind, VerifyArgs,
};

/// What a command hands back for the run report.
pub struct Outcome {
    pub inputs: Vec<Source>,
    pub outputs: Value,
    pub seeds: Vec<u64>,
    pub table: Table,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn mat2_json(m: &Mat2) -> Value {
    json!([[pair(m[(0, 0)]), pair(m[(0, 1)])], [pair(m[(1, 0)]), pair(m[(1, 1)])]])
}

fn settings_table(settings: &MeasurementSettings) -> Table {
    let mut t = Table::new(&["qubit", "a_x", "a_y", "a_z", "a_prime_x", "a_prime_y", "a_prime_z"]);
    for (j, p) in settings.pairs().iter().enumerate() {
        let mut row = vec![(j + 1).to_string()];
        row.extend(p.a.to_array().iter().chain(&p.a_prime.to_array()).map(|v| v.to_string()));
        t.rows.push(row);
    }
    t
}

fn load_settings(path: &std::path::Path) -> Result<(Source, MeasurementSettings), Failure> {
    let src = Source::read(path)?;
    let s = formats::load_settings(&src)?;
    Ok((src, s))
}

fn load_state(path: &std::path::Path) -> Result<(Source, mermin_core::StateVector), Failure> {
    let src = Source::read(path)?;
    let s = formats::load_state(&src)?;
    Ok((src, s))
}

pub fn gen_settings(a: &GenSettingsArgs) -> Result<Outcome, Failure> {
    let mut rng = rng_from_seed(a.seed);
    let settings = match a.kind {
        SettingsKind::Xy => MeasurementSettings::mermin_xy(a.n)?,
        SettingsKind::Random => random_settings(a.n, &mut rng)?,
        SettingsKind::Orthogonal => random_orthogonal_settings(a.n, &mut rng)?,
    };
    formats::write_json(&a.out, &formats::settings_doc(&settings), true)?;
    let seeds = if a.kind == SettingsKind::Xy { vec![] } else { vec![a.seed] };
    Ok(Outcome {
        inputs: vec![],
        outputs: json!({
            "path": a.out.display().to_string(),
            "n": settings.n(),
            "max_abs_orthogonality_defect": orthogonality_defects(&settings).max_abs_defect,
        }),
        seeds,
        table: settings_table(&settings),
    })
}

pub fn gen_state(a: &GenStateArgs) -> Result<Outcome, Failure> {
    if a.n > MAX_STATE_QUBITS {
        return Err(MerminError::CapExceeded {
            what: "state vectors",
            n: a.n,
            cap: MAX_STATE_QUBITS,
        }
        .into());
    }
    let state = match a.kind {
        StateKind::Ghz => ghz_state(a.n)?,
        StateKind::W => w_state(a.n)?,
        StateKind::Random => random_state(a.n, &mut rng_from_seed(a.seed))?,
    };
    formats::write_json(&a.out, &formats::state_doc(&state), true)?;
    let mut table = Table::new(&["index", "re", "im"]);
    for (i, z) in state.amplitudes().iter().enumerate() {
        table.push([i.to_string(), z.re.to_string(), z.im.to_string()]);
    }
    Ok(Outcome {
        inputs: vec![],
        outputs: json!({ "path": a.out.display().to_string(), "n": state.n(), "dim": state.dim() }),
        seeds: if a.kind == StateKind::Random { vec![a.seed] } else { vec![] },
        table,
    })
}

pub fn build(a: &BuildArgs) -> Result<Outcome, Failure> {
    let (src, settings) = load_settings(&a.settings)?;
    let form = match a.form {
        Form::Product => BuildForm::Product,
        Form::Expansion => BuildForm::Expansion,
    };
    let op = build_mermin(&settings, form)?;
    formats::write_json(&a.out, &formats::operator_doc(&op), false)?;
    let dev = op.hermiticity_deviation();
    let mut table = Table::new(&["n", "dim", "hermiticity_deviation", "max_abs_entry"]);
    table.push([op.n().to_string(), op.dim().to_string(), dev.to_string(), op.max_abs_entry().to_string()]);
    Ok(Outcome {
        inputs: vec![src],
        outputs: json!({
            "path": a.out.display().to_string(),
            "n": op.n(),
            "dim": op.dim(),
            "hermiticity_deviation": dev,
            "max_abs_entry": op.max_abs_entry(),
        }),
        seeds: vec![],
        table,
    })
}

pub fn norm(a: &NormArgs) -> Result<Outcome, Failure> {
    let src = Source::read(&a.operator)?;
    let op = formats::load_operator(&src)?;
    let eig = hermitian_eigenvalues(&op)?;
    let (top, bottom) = (eig[0], eig[eig.len() - 1]);
    let norm = top.abs().max(bottom.abs());
    let mut table = Table::new(&["n", "norm", "max_eigenvalue", "min_eigenvalue"]);
    table.push([op.n().to_string(), norm.to_string(), top.to_string(), bottom.to_string()]);
    Ok(Outcome {
        inputs: vec![src],
        outputs: json!({
            "n": op.n(),
            "norm": norm,
            "max_eigenvalue": top,
            "min_eigenvalue": bottom,
        }),
        seeds: vec![],
        table,
    })
}

pub fn lhv(a: &LhvArgs) -> Result<Outcome, Failure> {
    let r = lhv_max(a.n)?;
    let ratio = violation_ratio(a.n)?;
    let mut table = Table::new(&["n", "max_value", "bound_formula", "quantum_bound", "violation_ratio"]);
    table.push([
        a.n.to_string(),
        r.max_value.to_string(),
        r.bound_formula.to_string(),
        quantum_bound(a.n).to_string(),
        ratio.to_string(),
    ]);
    Ok(Outcome {
        inputs: vec![],
        outputs: json!({
            "n": a.n,
            "max_value": r.max_value,
            "max_raw_value": r.max_raw_value,
            "bound_formula": r.bound_formula,
            "argmax": { "eps": r.argmax.eps, "eps_prime": r.argmax.eps_prime },
            "strategies_scanned": r.strategies_scanned,
            "quantum_bound": quantum_bound(a.n),
            "violation_ratio": ratio,
        }),
        seeds: vec![],
        table,
    })
}

pub fn quantum_max(a: &QuantumMaxArgs) -> Result<Outcome, Failure> {
    let (src, settings) = load_settings(&a.settings)?;
    let n = settings.n();
    let (value, state) = optimal_state(&settings)?;
    let defects = orthogonality_defects(&settings);
    let scalar = norm_bound_scalar(&defects.defects)?;
    let norm = operator_norm(&build_mermin_product_form(&settings)?)?;
    if let Some(path) = &a.state_out {
        formats::write_json(path, &formats::state_doc(&state), true)?;
    }
    let mut table = Table::new(&["n", "max_eigenvalue", "norm", "quantum_bound", "scalar_norm_bound", "max_abs_defect"]);
    table.push([
        n.to_string(),
        value.to_string(),
        norm.to_string(),
        quantum_bound(n).to_string(),
        scalar.sqrt().to_string(),
        defects.max_abs_defect.to_string(),
    ]);
    Ok(Outcome {
        inputs: vec![src],
        outputs: json!({
            "n": n,
            "max_eigenvalue": value,
            "norm": norm,
            "quantum_bound": quantum_bound(n),
            "gap_to_bound": quantum_bound(n) - value,
            "orthogonality_defects": defects.defects,
            // ‖M_n‖ ≤ sqrt of this
            "scalar_bound_on_squared_norm": scalar,
            "state_path": a.state_out.as_ref().map(|p| p.display().to_string()),
        }),
        seeds: vec![],
        table,
    })
}

pub fn seesaw(a: &SeesawArgs) -> Result<Outcome, Failure> {
    let (state_src, state) = load_state(&a.state)?;
    let mut inputs = vec![state_src];
    let init = match &a.settings {
        Some(p) => {
            let (src, s) = load_settings(p)?;
            inputs.push(src);
            s
        }
        None => MeasurementSettings::mermin_xy(state.n())?,
    };
    let cfg = SeesawConfig {
        max_sweeps: a.max_sweeps,
        convergence_tol: a.tol,
        restarts: a.restarts,
        seed: a.seed,
    };
    let r = seesaw_settings(&state, &init, &cfg)?;
    if let Some(path) = &a.settings_out {
        formats::write_json(path, &formats::settings_doc(&r.best_settings), true)?;
    }
    let mut table = Table::new(&["sweep", "value"]);
    for (k, v) in r.history.iter().enumerate() {
        table.push([k.to_string(), v.to_string()]);
    }
    Ok(Outcome {
        inputs,
        outputs: json!({
            "n": state.n(),
            "best_value": r.best_value,
            "quantum_bound": quantum_bound(state.n()),
            "restart_index": r.restart_index,
            "sweeps_used": r.sweeps_used,
            "history": r.history,
            "restart_values": r.restart_values,
            "zero_gradient_events": r.zero_gradient_events,
            "best_settings": formats::settings_doc(&r.best_settings),
        }),
        seeds: vec![a.seed],
        table,
    })
}

pub fn extract(a: &ExtractArgs) -> Result<Outcome, Failure> {
    let (state_src, state) = load_state(&a.state)?;
    let (settings_src, settings) = load_settings(&a.settings)?;
    let tol = Tolerances {
        orth: a.tol_orth,
        viol: a.tol_viol,
        coeff: a.tol_coeff,
        phase: a.tol_phase,
    };
    let w = extract_ghz_lu_with(&state, &settings, &tol)?;
    let mut table = Table::new(&[
        "qubit", "alpha", "u00_re", "u00_im", "u01_re", "u01_im", "u10_re", "u10_im", "u11_re", "u11_im",
    ]);
    for (j, u) in w.u.iter().enumerate() {
        let mut row = vec![(j + 1).to_string(), w.alphas[j].to_string()];
        for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            row.push(u[(r, c)].re.to_string());
            row.push(u[(r, c)].im.to_string());
        }
        table.rows.push(row);
    }
    Ok(Outcome {
        inputs: vec![state_src, settings_src],
        outputs: json!({
            "n": settings.n(),
            "expectation": w.expectation,
            "unitaries": w.u.iter().map(mat2_json).collect::<Vec<_>>(),
            "basis_changes": w.v.iter().map(mat2_json).collect::<Vec<_>>(),
            "alphas": w.alphas,
            "phi": w.phi,
            "theta": w.theta,
            "a_coeff": pair(w.a_coeff),
            "b_coeff": pair(w.b_coeff),
            "max_other_coeff": w.max_other_coeff,
            "phase_mismatch": w.phase_mismatch,
            "overlap": pair(w.overlap),
            "overlap_phase": w.overlap_phase(),
            "fidelity_residual": w.fidelity_residual,
        }),
        seeds: vec![],
        table,
    })
}

pub fn sample(a: &SampleArgs) -> Result<Outcome, Failure> {
    let (state_src, state) = load_state(&a.state)?;
    let (settings_src, settings) = load_settings(&a.settings)?;
    let est = estimate_mermin(&state, &settings, a.shots, a.seed)?;
    let exact = mermin_expectation(&state, &settings)?;
    let mut table = Table::new(&["term", "primed", "sign", "estimate", "std_error"]);
    for (k, t) in est.per_term_correlators.iter().enumerate() {
        let primed: Vec<String> = t.term.primed.iter().map(|j| j.to_string()).collect();
        table.push([
            k.to_string(),
            primed.join(" "),
            t.term.sign.to_string(),
            t.estimate.to_string(),
            t.std_error.to_string(),
        ]);
    }
    let mut outputs = json!({
        "n": settings.n(),
        "value": est.value,
        "std_error": est.std_error,
        "exact_value": exact,
        "per_term": est.per_term_correlators,
    });
    if a.records {
        outputs["records"] = serde_json::to_value(&est.records).unwrap_or(Value::Null);
    }
    let seeds = match a.shots {
        Shots::Exact => vec![],
        Shots::Finite(_) => vec![a.seed],
    };
    Ok(Outcome {
        inputs: vec![state_src, settings_src],
        outputs,
        seeds,
        table,
    })
}

pub fn verify_identities(a: &VerifyArgs) -> Result<Outcome, Failure> {
    if a.trials == 0 {
        return Err(Failure::validation("--trials must be >= 1"));
    }
    let mut table = Table::new(&["trial", "seed", "squared_identity_residual", "builder_difference"]);
    let mut trials = Vec::with_capacity(a.trials);
    let (mut max_res, mut max_diff) = (0.0f64, 0.0f64);
    for t in 0..a.trials {
        let seed = derive_seed(a.seed, t as u64);
        let s = random_settings(a.n, &mut rng_from_seed(seed))?;
        let rep = mermin_squared_identity_check(&s)?;
        let diff = build_mermin_product_form(&s)?.max_abs_diff(&build_mermin_expansion(&s)?)?;
        max_res = max_res.max(rep.max_abs_residual);
        max_diff = max_diff.max(diff);
        table.push([t.to_string(), seed.to_string(), rep.max_abs_residual.to_string(), diff.to_string()]);
        trials.push(json!({ "seed": seed, "residual": rep.max_abs_residual, "builder_difference": diff }));
    }
    Ok(Outcome {
        inputs: vec![],
        outputs: json!({
            "n": a.n,
            "trials": trials,
            "max_residual": max_res,
            "max_builder_difference": max_diff,
            "tolerance": a.tol,
            "all_pass": max_res < a.tol && max_diff < a.tol,
        }),
        seeds: vec![a.seed],
        table,
    })
}

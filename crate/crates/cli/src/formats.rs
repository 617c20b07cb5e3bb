//! On-disk documents: settings, states and dense operators. All are JSON with
//! a `schema` field; numbers are written with shortest round-trip formatting.

use std::fs;
use std::path::Path;

use mermin_core::algebra::{DenseOperator, MAX_STATE_QUBITS};
use mermin_core::{MeasurementSettings, MerminError, SettingPair, StateVector, DENSE_CAP};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Failure;

pub const SETTINGS_SCHEMA: &str = "mermin.settings/v1";
pub const STATE_SCHEMA: &str = "mermin.state/v1";
pub const OPERATOR_SCHEMA: &str = "mermin.operator/v1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsDoc {
    pub schema: String,
    pub n: usize,
    pub pairs: Vec<SettingPair>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub schema: String,
    pub n: usize,
    /// `[re, im]` per basis index; qubit 1 is the most significant bit.
    pub amplitudes: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDoc {
    pub schema: String,
    pub n: usize,
    pub dim: usize,
    /// Row-major `[re, im]` entries.
    pub entries: Vec<[f64; 2]>,
}

/// An input file read into memory, kept for digests and diagnostics.
pub struct Source {
    pub path: String,
    pub text: String,
}

impl Source {
    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
        Ok(Self {
            path: path.display().to_string(),
            text,
        })
    }

    fn parse<T: DeserializeOwned>(&self) -> Result<T, Failure> {
        serde_json::from_str(&self.text).map_err(|e| {
            let msg = e.to_string();
            let msg = match msg.rfind(" at line ") {
                Some(i) => msg[..i].to_string(),
                None => msg,
            };
            Failure::validation(format!("{}:{}:{}: {msg}", self.path, e.line(), e.column()))
        })
    }

    /// Diagnostic anchored at the first occurrence of `"key"`.
    fn at_key(&self, key: &str, msg: impl std::fmt::Display) -> Failure {
        let needle = format!("\"{key}\"");
        let (line, col) = match self.text.find(&needle) {
            Some(off) => {
                let before = &self.text[..off];
                let line = before.matches('\n').count() + 1;
                let col = off - before.rfind('\n').map_or(0, |p| p + 1) + 1;
                (line, col)
            }
            None => (1, 1),
        };
        Failure::validation(format!("{}:{line}:{col}: {msg}", self.path))
    }

    fn check_schema(&self, found: &str, expected: &str) -> Result<(), Failure> {
        if found != expected {
            return Err(self.at_key("schema", format!("expected schema \"{expected}\", found \"{found}\"")));
        }
        Ok(())
    }
}

/// Routes size caps to their own exit code and anchors everything else.
fn anchored(src: &Source, key: &str, e: MerminError) -> Failure {
    if e.is_cap() {
        Failure::from(e)
    } else {
        src.at_key(key, e)
    }
}

pub fn load_settings(src: &Source) -> Result<MeasurementSettings, Failure> {
    let doc: SettingsDoc = src.parse()?;
    src.check_schema(&doc.schema, SETTINGS_SCHEMA)?;
    if doc.n != doc.pairs.len() {
        return Err(src.at_key(
            "n",
            format!("n = {} but {} pairs are listed", doc.n, doc.pairs.len()),
        ));
    }
    MeasurementSettings::new(doc.pairs).map_err(|e| anchored(src, "pairs", e))
}

pub fn settings_doc(settings: &MeasurementSettings) -> SettingsDoc {
    SettingsDoc {
        schema: SETTINGS_SCHEMA.into(),
        n: settings.n(),
        pairs: settings.pairs().to_vec(),
    }
}

pub fn load_state(src: &Source) -> Result<StateVector, Failure> {
    let doc: StateDoc = src.parse()?;
    src.check_schema(&doc.schema, STATE_SCHEMA)?;
    if doc.n > MAX_STATE_QUBITS {
        return Err(MerminError::CapExceeded {
            what: "state vectors",
            n: doc.n,
            cap: MAX_STATE_QUBITS,
        }
        .into());
    }
    if doc.amplitudes.len() != 1usize << doc.n {
        return Err(src.at_key(
            "amplitudes",
            format!("n = {} needs {} amplitudes, found {}", doc.n, 1usize << doc.n, doc.amplitudes.len()),
        ));
    }
    let amps = doc.amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
    StateVector::new(doc.n, amps).map_err(|e| anchored(src, "amplitudes", e))
}

pub fn state_doc(state: &StateVector) -> StateDoc {
    StateDoc {
        schema: STATE_SCHEMA.into(),
        n: state.n(),
        amplitudes: state.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
    }
}

pub fn load_operator(src: &Source) -> Result<DenseOperator, Failure> {
    let doc: OperatorDoc = src.parse()?;
    src.check_schema(&doc.schema, OPERATOR_SCHEMA)?;
    if doc.n > DENSE_CAP {
        return Err(MerminError::CapExceeded {
            what: "dense operators",
            n: doc.n,
            cap: DENSE_CAP,
        }
        .into());
    }
    let dim = 1usize << doc.n;
    if doc.dim != dim {
        return Err(src.at_key("dim", format!("n = {} implies dim = {dim}, found {}", doc.n, doc.dim)));
    }
    if doc.entries.len() != dim * dim {
        return Err(src.at_key(
            "entries",
            format!("expected {} entries, found {}", dim * dim, doc.entries.len()),
        ));
    }
    let m = nalgebra::DMatrix::from_row_iterator(
        dim,
        dim,
        doc.entries.iter().map(|[re, im]| Complex64::new(*re, *im)),
    );
    DenseOperator::from_matrix(doc.n, m).map_err(|e| anchored(src, "entries", e))
}

pub fn operator_doc(op: &DenseOperator) -> OperatorDoc {
    let m = op.matrix();
    let dim = op.dim();
    let mut entries = Vec::with_capacity(dim * dim);
    for r in 0..dim {
        for c in 0..dim {
            let z = m[(r, c)];
            entries.push([z.re, z.im]);
        }
    }
    OperatorDoc {
        schema: OPERATOR_SCHEMA.into(),
        n: op.n(),
        dim,
        entries,
    }
}

pub fn write_json<T: Serialize>(path: &Path, doc: &T, pretty: bool) -> Result<(), Failure> {
    let text = if pretty {
        serde_json::to_string_pretty(doc)
    } else {
        serde_json::to_string(doc)
    }
    .map_err(|e| Failure::validation(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Failure::validation(format!("{}: {e}", path.display())))
}

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::formats::Source;

pub const REPORT_SCHEMA: &str = "mermin.report/v1";

/// Self-contained record of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub command: String,
    pub tool_version: String,
    /// SHA-256 over the input files, in argument order.
    pub inputs_digest: String,
    pub parameters: Value,
    pub outputs: Value,
    pub seeds: Vec<u64>,
    pub wall_time_seconds: f64,
}

pub fn inputs_digest(sources: &[&Source]) -> String {
    let mut h = Sha256::new();
    for s in sources {
        h.update((s.text.len() as u64).to_le_bytes());
        h.update(s.text.as_bytes());
    }
    format!("{:x}", h.finalize())
}

/// Flat table for `--csv`.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<I, T>(&mut self, row: I)
    where
        I: IntoIterator<Item = T>,
        T: ToString,
    {
        self.rows.push(row.into_iter().map(|v| v.to_string()).collect());
    }

    pub fn write<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips() {
        let r = RunReport {
            schema: REPORT_SCHEMA.into(),
            command: "lhv".into(),
            tool_version: "0.1.0".into(),
            inputs_digest: inputs_digest(&[]),
            parameters: serde_json::json!({ "n": 3 }),
            outputs: serde_json::json!({ "max_value": 2, "ratio": 0.1 + 0.2 }),
            seeds: vec![u64::MAX, 0],
            wall_time_seconds: 1.25e-3,
        };
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<RunReport>(&text).unwrap(), r);
    }

    #[test]
    fn digest_depends_on_file_boundaries() {
        let src = |t: &str| Source { path: "x".into(), text: t.into() };
        let (ab, c) = (src("ab"), src("c"));
        let (a, bc) = (src("a"), src("bc"));
        assert_ne!(inputs_digest(&[&ab, &c]), inputs_digest(&[&a, &bc]));
    }
}

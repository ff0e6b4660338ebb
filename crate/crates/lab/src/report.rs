//! Report schema for experiment runs. Serialization is deterministic:
//! fixed field order, sorted maps, shortest-roundtrip floats, so
//! identical spec + seed yields byte-identical files.

use serde::Serialize;
use std::path::Path;

use nclab_core::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
}

impl Assertion {
    /// lhs <= rhs + tol
    pub fn le(name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        Assertion {
            name: name.to_string(),
            pass: lhs <= rhs + tol,
            lhs,
            rhs,
            tol,
        }
    }

    /// |lhs - rhs| <= tol
    pub fn close(name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        Assertion {
            name: name.to_string(),
            pass: (lhs - rhs).abs() <= tol,
            lhs,
            rhs,
            tol,
        }
    }

    pub fn flag(name: &str, pass: bool) -> Self {
        Assertion {
            name: name.to_string(),
            pass,
            lhs: if pass { 1.0 } else { 0.0 },
            rhs: 1.0,
            tol: 0.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub experiment: String,
    pub inputs_digest: String,
    pub seed: u64,
    pub results: serde_json::Value,
    pub assertions: Vec<Assertion>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn to_json_bytes(&self) -> Result<Vec<u8>> {
        let mut bytes = serde_json::to_vec_pretty(self).map_err(|e| Error::NotSubalgebra {
            reason: format!("report serialization failed: {e}"),
        })?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn write_to(&self, dir: &Path) -> Result<std::path::PathBuf> {
        std::fs::create_dir_all(dir).map_err(io_err)?;
        let path = dir.join(format!("{}.json", self.experiment));
        std::fs::write(&path, self.to_json_bytes()?).map_err(io_err)?;
        Ok(path)
    }
}

/// Sweep rows for the optional CSV output.
#[derive(Clone, Debug)]
pub struct SweepCsv {
    pub parameter: String,
    pub rows: Vec<(f64, f64, f64, f64)>,
}

impl SweepCsv {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut s = format!("{},value,bound_lo,bound_hi\n", self.parameter);
        for (p, v, lo, hi) in &self.rows {
            s.push_str(&format!("{p},{v},{lo},{hi}\n"));
        }
        s.into_bytes()
    }

    pub fn write_to(&self, dir: &Path, experiment: &str) -> Result<std::path::PathBuf> {
        std::fs::create_dir_all(dir).map_err(io_err)?;
        let path = dir.join(format!("{experiment}.csv"));
        std::fs::write(&path, self.to_bytes()).map_err(io_err)?;
        Ok(path)
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::NotSubalgebra {
        reason: format!("io error: {e}"),
    }
}

/// FNV-1a 64-bit digest of the raw spec bytes, as fixed-width hex.
pub fn digest(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    format!("{hash:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_input_sensitive() {
        assert_eq!(digest(b"abc"), digest(b"abc"));
        assert_ne!(digest(b"abc"), digest(b"abd"));
        assert_eq!(digest(b"").len(), 16);
    }

    #[test]
    fn report_bytes_are_deterministic() {
        let report = Report {
            experiment: "norms".to_string(),
            inputs_digest: digest(b"spec"),
            seed: 7,
            results: serde_json::json!({"value": 1.5, "items": [1, 2, 3]}),
            assertions: vec![Assertion::le("bound", 1.0, 2.0, 0.0)],
        };
        assert_eq!(
            report.to_json_bytes().unwrap(),
            report.to_json_bytes().unwrap()
        );
    }
}

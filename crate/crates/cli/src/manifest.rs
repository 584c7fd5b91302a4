//! Run manifests: what was run, with which inputs, producing which bytes.
//!
//! The manifest is written last, after every output file, and names each
//! output with its SHA-256. Wall-clock time is recorded for the log but
//! excluded from all comparisons; two runs agree when everything else does.

use agewire_core::error::{CoreError, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub experiment: String,
    /// Hash of the effective configuration, output directory excluded.
    pub config_hash: String,
    /// Content hash of every netlist the run touched, keyed by label.
    pub netlist_hashes: BTreeMap<String, String>,
    /// The configured seed plus any derived stream seeds the run used.
    pub seeds: BTreeMap<String, u64>,
    pub wall_clock_ms: u64,
    /// SHA-256 of each output file, keyed by name relative to the run dir.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(s: &str) -> Result<RunManifest> {
        serde_json::from_str(s).map_err(|e| CoreError::Format(format!("bad manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<RunManifest> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CoreError::Format(format!("cannot read {}: {e}", path.display())))?;
        RunManifest::from_json(&text)
    }

    /// Everything that must agree between two runs of the same inputs.
    pub fn reproducibility_key(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("manifest serializes");
        v.as_object_mut().expect("manifest is an object").remove("wall_clock_ms");
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub ok: Vec<String>,
    pub mismatched: Vec<String>,
    pub missing: Vec<String>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.mismatched.is_empty() && self.missing.is_empty()
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for f in &self.ok {
            out.push(format!("OK       {f}"));
        }
        for f in &self.mismatched {
            out.push(format!("MISMATCH {f}"));
        }
        for f in &self.missing {
            out.push(format!("MISSING  {f}"));
        }
        out.push(if self.pass() {
            format!("PASS ({} files verified)", self.ok.len())
        } else {
            format!(
                "FAIL ({} ok, {} mismatched, {} missing)",
                self.ok.len(),
                self.mismatched.len(),
                self.missing.len()
            )
        });
        out
    }
}

/// Recompute every output checksum under `dir` against the manifest.
/// Missing files land in the report rather than failing it.
pub fn verify(manifest: &RunManifest, dir: &Path) -> VerifyReport {
    let mut report =
        VerifyReport { ok: Vec::new(), mismatched: Vec::new(), missing: Vec::new() };
    for (name, expect) in &manifest.outputs {
        let path = dir.join(name);
        match std::fs::read(&path) {
            Err(_) => report.missing.push(name.clone()),
            Ok(bytes) => {
                if sha256_hex(&bytes) == *expect {
                    report.ok.push(name.clone());
                } else {
                    report.mismatched.push(name.clone());
                }
            }
        }
    }
    report
}

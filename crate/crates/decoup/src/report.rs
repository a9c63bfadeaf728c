//! Report plumbing: parameter digests, derived seeds, JSON/CSV serialization.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Short stable digest of a check's parameters, for report provenance.
pub fn params_digest<P: Serialize>(params: &P) -> String {
    let json = serde_json::to_string(params).unwrap_or_else(|_| "<unserializable>".into());
    let hash = Sha256::digest(json.as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Derive an independent stream seed from a base seed and a role label, so
/// different statistics in one run never share RNG streams.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let out = hasher.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("sha256 yields at least 8 bytes"))
}

/// One row of a per-threshold inequality report.
#[derive(Debug, Clone, Serialize)]
pub struct TailIneqRow {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub margin: f64,
}

/// Verdict envelope shared by the coupling-module checks.
#[derive(Debug, Clone, Serialize)]
pub struct CheckVerdict {
    pub check: String,
    pub params_digest: String,
    pub holds: bool,
    pub rows: Vec<TailIneqRow>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

impl CheckVerdict {
    pub fn new<P: Serialize>(check: &str, params: &P, rows: Vec<TailIneqRow>) -> CheckVerdict {
        let holds = rows.iter().all(|r| r.holds);
        CheckVerdict {
            check: check.to_string(),
            params_digest: params_digest(params),
            holds,
            rows,
            details: serde_json::Value::Null,
        }
    }

    pub fn with_details(mut self, details: serde_json::Value) -> CheckVerdict {
        self.details = details;
        self
    }
}

/// CSV rendition of a tail curve: `t,p,ci_lo,ci_hi` (CI columns empty in
/// exact mode).
pub fn tail_curve_csv(curve: &crate::problab::TailCurve) -> String {
    let mut out = String::from("t,p,ci_lo,ci_hi\n");
    for (i, (&t, &p)) in curve.t.iter().zip(&curve.p).enumerate() {
        match &curve.ci {
            Some(ci) => {
                let [lo, hi] = ci[i];
                out.push_str(&format!("{t},{p},{lo},{hi}\n"));
            }
            None => out.push_str(&format!("{t},{p},,\n")),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_short() {
        let a = params_digest(&serde_json::json!({"n": 3, "seed": 7}));
        let b = params_digest(&serde_json::json!({"n": 3, "seed": 7}));
        let c = params_digest(&serde_json::json!({"n": 4, "seed": 7}));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 16);
    }

    #[test]
    fn derived_seeds_differ_by_label() {
        assert_ne!(derive_seed(1, "coupled"), derive_seed(1, "decoupled"));
        assert_eq!(derive_seed(1, "coupled"), derive_seed(1, "coupled"));
    }
}

//! Serialized run reports and error objects.

use serde::{Deserialize, Serialize};
use wallach_core::calabi::{BlockVerdict, Certainty};

/// Inputs of a run. Fields a subcommand does not use are omitted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_abs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_from: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_to: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    /// Closed-form membership of `λ` in the Wallach set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wallach: Option<bool>,
    /// Truncated Calabi verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calabi_psd: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certainty: Option<Certainty>,
    /// Whether the Gram search found an indefinite configuration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram_witness: Option<bool>,
    /// Closed-form Cartan–Hartogs reduction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ch_induced: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub subcommand: String,
    pub domain: String,
    pub params: Params,
    pub verdicts: Verdicts,
    #[serde(default)]
    pub blocks: Vec<BlockVerdict>,
    /// `Some(true)` when closed form and numerics coincide, `None` when the
    /// run has nothing to compare.
    pub agreement: Option<bool>,
    /// Subcommand-specific payload.
    pub details: serde_json::Value,
    pub threads: usize,
    pub duration_s: f64,
}

impl RunReport {
    pub fn new(command: &[String], subcommand: &str, domain: String) -> Self {
        Self {
            command: command.to_vec(),
            subcommand: subcommand.to_string(),
            domain,
            params: Params::default(),
            verdicts: Verdicts::default(),
            blocks: Vec::new(),
            agreement: None,
            details: serde_json::Value::Null,
            threads: 1,
            duration_s: 0.0,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.agreement == Some(false) {
            2
        } else {
            0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
}

/// `{"error": {"kind": ..., "message": ...}}`, written in JSON mode on failure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub error: ErrorBody,
}

impl ErrorReport {
    pub fn from_anyhow(e: &anyhow::Error) -> Self {
        let kind = e
            .downcast_ref::<wallach_core::Error>()
            .map(|c| c.kind().to_string())
            .or_else(|| e.downcast_ref::<std::io::Error>().map(|_| "io".to_string()))
            .or_else(|| e.downcast_ref::<serde_json::Error>().map(|_| "json".to_string()))
            .unwrap_or_else(|| "runtime".to_string());
        Self { error: ErrorBody { kind, message: format!("{e:#}") } }
    }
}

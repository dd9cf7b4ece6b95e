//! Run reports.
//!
//! The payload holds everything that must reproduce bit-for-bit; wall-clock
//! time sits outside it. Non-finite numbers are written as the strings
//! `"inf"`, `"-inf"` and `"nan"`.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::certificate::{Certificate, Status};
use crate::harness::instance::{raw_vector, RawVector};

pub fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::Number::from_f64(x)
            .map(Value::Number)
            .expect("finite")
    } else if x.is_nan() {
        Value::String("nan".into())
    } else if x > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

pub fn num_map(values: &BTreeMap<String, f64>) -> BTreeMap<String, Value> {
    values.iter().map(|(k, v)| (k.clone(), num(*v))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateRecord {
    pub claim: String,
    pub status: &'static str,
    pub values: BTreeMap<String, Value>,
    pub tol: Value,
    pub rtol: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<RawVector>,
    pub notes: Vec<String>,
}

impl From<&Certificate> for CertificateRecord {
    fn from(c: &Certificate) -> Self {
        CertificateRecord {
            claim: c.claim.clone(),
            status: c.status.as_str(),
            values: num_map(&c.values),
            tol: num(c.tol),
            rtol: num(c.rtol),
            samples: c.samples,
            seed: c.seed,
            witness: c.witness.as_ref().map(raw_vector),
            notes: c.notes.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub status: &'static str,
    pub pass: bool,
    pub values: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<RawVector>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
    pub errors: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Payload {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub instance_digest: String,
    pub status: &'static str,
    pub certificates: Vec<CertificateRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trials: Vec<TrialRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Summary>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub tables: BTreeMap<String, Value>,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub payload: Payload,
    pub wall_clock_ms: f64,
}

#[derive(Serialize)]
struct Full<'a> {
    #[serde(flatten)]
    payload: &'a Payload,
    wall_clock_ms: Value,
}

impl RunReport {
    pub fn new(command: &str, seed: u64, digest: String) -> Self {
        RunReport {
            payload: Payload {
                command: command.to_string(),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                seed,
                instance_digest: digest,
                status: Status::Certified.as_str(),
                certificates: Vec::new(),
                trials: Vec::new(),
                summary: None,
                tables: BTreeMap::new(),
            },
            wall_clock_ms: 0.0,
        }
    }

    pub fn status(&self) -> Status {
        Status::parse(self.payload.status).expect("status strings are canonical")
    }

    pub fn set_status(&mut self, s: Status) {
        self.payload.status = s.as_str();
    }

    pub fn push_certificate(&mut self, c: &Certificate) {
        let s = self.status().worst(c.status);
        self.payload.certificates.push(c.into());
        self.set_status(s);
    }

    pub fn payload_json(&self) -> String {
        serde_json::to_string_pretty(&self.payload).expect("payload serializes")
    }

    pub fn to_json(&self) -> String {
        let full = Full {
            payload: &self.payload,
            wall_clock_ms: num(self.wall_clock_ms),
        };
        serde_json::to_string_pretty(&full).expect("report serializes")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

//! Outcomes of bound and inequality checks.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::DEFAULT_TOL;
use crate::hilbmod::ModuleVector;

/// Default singular-value cutoff for pseudo-inverses.
pub const DEFAULT_RTOL: f64 = 1e-10;
pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Certified,
    Falsified,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Certified => "certified",
            Status::Falsified => "falsified",
            Status::Inconclusive => "inconclusive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "certified" => Some(Status::Certified),
            "falsified" => Some(Status::Falsified),
            "inconclusive" => Some(Status::Inconclusive),
            _ => None,
        }
    }

    fn severity(self) -> u8 {
        match self {
            Status::Certified => 0,
            Status::Inconclusive => 1,
            Status::Falsified => 2,
        }
    }

    /// The worse of two statuses (falsified > inconclusive > certified).
    pub fn worst(self, other: Status) -> Status {
        if other.severity() > self.severity() {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Tolerances and sampling parameters shared by the checkers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckConfig {
    /// Relative tolerance for positivity and residual tests.
    pub tol: f64,
    /// Singular-value cutoff for pseudo-inverses.
    pub rtol: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            tol: DEFAULT_TOL,
            rtol: DEFAULT_RTOL,
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

impl CheckConfig {
    pub fn with_tol(tol: f64) -> Self {
        CheckConfig {
            tol,
            ..Default::default()
        }
    }

    pub fn samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub claim: String,
    pub status: Status,
    /// Named numeric evidence: extremal eigenvalues, pencil values, residuals.
    pub values: BTreeMap<String, f64>,
    pub tol: f64,
    pub rtol: f64,
    /// Present when the verdict rests on sampling.
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    /// A vector violating the claim; always present when falsified.
    pub witness: Option<ModuleVector>,
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn new(claim: impl Into<String>, cfg: &CheckConfig) -> Self {
        Certificate {
            claim: claim.into(),
            status: Status::Certified,
            values: BTreeMap::new(),
            tol: cfg.tol,
            rtol: cfg.rtol,
            samples: None,
            seed: None,
            witness: None,
            notes: Vec::new(),
        }
    }

    pub fn value(&mut self, key: &str, v: f64) -> &mut Self {
        self.values.insert(key.to_string(), v);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn note(&mut self, msg: impl Into<String>) -> &mut Self {
        self.notes.push(msg.into());
        self
    }

    pub fn sampled(&mut self, samples: usize, seed: u64) -> &mut Self {
        self.samples = Some(samples);
        self.seed = Some(seed);
        self
    }

    /// Mark falsified with the given witness; keeps the first witness found.
    pub fn falsify(&mut self, witness: ModuleVector) -> &mut Self {
        self.status = Status::Falsified;
        if self.witness.is_none() {
            self.witness = Some(witness);
        }
        self
    }

    pub fn downgrade(&mut self, to: Status) -> &mut Self {
        self.status = self.status.worst(to);
        self
    }

    pub fn is_certified(&self) -> bool {
        self.status == Status::Certified
    }

    /// Fold a sub-certificate in: worst status, prefixed values, first witness.
    pub fn absorb(&mut self, prefix: &str, other: &Certificate) -> &mut Self {
        self.status = self.status.worst(other.status);
        for (k, v) in &other.values {
            self.values.insert(format!("{prefix}.{k}"), *v);
        }
        if self.witness.is_none() {
            self.witness = other.witness.clone();
        }
        if other.samples.is_some() && self.samples.is_none() {
            self.samples = other.samples;
            self.seed = other.seed;
        }
        for n in &other.notes {
            self.notes.push(format!("{prefix}: {n}"));
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_status_ordering() {
        use Status::*;
        assert_eq!(Certified.worst(Inconclusive), Inconclusive);
        assert_eq!(Falsified.worst(Inconclusive), Falsified);
        assert_eq!(Certified.worst(Certified), Certified);
        for s in [Certified, Falsified, Inconclusive] {
            assert_eq!(Status::parse(s.as_str()), Some(s));
        }
    }
}

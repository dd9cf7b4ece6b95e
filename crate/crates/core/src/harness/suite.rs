//! Audit ensembles.
//!
//! Trials run on the rayon pool; results are collected in trial order so the
//! report does not depend on scheduling.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::AlgElement;
use crate::certificate::{Certificate, CheckConfig, Status};
use crate::douglas;
use crate::error::{input, Error, Result};
use crate::frames::{
    atomic_coefficients, certify_kframe, coisometry_audit, conjugation_audit, dual_atoms,
    reconstruction_residual,
};
use crate::harness::instance::{raw_vector, Instance};
use crate::harness::profiles::{planted_abg_family, trial_instance, Profile, EXAMPLE_N};
use crate::harness::report::{num_map, sha256_hex, RunReport, Summary, TrialRecord};
use crate::hilbmod::ModuleVector;
use crate::perturb::{pertur1_audit, pertur2_audit, Abg};
use crate::rng::StreamRng;
use crate::tensorprod::{tensor_frame_audit, FactorBounds};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    DouglasEquivalence,
    KframeAtomic,
    Conjugation,
    Tensor,
    CoIsometry,
    Perturbation,
    ExampleTruncation,
}

pub const SUITES: [Suite; 7] = [
    Suite::DouglasEquivalence,
    Suite::KframeAtomic,
    Suite::Conjugation,
    Suite::Tensor,
    Suite::CoIsometry,
    Suite::Perturbation,
    Suite::ExampleTruncation,
];

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::DouglasEquivalence => "douglas-equivalence",
            Suite::KframeAtomic => "kframe-atomic",
            Suite::Conjugation => "conjugation",
            Suite::Tensor => "tensor",
            Suite::CoIsometry => "co-isometry",
            Suite::Perturbation => "perturbation",
            Suite::ExampleTruncation => "paper-example",
        }
    }

    fn profile(self, n: usize) -> Profile {
        match self {
            Suite::DouglasEquivalence => Profile::DouglasPlanted,
            Suite::KframeAtomic | Suite::Conjugation => Profile::Generic,
            Suite::Tensor => Profile::TensorPair,
            Suite::CoIsometry => Profile::CoisometryCommuting,
            Suite::Perturbation => Profile::Perturbation,
            Suite::ExampleTruncation => Profile::ExampleTruncation(n),
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SUITES
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub samples: usize,
    /// Truncation size for the example suite.
    pub n: usize,
}

impl SuiteConfig {
    pub fn new(suite: Suite, trials: usize, seed: u64) -> Self {
        SuiteConfig {
            suite,
            trials,
            seed,
            tol: crate::DEFAULT_TOL,
            samples: 1000,
            n: EXAMPLE_N,
        }
    }

    fn check(&self) -> CheckConfig {
        CheckConfig {
            tol: self.tol,
            samples: self.samples,
            seed: self.seed,
            ..CheckConfig::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub trial: usize,
    pub status: Status,
    pub pass: bool,
    pub values: BTreeMap<String, f64>,
    pub error: Option<String>,
    pub notes: Vec<String>,
    pub witness: Option<ModuleVector>,
}

impl TrialOutcome {
    fn new(trial: usize) -> Self {
        TrialOutcome {
            trial,
            status: Status::Certified,
            pass: true,
            values: BTreeMap::new(),
            error: None,
            notes: Vec::new(),
            witness: None,
        }
    }

    fn take(&mut self, prefix: &str, c: &Certificate) {
        for (k, v) in &c.values {
            self.values.insert(format!("{prefix}.{k}"), *v);
        }
        if self.witness.is_none() {
            self.witness = c.witness.clone();
        }
        self.notes
            .extend(c.notes.iter().map(|n| format!("{prefix}: {n}")));
    }

    fn set(&mut self, key: &str, v: f64) {
        self.values.insert(key.to_string(), v);
    }

    fn require(&mut self, ok: bool, why: &str) {
        if !ok {
            self.pass = false;
            self.notes.push(why.to_string());
        }
    }

    fn finish(mut self) -> Self {
        if !self.pass {
            self.status = Status::Falsified;
        }
        self
    }

    fn record(&self) -> TrialRecord {
        TrialRecord {
            trial: self.trial,
            status: self.status.as_str(),
            pass: self.pass,
            values: num_map(&self.values),
            error: self.error.clone(),
            notes: self.notes.clone(),
            witness: self.witness.as_ref().map(raw_vector),
        }
    }
}

pub fn run_trial(cfg: &SuiteConfig, trial: usize) -> TrialOutcome {
    let inst = trial_instance(cfg.seed, trial as u64, cfg.suite.profile(cfg.n));
    let check = cfg.check();
    let mut out = TrialOutcome::new(trial);
    let res = match cfg.suite {
        Suite::DouglasEquivalence => douglas_trial(&inst, trial, &check, &mut out),
        Suite::KframeAtomic => kframe_atomic_trial(&inst, &check, &mut out),
        Suite::Conjugation => conjugation_trial(&inst, &mut out),
        Suite::Tensor => tensor_trial(&inst, &check, &mut out),
        Suite::CoIsometry => coisometry_trial(&inst, &check, &mut out),
        Suite::Perturbation => perturbation_trial(&inst, cfg, trial, &check, &mut out),
        Suite::ExampleTruncation => example_trial(&inst, cfg, &check, &mut out),
    };
    if let Err(e) = res {
        out.error = Some(e.to_string());
        out.pass = false;
    }
    out.finish()
}

fn douglas_trial(
    inst: &Instance,
    trial: usize,
    cfg: &CheckConfig,
    out: &mut TrialOutcome,
) -> Result<()> {
    let t = inst.k.as_ref().expect("planted T");
    let cert = douglas::equivalence_audit(t, inst.frame.synthesis_op(), cfg)?;
    out.take("audit", &cert);
    let planted = trial.is_multiple_of(2);
    out.set("planted_inclusion", planted as u8 as f64);
    out.require(
        cert.status != Status::Falsified,
        "the four conditions disagree",
    );
    out.require(
        cert.get("all_hold") == Some(planted as u8 as f64),
        "verdict differs from the planted inclusion",
    );
    out.status = cert.status;
    Ok(())
}

/// K-frame certification against the factorization route.
fn kframe_atomic_trial(inst: &Instance, cfg: &CheckConfig, out: &mut TrialOutcome) -> Result<()> {
    let k = inst.k.as_ref().expect("generic K");
    let (a, b) = (
        inst.bounds.a.as_ref().expect("A"),
        inst.bounds.b.as_ref().expect("B"),
    );
    let cert = certify_kframe(&inst.frame, k, a, b, cfg)?;
    out.take("kframe", &cert);
    let frame_ok = cert.is_certified();

    let atomic_ok = match atomic_coefficients(&inst.frame, k, cfg) {
        Ok(sys) => {
            out.set("atomic.residual", sys.residual);
            out.set("atomic.q_norm", sys.q_norm);
            let mut ok = sys.residual <= 1e-8;
            let q2 = sys.q_norm * sys.q_norm;
            let mut rng = StreamRng::new(cfg.seed, 1 << 32);
            for _ in 0..20 {
                let f = ModuleVector::random(inst.spec(), inst.rank(), &mut rng);
                let qf = sys.coefficients(&f)?;
                let gap = &f.inner(&f)?.scale_real(q2) - &qf.inner(&qf)?;
                ok &= gap.is_positive(1e-9);
            }
            if ok {
                let duals = dual_atoms(&inst.frame, k, cfg)?;
                let r = reconstruction_residual(&inst.frame, k, &duals, 20, cfg.seed)?;
                out.set("dual.residual", r);
                out.require(r <= 1e-9, "dual atoms do not reconstruct K");
            }
            ok
        }
        Err(Error::NotAtomic { residual }) => {
            out.set("atomic.residual", residual);
            false
        }
        Err(e) => return Err(e),
    };
    out.set("kframe.certified", frame_ok as u8 as f64);
    out.set("atomic.holds", atomic_ok as u8 as f64);
    out.require(
        frame_ok == atomic_ok,
        "K-frame and atomic-system verdicts differ",
    );
    Ok(())
}

fn conjugation_trial(inst: &Instance, out: &mut TrialOutcome) -> Result<()> {
    let k = inst.k.as_ref().expect("generic K");
    let l = inst.l.as_ref().expect("generic L");
    let ck = conjugation_audit(&inst.frame, k)?;
    out.set("k.lsl_adj", ck.lsl_adj);
    out.require(
        ck.lsl_adj <= 1e-10,
        "frame operator of {K f_j} differs from K S K*",
    );
    let cl = conjugation_audit(&inst.frame, l)?;
    out.set("l.lsl_adj", cl.lsl_adj);
    if let Some(x) = cl.ladj_sl {
        out.set("l.ladj_sl", x);
    }
    let matching = cl.matching(1e-10);
    out.notes.push(format!("L: {matching} matches"));
    out.require(
        matching == "LSL*" || matching == "both",
        "L S L* does not match",
    );
    Ok(())
}

fn tensor_trial(inst: &Instance, cfg: &CheckConfig, out: &mut TrialOutcome) -> Result<()> {
    let right = inst.right.as_ref().expect("tensor pair");
    let left_b = FactorBounds {
        k: inst.k.as_ref().expect("K"),
        lower: inst.bounds.a.as_ref().expect("A"),
        upper: inst.bounds.b.as_ref().expect("B"),
    };
    let right_b = FactorBounds {
        k: right.k.as_ref().expect("L"),
        lower: right.bounds.a.as_ref().expect("C"),
        upper: right.bounds.b.as_ref().expect("D"),
    };
    let cert = tensor_frame_audit(&inst.frame, &right.frame, left_b, right_b, cfg)?;
    out.take("tensor", &cert);
    out.status = cert.status;
    out.require(cert.is_certified(), "tensor family not certified");
    Ok(())
}

fn coisometry_trial(inst: &Instance, cfg: &CheckConfig, out: &mut TrialOutcome) -> Result<()> {
    let cert = coisometry_audit(
        &inst.frame,
        inst.k.as_ref().expect("K"),
        inst.t.as_ref().expect("T"),
        cfg,
    )?;
    out.take("coisometry", &cert);
    out.status = cert.status;
    out.require(
        cert.is_certified(),
        "optimal bounds moved under the co-isometry",
    );
    Ok(())
}

fn perturbation_trial(
    inst: &Instance,
    suite: &SuiteConfig,
    trial: usize,
    cfg: &CheckConfig,
    out: &mut TrialOutcome,
) -> Result<()> {
    let k = inst.k.as_ref().expect("K");
    let (a, b) = (
        inst.bounds.a.as_ref().expect("A"),
        inst.bounds.b.as_ref().expect("B"),
    );
    let h = inst.perturbed.as_ref().expect("perturbed family");
    let r1 = pertur1_audit(&inst.frame, h, k, k, a, b, cfg)?;
    out.take("pertur1", &r1.conclusion);
    let bessel = r1.conclusion.get("bessel.norm").unwrap_or(f64::INFINITY);
    out.require(
        r1.status() == Status::Certified,
        "pertur1 conclusion not certified",
    );
    out.require(
        bessel <= (1.0 + r1.m.sqrt()) * b.norm() + 1e-9,
        "Bessel norm exceeds (1+√M)||B||",
    );
    out.require(
        r1.sampled_m <= r1.m + 1e-9,
        "sampled ratio exceeds the certified M",
    );

    let abg = inst.abg.unwrap_or(Abg::new(0.2, 0.1, 0.05));
    let mut rng = StreamRng::new(suite.seed, (1 << 40) + trial as u64);
    let h2 = planted_abg_family(&inst.frame, abg.alpha, &mut rng);
    let r2 = pertur2_audit(&inst.frame, &h2, k, k, abg, a, b, cfg)?;
    out.take("pertur2", &r2.conclusion);
    let hyp_passed = r2.conclusion.claim != "pertur2-hypothesis";
    out.set("pertur2.hypothesis_passed", hyp_passed as u8 as f64);
    if hyp_passed {
        out.require(
            r2.status() == Status::Certified,
            "pertur2 conclusion not certified",
        );
    }
    out.status = r1.status().worst(if hyp_passed {
        r2.status()
    } else {
        Status::Certified
    });
    Ok(())
}

/// `K = S`, `a_u = Q u` with `<a_u, a_u> = C <u,u> C^*` for 100 random `u`.
fn example_trial(
    inst: &Instance,
    suite: &SuiteConfig,
    cfg: &CheckConfig,
    out: &mut TrialOutcome,
) -> Result<()> {
    let k = inst.k.as_ref().expect("K = S");
    let cc = inst.bounds.c.as_ref().expect("C");
    let sys = atomic_coefficients(&inst.frame, k, cfg)?;
    out.set("n", suite.n as f64);
    out.set("atomic.residual", sys.residual);
    let bessel = crate::frames::certify_star_bessel(&inst.frame, cc, cfg)?;
    out.take("bessel", &bessel);
    out.require(bessel.is_certified(), "family is not *-Bessel with bound C");
    let mut rng = StreamRng::new(cfg.seed, 0);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let u = ModuleVector::random(inst.spec(), 1, &mut rng);
        let au = sys.coefficients(&u)?;
        let lhs = au.inner(&au)?;
        let rhs: AlgElement = &(cc * &u.inner(&u)?) * &cc.adjoint();
        worst = worst.max(lhs.distance(&rhs));
    }
    out.set("equality.max_error", worst);
    out.require(sys.residual <= 1e-12, "K = U Q fails");
    out.require(worst <= 1e-12, "coefficient bound is not an equality");
    Ok(())
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<RunReport> {
    if cfg.trials == 0 {
        return input("at least one trial required");
    }
    let start = Instant::now();
    let trials = if cfg.suite == Suite::ExampleTruncation {
        1
    } else {
        cfg.trials
    };
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect();

    let digest = sha256_hex(
        serde_json::to_string(cfg)
            .expect("config serializes")
            .as_bytes(),
    );
    let mut report = RunReport::new(&format!("suite {}", cfg.suite.name()), cfg.seed, digest);
    let mut summary = Summary {
        total: outcomes.len(),
        ..Summary::default()
    };
    let mut status = Status::Certified;
    for o in &outcomes {
        if o.error.is_some() {
            summary.errors += 1;
        }
        match (o.pass, o.status) {
            (true, Status::Inconclusive) => summary.inconclusive += 1,
            (true, _) => summary.passed += 1,
            (false, _) => summary.failed += 1,
        }
        status = status.worst(o.status);
    }
    report.payload.trials = outcomes.iter().map(TrialOutcome::record).collect();
    report.payload.summary = Some(summary);
    report.payload.tables.insert(
        "config".into(),
        serde_json::to_value(cfg).expect("config serializes"),
    );
    report.set_status(status);
    report.wall_clock_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

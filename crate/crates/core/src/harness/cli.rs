//! Command-line front end.
//!
//! Exit codes: 0 certified or all-pass, 1 falsified, 2 inconclusive, 3 input
//! error (including unmet hypotheses).

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::certificate::{Certificate, CheckConfig, Status};
use crate::douglas;
use crate::error::{input, Error, Result};
use crate::frames::{
    atomic_coefficients, certify_kframe, certify_star_bessel, certify_star_frame,
    conjugation_audit, dual_atoms, local_atoms_check, optimal_scalar_bounds,
    reconstruction_residual,
};
use crate::harness::instance::{parse_instance, raw_vector, Instance};
use crate::harness::profiles::{random_instance, Profile};
use crate::harness::report::{sha256_hex, RunReport};
use crate::harness::suite::{run_suite, Suite, SuiteConfig};
use crate::hilbmod::ModuleOperator;
use crate::perturb::{pertur1_audit, pertur1_converse_audit, pertur2_audit, PerturbReport};
use crate::tensorprod::{tensor_frame_audit, FactorBounds};

pub const EXIT_CERTIFIED: u8 = 0;
pub const EXIT_FALSIFIED: u8 = 1;
pub const EXIT_INCONCLUSIVE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "starframe",
    version,
    about = "Certify *-frames, *-K-frames and atomic systems over finite-dimensional C*-algebras"
)]
pub struct Cli {
    /// Instance file (JSON).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Absolute/relative tolerance [default: 1e-9, or the instance's].
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Samples for sampled checks [default: 1000, or the instance's].
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the full JSON report here.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Generate the instance from a built-in ensemble instead of --input.
    #[arg(long, global = true)]
    pub profile: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// *-frame with bounds A, B.
    CheckFrame,
    /// *-K-frame with bounds A, B.
    CheckKframe,
    /// Coefficient operator Q with K = U Q.
    AtomicSystem,
    /// Dual atoms h_j with K f = sum <f, h_j> f_j.
    DualAtoms,
    /// Local atoms for R(P) with functionals and coefficient bound C.
    LocalAtoms,
    /// Range inclusion R(K) ⊆ R(U) by four routes.
    Douglas,
    /// Optimal scalar bounds against K (identity if absent).
    Bounds,
    /// Tensor product with the `right` sub-instance.
    Tensor,
    /// Min-form perturbation; converse too when bounds c, d are given.
    Perturb1,
    /// Three-constant perturbation.
    Perturb2,
    /// Run an audit ensemble.
    Suite {
        /// douglas-equivalence, kframe-atomic, conjugation, tensor,
        /// co-isometry, perturbation or paper-example.
        name: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Truncation size for the `paper-example` suite.
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CheckFrame => "check-frame",
            Command::CheckKframe => "check-kframe",
            Command::AtomicSystem => "atomic-system",
            Command::DualAtoms => "dual-atoms",
            Command::LocalAtoms => "local-atoms",
            Command::Douglas => "douglas",
            Command::Bounds => "bounds",
            Command::Tensor => "tensor",
            Command::Perturb1 => "perturb1",
            Command::Perturb2 => "perturb2",
            Command::Suite { .. } => "suite",
        }
    }
}

pub fn exit_code(s: Status) -> u8 {
    match s {
        Status::Certified => EXIT_CERTIFIED,
        Status::Falsified => EXIT_FALSIFIED,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

/// Parses `args` (including the program name), runs, prints the report and
/// returns the exit code.
pub fn run_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_CERTIFIED
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let json = report.to_json();
            if let Some(path) = &cli.report {
                if let Err(e) = std::fs::write(path, &json) {
                    eprintln!("starframe: cannot write report {}: {e}", path.display());
                    return EXIT_INPUT;
                }
            }
            println!("{json}");
            exit_code(report.status())
        }
        Err(e) => {
            eprintln!("starframe: {e}");
            EXIT_INPUT
        }
    }
}

pub fn run() -> u8 {
    run_from(std::env::args_os())
}

fn load(cli: &Cli) -> Result<(Instance, String)> {
    match (&cli.input, &cli.profile) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
            let inst = parse_instance(&text)?;
            let digest = sha256_hex(inst.to_json().as_bytes());
            Ok((inst, digest))
        }
        (None, Some(name)) => {
            let profile: Profile = name.parse()?;
            let inst = random_instance(cli.seed.unwrap_or(0), profile);
            let digest = sha256_hex(inst.to_json().as_bytes());
            Ok((inst, digest))
        }
        (None, None) => input("either --input or --profile is required"),
    }
}

fn config(cli: &Cli, inst: Option<&Instance>) -> Result<CheckConfig> {
    let tol = cli
        .tol
        .or(inst.and_then(|i| i.tol))
        .unwrap_or(crate::DEFAULT_TOL);
    if !(tol >= 0.0 && tol.is_finite()) {
        return input("--tol must be a finite nonnegative number");
    }
    let samples = cli
        .samples
        .or(inst.and_then(|i| i.samples))
        .unwrap_or(crate::certificate::DEFAULT_SAMPLES);
    let seed = cli.seed.or(inst.and_then(|i| i.seed)).unwrap_or(0);
    Ok(CheckConfig {
        tol,
        samples,
        seed,
        ..CheckConfig::default()
    })
}

fn need<'a, T>(x: Option<&'a T>, what: &str) -> Result<&'a T> {
    x.ok_or_else(|| Error::Input(format!("instance has no {what}")))
}

fn k_or_identity(inst: &Instance) -> ModuleOperator {
    inst.k
        .clone()
        .unwrap_or_else(|| ModuleOperator::identity(inst.spec(), inst.rank()))
}

pub fn execute(cli: &Cli) -> Result<RunReport> {
    let start = Instant::now();
    if let Command::Suite { name, trials, n } = &cli.command {
        let cfg = config(cli, None)?;
        let suite: Suite = name.parse()?;
        let sc = SuiteConfig {
            suite,
            trials: *trials,
            seed: cfg.seed,
            tol: cfg.tol,
            samples: cfg.samples,
            n: *n,
        };
        if suite == Suite::ExampleTruncation && *n == 0 {
            return input("--n must be at least 1");
        }
        return run_suite(&sc);
    }
    let (inst, digest) = load(cli)?;
    let cfg = config(cli, Some(&inst))?;
    let mut report = RunReport::new(cli.command.name(), cfg.seed, digest);
    let bounds = &inst.bounds;
    match &cli.command {
        Command::CheckFrame => {
            let c = certify_star_frame(
                &inst.frame,
                need(bounds.a.as_ref(), "bounds.a")?,
                need(bounds.b.as_ref(), "bounds.b")?,
                &cfg,
            )?;
            report.push_certificate(&c);
        }
        Command::CheckKframe => {
            let c = certify_kframe(
                &inst.frame,
                need(inst.k.as_ref(), "k")?,
                need(bounds.a.as_ref(), "bounds.a")?,
                need(bounds.b.as_ref(), "bounds.b")?,
                &cfg,
            )?;
            report.push_certificate(&c);
        }
        Command::AtomicSystem => {
            let k = need(inst.k.as_ref(), "k")?;
            let mut c = Certificate::new("atomic-system", &cfg);
            match atomic_coefficients(&inst.frame, k, &cfg) {
                Ok(sys) => {
                    c.value("residual", sys.residual)
                        .value("q_norm", sys.q_norm)
                        .value("c_norm", sys.c.norm());
                    report.payload.tables.insert(
                        "coefficient_bound".into(),
                        crate::harness::report::num(sys.q_norm),
                    );
                }
                Err(Error::NotAtomic { residual }) => {
                    c.value("residual", residual);
                    c.note("R(K) is not contained in R(U)");
                    c.status = Status::Falsified;
                }
                Err(e) => return Err(e),
            }
            if let Some(b) = &bounds.b {
                let bessel = certify_star_bessel(&inst.frame, b, &cfg)?;
                c.absorb("bessel", &bessel);
            }
            report.push_certificate(&c);
        }
        Command::DualAtoms => {
            let k = need(inst.k.as_ref(), "k")?;
            let mut c = Certificate::new("dual-atoms", &cfg);
            match dual_atoms(&inst.frame, k, &cfg) {
                Ok(duals) => {
                    let r = reconstruction_residual(&inst.frame, k, &duals, cfg.samples, cfg.seed)?;
                    c.value("reconstruction.residual", r)
                        .sampled(cfg.samples, cfg.seed);
                    if r > cfg.tol.max(1e-9) * k.norm().max(1.0) {
                        c.status = Status::Falsified;
                    }
                    let raw: Vec<_> = duals.iter().map(raw_vector).collect();
                    report.payload.tables.insert(
                        "dual_atoms".into(),
                        serde_json::to_value(raw).expect("serializes"),
                    );
                }
                Err(Error::NotAtomic { residual }) => {
                    c.value("residual", residual);
                    c.note("R(K) is not contained in R(U)");
                    c.status = Status::Falsified;
                }
                Err(e) => return Err(e),
            }
            report.push_certificate(&c);
        }
        Command::LocalAtoms => {
            let c = local_atoms_check(
                &inst.frame,
                need(inst.p.as_ref(), "p")?,
                need(inst.functionals.as_ref(), "functionals")?,
                need(bounds.c.as_ref(), "bounds.c")?,
                &cfg,
            )?;
            report.push_certificate(&c);
        }
        Command::Douglas => {
            let c = douglas::equivalence_audit(
                need(inst.k.as_ref(), "k")?,
                inst.frame.synthesis_op(),
                &cfg,
            )?;
            report.push_certificate(&c);
        }
        Command::Bounds => {
            let k = k_or_identity(&inst);
            let (lam, mu) = optimal_scalar_bounds(&inst.frame, &k)?;
            let mut c = Certificate::new("optimal-bounds", &cfg);
            c.value("lambda", lam)
                .value("mu", mu)
                .value("sqrt_lambda", lam.sqrt())
                .value("sqrt_mu", mu.sqrt());
            if let Some(l) = &inst.l {
                let audit = conjugation_audit(&inst.frame, l)?;
                c.value("conjugation.lsl_adj", audit.lsl_adj);
                if let Some(x) = audit.ladj_sl {
                    c.value("conjugation.ladj_sl", x);
                }
                c.note(format!("conjugation: {} matches", audit.matching(1e-10)));
            }
            report.push_certificate(&c);
        }
        Command::Tensor => {
            let right = need(inst.right.as_deref(), "right")?;
            let k = k_or_identity(&inst);
            let l = k_or_identity(right);
            let c = tensor_frame_audit(
                &inst.frame,
                &right.frame,
                FactorBounds {
                    k: &k,
                    lower: need(bounds.a.as_ref(), "bounds.a")?,
                    upper: need(bounds.b.as_ref(), "bounds.b")?,
                },
                FactorBounds {
                    k: &l,
                    lower: need(right.bounds.a.as_ref(), "right.bounds.a")?,
                    upper: need(right.bounds.b.as_ref(), "right.bounds.b")?,
                },
                &cfg,
            )?;
            report.push_certificate(&c);
        }
        Command::Perturb1 => {
            let h = need(inst.perturbed.as_ref(), "perturbed")?;
            let k = k_or_identity(&inst);
            let l = inst.l.clone().unwrap_or_else(|| k.clone());
            let (a, b) = (
                need(bounds.a.as_ref(), "bounds.a")?,
                need(bounds.b.as_ref(), "bounds.b")?,
            );
            let rep = pertur1_audit(&inst.frame, h, &k, &l, a, b, &cfg)?;
            push_perturb(&mut report, "pertur1", &rep);
            if let (Some(c), Some(d)) = (&bounds.c, &bounds.d) {
                let conv = pertur1_converse_audit(&inst.frame, h, &k, &l, a, b, c, d, &cfg)?;
                push_perturb(&mut report, "pertur1_converse", &conv);
            }
        }
        Command::Perturb2 => {
            let h = need(inst.perturbed.as_ref(), "perturbed")?;
            let abg = *need(inst.abg.as_ref(), "perturbation")?;
            let k = k_or_identity(&inst);
            let l = inst.l.clone().unwrap_or_else(|| k.clone());
            let (a, b) = (
                need(bounds.a.as_ref(), "bounds.a")?,
                need(bounds.b.as_ref(), "bounds.b")?,
            );
            let rep = pertur2_audit(&inst.frame, h, &k, &l, abg, a, b, &cfg)?;
            push_perturb(&mut report, "pertur2", &rep);
        }
        Command::Suite { .. } => unreachable!("handled above"),
    }
    report.wall_clock_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

fn push_perturb(report: &mut RunReport, key: &str, rep: &PerturbReport) {
    use crate::harness::report::num;
    let mut table = serde_json::Map::new();
    table.insert("branch_m_f".into(), num(rep.branch_m_f));
    table.insert("branch_m_h".into(), num(rep.branch_m_h));
    table.insert("sampled_m".into(), num(rep.sampled_m));
    table.insert("m".into(), num(rep.m));
    let constants: serde_json::Map<String, serde_json::Value> = rep
        .constants
        .iter()
        .map(|(k, v)| (k.clone(), num(*v)))
        .collect();
    table.insert("constants".into(), serde_json::Value::Object(constants));
    report
        .payload
        .tables
        .insert(key.into(), serde_json::Value::Object(table));
    report.push_certificate(&rep.conclusion);
}

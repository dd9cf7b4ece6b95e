//! Perturbations of *-K-frames.
//!
//! With `D` the synthesis operator of `{f_j - h_j}`, the quantity
//! `||sum_j <f, f_j - h_j><f_j - h_j, f>||` is `||D^* f||^2`. Both perturbation
//! conditions compare it with `||U_F^* f||^2`, `||U_H^* f||^2` and `||K^* f||^2`.
//!
//! The branch constants `M_f`, `M_h` are generalized eigenvalues of
//! `(D D^*, U U^*)` on the flattening. Operator dominance implies the norm
//! inequality, so they bound the norm-form optimum from above. The min-form
//! condition needs both branches at once, so the certified `M` is
//! `max(M_f, M_h)`.
//!
//! Lower frame bounds use `s_A = ||A^{-1}||^{-1}`, the smallest spectral
//! modulus of a central bound `A`; `A <K^*f,K^*f> A^* ⪰ s_A^2 <K^*f,K^*f>`.

use std::collections::BTreeMap;

use crate::algebra::AlgElement;
use crate::certificate::{Certificate, CheckConfig, Status};
use crate::douglas;
use crate::error::{input, Error, Result};
use crate::frames::{certify_kframe, FrameSeq};
use crate::hilbmod::{ModuleOperator, ModuleVector};
use crate::rng::StreamRng;

#[derive(Clone, Debug)]
pub struct PerturbReport {
    /// Smallest `M` with `D D^* ⪯ M U_F U_F^*`; infinite if `R(D) ⊄ R(U_F)`.
    pub branch_m_f: f64,
    /// Same against `U_H`.
    pub branch_m_h: f64,
    /// Largest sampled `||D^*f||^2 / min(||U_F^*f||^2, ||U_H^*f||^2)`.
    pub sampled_m: f64,
    /// `max(branch_m_f, branch_m_h)`.
    pub m: f64,
    pub conclusion: Certificate,
    pub constants: BTreeMap<String, f64>,
}

impl PerturbReport {
    pub fn status(&self) -> Status {
        self.conclusion.status
    }
}

fn check_pair(f: &FrameSeq, h: &FrameSeq) -> Result<()> {
    f.spec().ensure_same(h.spec())?;
    if f.len() != h.len() {
        return input(format!("member counts differ: {} vs {}", f.len(), h.len()));
    }
    if f.rank() != h.rank() {
        return input(format!("module ranks differ: {} vs {}", f.rank(), h.rank()));
    }
    Ok(())
}

/// `{f_j - h_j}`.
pub fn difference_frame(f: &FrameSeq, h: &FrameSeq) -> Result<FrameSeq> {
    check_pair(f, h)?;
    let members = f
        .members()
        .iter()
        .zip(h.members())
        .map(|(a, b)| a.try_sub(b))
        .collect::<Result<Vec<_>>>()?;
    FrameSeq::new(f.spec(), f.rank(), members)
}

/// `||D^* f||^2 = ||sum_j <f, f_j - h_j><f_j - h_j, f>||`.
pub fn difference_quadratic(f_seq: &FrameSeq, h_seq: &FrameSeq, f: &ModuleVector) -> Result<f64> {
    let d = difference_frame(f_seq, h_seq)?;
    Ok(d.analysis_op().apply(f)?.norm().powi(2))
}

fn branch(delta: &ModuleOperator, u: &ModuleOperator) -> Result<f64> {
    // 1/∞ = 0 for D = 0 and 1/0 = ∞ when the inclusion fails
    Ok(1.0 / douglas::pencil_lower_bound(delta, u)?)
}

/// `(M_f, M_h)`.
pub fn exact_branch_m(f_seq: &FrameSeq, h_seq: &FrameSeq) -> Result<(f64, f64)> {
    let d = difference_frame(f_seq, h_seq)?;
    let delta = d.synthesis_op();
    Ok((
        branch(delta, f_seq.synthesis_op())?,
        branch(delta, h_seq.synthesis_op())?,
    ))
}

struct Sampled {
    ratio: f64,
    witness: Option<ModuleVector>,
}

fn min_form_ratio(d2: f64, a2: f64, b2: f64) -> f64 {
    let lo = a2.min(b2);
    if d2 == 0.0 {
        0.0
    } else if lo == 0.0 {
        f64::INFINITY
    } else {
        d2 / lo
    }
}

fn sample_min_ratio(
    f_seq: &FrameSeq,
    h_seq: &FrameSeq,
    d: &FrameSeq,
    cfg: &CheckConfig,
) -> Result<Sampled> {
    let mut rng = StreamRng::new(cfg.seed, 0);
    let mut best = Sampled {
        ratio: 0.0,
        witness: None,
    };
    for _ in 0..cfg.samples {
        let f = ModuleVector::random(f_seq.spec(), f_seq.rank(), &mut rng);
        let d2 = d.analysis_op().apply(&f)?.norm().powi(2);
        let a2 = f_seq.analysis_op().apply(&f)?.norm().powi(2);
        let b2 = h_seq.analysis_op().apply(&f)?.norm().powi(2);
        let r = min_form_ratio(d2, a2, b2);
        if best.witness.is_none() || r > best.ratio {
            best = Sampled {
                ratio: r,
                witness: Some(f),
            };
        }
    }
    Ok(best)
}

fn require_central(name: &str, a: &AlgElement, cfg: &CheckConfig) -> Result<()> {
    if !a.is_central(cfg.tol) {
        return Err(Error::Precondition(format!("bound {name} must be central")));
    }
    if !a.is_strictly_nonzero(cfg.tol) {
        return input(format!("bound {name} is not strictly nonzero"));
    }
    Ok(())
}

fn require_kframe(
    frame: &FrameSeq,
    k: &ModuleOperator,
    a: &AlgElement,
    b: &AlgElement,
    who: &str,
    cfg: &CheckConfig,
) -> Result<()> {
    let cert = certify_kframe(frame, k, a, b, cfg)?;
    if !cert.is_certified() {
        return Err(Error::Hypothesis(format!(
            "{who} is not a *-K-frame with the given bounds ({})",
            cert.status
        )));
    }
    Ok(())
}

/// `λ` with `λ L L^* ⪯ K K^*`, or a hypothesis error if `R(L) ⊄ R(K)`.
fn range_pencil(l: &ModuleOperator, k: &ModuleOperator, what: &str) -> Result<f64> {
    let lam = douglas::pencil_lower_bound(l, k)?;
    if lam <= 0.0 {
        return Err(Error::Hypothesis(format!("range inclusion {what} fails")));
    }
    Ok(lam)
}

fn check_ops(f: &FrameSeq, k: &ModuleOperator, l: &ModuleOperator) -> Result<()> {
    let n = f.rank();
    for (name, op) in [("K", k), ("L", l)] {
        f.spec().ensure_same(op.spec())?;
        if op.out_rank() != n {
            return input(format!(
                "{name} maps into rank {}, frames have rank {n}",
                op.out_rank()
            ));
        }
    }
    Ok(())
}

/// Certifies `{h_j}` as a *-L-frame from a *-K-frame `{f_j}` with central
/// bounds `(A, B)` under the min-form condition, using the certified
/// `M = max(M_f, M_h)`.
///
/// Bessel bound `(1 + √M) ||B||`, lower bound `s_A √λ / (1 + √M)` where
/// `λ L L^* ⪯ K K^*`.
pub fn pertur1_audit(
    f_seq: &FrameSeq,
    h_seq: &FrameSeq,
    k: &ModuleOperator,
    l: &ModuleOperator,
    a: &AlgElement,
    b: &AlgElement,
    cfg: &CheckConfig,
) -> Result<PerturbReport> {
    check_pair(f_seq, h_seq)?;
    check_ops(f_seq, k, l)?;
    require_central("A", a, cfg)?;
    require_central("B", b, cfg)?;
    require_kframe(f_seq, k, a, b, "{f_j}", cfg)?;
    let lam = range_pencil(l, k, "R(L) ⊆ R(K)")?;

    let d = difference_frame(f_seq, h_seq)?;
    let (m_f, m_h) = exact_branch_m(f_seq, h_seq)?;
    let m = m_f.max(m_h);
    if !m.is_finite() {
        return Err(Error::Hypothesis(format!(
            "no finite M satisfies the min-form condition (M_f = {m_f}, M_h = {m_h})"
        )));
    }
    let sampled = sample_min_ratio(f_seq, h_seq, &d, cfg)?;

    let s_a = a.min_spectral_modulus();
    let b_norm = b.norm();
    let root = 1.0 + m.sqrt();
    let upper = root * b_norm;
    let lam_factor = if lam.is_finite() { lam.sqrt() } else { 1.0 };
    let lower = s_a * lam_factor / root;
    let one = AlgElement::one(f_seq.spec());

    let mut cert = certify_kframe(
        h_seq,
        l,
        &one.scale_real(lower),
        &one.scale_real(upper),
        cfg,
    )?;
    cert.claim = "pertur1-l-frame".into();
    let bessel_norm = h_seq.synthesis_op().norm();
    cert.value("m", m)
        .value("branch_m_f", m_f)
        .value("branch_m_h", m_h)
        .value("sampled_m", sampled.ratio)
        .value("bessel.norm", bessel_norm)
        .value("bessel.bound", upper)
        .value("lower_bound", lower)
        .value("upper_bound", upper);
    if bessel_norm > upper + cfg.tol {
        cert.status = Status::Falsified;
    }
    if sampled.ratio > m * (1.0 + 1e-9) + 1e-9 {
        cert.note("sampled min-form ratio exceeds the certified M");
        if let Some(w) = sampled.witness {
            cert.falsify(w);
        }
    }

    let mut constants = BTreeMap::new();
    constants.insert("a_norm".into(), a.norm());
    constants.insert("a_min_modulus".into(), s_a);
    constants.insert("b_norm".into(), b_norm);
    constants.insert("lambda".into(), lam);
    Ok(PerturbReport {
        branch_m_f: m_f,
        branch_m_h: m_h,
        sampled_m: sampled.ratio,
        m,
        conclusion: cert,
        constants,
    })
}

/// Converse direction: `K` a co-isometry, `R(K) ⊆ R(L)`, `{f_j}` a *-K-frame
/// with bounds `(A, B)` and `{h_j}` a *-L-frame with bounds `(C, D)`.
/// Compares the certified `M` with `(1 + ||D||/s_A)^2` and
/// `(1 + √λ ||B||/s_C)^2`, where `λ` is the extremal constant of
/// `||K^*f||^2 <= λ ||L^*f||^2`.
///
/// Certified when `M` is below the smaller constant, inconclusive when only
/// below the larger one.
#[allow(clippy::too_many_arguments)]
pub fn pertur1_converse_audit(
    f_seq: &FrameSeq,
    h_seq: &FrameSeq,
    k: &ModuleOperator,
    l: &ModuleOperator,
    a: &AlgElement,
    b: &AlgElement,
    c: &AlgElement,
    d_bound: &AlgElement,
    cfg: &CheckConfig,
) -> Result<PerturbReport> {
    check_pair(f_seq, h_seq)?;
    check_ops(f_seq, k, l)?;
    for (name, x) in [("A", a), ("B", b), ("C", c), ("D", d_bound)] {
        require_central(name, x, cfg)?;
    }
    let n = f_seq.rank();
    if !k.is_square() || k.in_rank() != n {
        return Err(Error::Hypothesis("K must act on the frames' module".into()));
    }
    let id = ModuleOperator::identity(f_seq.spec(), n);
    let defect = k.compose(&k.adjoint())?.distance(&id);
    if defect > 10.0 * cfg.tol.max(1e-10) {
        return Err(Error::Hypothesis(format!(
            "K is not a co-isometry (||KK* - I|| = {defect:.3e})"
        )));
    }
    let mu = range_pencil(k, l, "R(K) ⊆ R(L)")?;
    let lam = 1.0 / mu;
    require_kframe(f_seq, k, a, b, "{f_j}", cfg)?;
    require_kframe(h_seq, l, c, d_bound, "{h_j}", cfg)?;

    let d = difference_frame(f_seq, h_seq)?;
    let (m_f, m_h) = exact_branch_m(f_seq, h_seq)?;
    let m = m_f.max(m_h);
    let sampled = sample_min_ratio(f_seq, h_seq, &d, cfg)?;

    let s_a = a.min_spectral_modulus();
    let s_c = c.min_spectral_modulus();
    let m1 = (1.0 + d_bound.norm() / s_a).powi(2);
    let m2 = (1.0 + lam.sqrt() * b.norm() / s_c).powi(2);
    let lo = m1.min(m2);
    let hi = m1.max(m2);

    let mut cert = Certificate::new("pertur1-converse", cfg);
    cert.value("m", m)
        .value("branch_m_f", m_f)
        .value("branch_m_h", m_h)
        .value("sampled_m", sampled.ratio)
        .value("m1", m1)
        .value("m2", m2)
        .value("lambda", lam);
    let slack = 1e-9;
    if m <= lo + slack {
        // certified
    } else if m <= hi + slack {
        cert.note("M exceeds the smaller constant; only the larger one bounds it");
        cert.downgrade(Status::Inconclusive);
    } else if let Some(w) = sampled.witness.clone() {
        cert.falsify(w);
    } else {
        cert.status = Status::Falsified;
    }

    let mut constants = BTreeMap::new();
    constants.insert("a_min_modulus".into(), s_a);
    constants.insert("b_norm".into(), b.norm());
    constants.insert("c_min_modulus".into(), s_c);
    constants.insert("d_norm".into(), d_bound.norm());
    constants.insert("lambda".into(), lam);
    Ok(PerturbReport {
        branch_m_f: m_f,
        branch_m_h: m_h,
        sampled_m: sampled.ratio,
        m,
        conclusion: cert,
        constants,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Abg {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Abg {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Abg { alpha, beta, gamma }
    }
}

/// Three-constant condition
/// `||D^*f|| <= α ||U_F^*f|| + β ||U_H^*f|| + γ ||K^*f||`, checked on samples.
/// A violating sample falsifies the hypothesis; the conclusion is then not
/// evaluated. Otherwise `{h_j}` is certified as a *-L-frame with upper bound
/// `||B|| (1 + (α+β+γ/s_A)/(1-β))` and lower bound `g √λ`, where
/// `g = s_A (1 - (α+β+γ/s_A)/(1+β))` and `λ L L^* ⪯ K K^*`.
#[allow(clippy::too_many_arguments)]
pub fn pertur2_audit(
    f_seq: &FrameSeq,
    h_seq: &FrameSeq,
    k: &ModuleOperator,
    l: &ModuleOperator,
    abg: Abg,
    a: &AlgElement,
    b: &AlgElement,
    cfg: &CheckConfig,
) -> Result<PerturbReport> {
    let Abg { alpha, beta, gamma } = abg;
    check_pair(f_seq, h_seq)?;
    check_ops(f_seq, k, l)?;
    require_central("A", a, cfg)?;
    require_central("B", b, cfg)?;
    if !(alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0) {
        return input("alpha, beta, gamma must be nonnegative");
    }
    let a_norm = a.norm();
    if (alpha + gamma / a_norm).max(beta) >= 1.0 {
        return input(format!(
            "max(alpha + gamma/||A||, beta) = {} is not below 1",
            (alpha + gamma / a_norm).max(beta)
        ));
    }
    let s_a = a.min_spectral_modulus();
    let spread = alpha + beta + gamma / s_a;
    let g_factor = 1.0 - spread / (1.0 + beta);
    if g_factor <= 0.0 {
        return input("alpha + gamma/s_A must be below 1 for a non-scalar A");
    }
    require_kframe(f_seq, k, a, b, "{f_j}", cfg)?;
    let lam = range_pencil(l, k, "R(L) ⊆ R(K)")?;

    let d = difference_frame(f_seq, h_seq)?;
    let (m_f, m_h) = exact_branch_m(f_seq, h_seq)?;
    let m = m_f.max(m_h);
    let sampled = sample_min_ratio(f_seq, h_seq, &d, cfg)?;

    let b_norm = b.norm();
    let bound_l = b_norm * (1.0 + spread / (1.0 - beta));
    let g = s_a * g_factor;
    let mut constants = BTreeMap::new();
    constants.insert("alpha".into(), alpha);
    constants.insert("beta".into(), beta);
    constants.insert("gamma".into(), gamma);
    constants.insert("a_norm".into(), a_norm);
    constants.insert("a_min_modulus".into(), s_a);
    constants.insert("b_norm".into(), b_norm);
    constants.insert("lambda".into(), lam);
    constants.insert("bound_l".into(), bound_l);
    constants.insert("bound_g".into(), g);

    // sampled hypothesis
    let mut rng = StreamRng::new(cfg.seed, 1);
    let k_adj = k.adjoint();
    let mut worst_gap = f64::NEG_INFINITY;
    let mut violation = None;
    for _ in 0..cfg.samples {
        let f = ModuleVector::random(f_seq.spec(), f_seq.rank(), &mut rng);
        let lhs = d.analysis_op().apply(&f)?.norm();
        let rhs = alpha * f_seq.analysis_op().apply(&f)?.norm()
            + beta * h_seq.analysis_op().apply(&f)?.norm()
            + gamma * k_adj.apply(&f)?.norm();
        let gap = lhs - rhs;
        worst_gap = worst_gap.max(gap);
        if gap > cfg.tol * rhs.max(1.0) && violation.is_none() {
            violation = Some(f);
        }
    }

    let one = AlgElement::one(f_seq.spec());
    let report = |cert: Certificate| PerturbReport {
        branch_m_f: m_f,
        branch_m_h: m_h,
        sampled_m: sampled.ratio,
        m,
        conclusion: cert,
        constants: constants.clone(),
    };
    if let Some(w) = violation {
        let mut cert = Certificate::new("pertur2-hypothesis", cfg);
        cert.value("hypothesis.worst_gap", worst_gap)
            .sampled(cfg.samples, cfg.seed)
            .falsify(w);
        return Ok(report(cert));
    }

    let lower = g * if lam.is_finite() { lam.sqrt() } else { 1.0 };
    let mut cert = certify_kframe(
        h_seq,
        l,
        &one.scale_real(lower),
        &one.scale_real(bound_l),
        cfg,
    )?;
    cert.claim = "pertur2-l-frame".into();
    let bessel_norm = h_seq.synthesis_op().norm();
    let lam_hk = douglas::pencil_lower_bound(k, h_seq.synthesis_op())?;
    cert.value("hypothesis.worst_gap", worst_gap)
        .value("hypothesis.sampled", 1.0)
        .value("bessel.norm", bessel_norm)
        .value("bessel.bound", bound_l)
        .value("lower.sqrt_pencil", lam_hk.sqrt())
        .value("lower.bound", g)
        .value("m", m)
        .value("sampled_m", sampled.ratio);
    cert.note("hypothesis sampled-consistent");
    if bessel_norm > bound_l + cfg.tol || lam_hk.sqrt() < g - cfg.tol {
        cert.note("proof constant not attained");
        cert.status = Status::Falsified;
    }
    if cert.status == Status::Falsified {
        // proof constants failed; fall back to existence of some L-frame bounds
        let lam_hl = douglas::pencil_lower_bound(l, h_seq.synthesis_op())?;
        cert.value("fallback.lambda", lam_hl);
        if lam_hl > 0.0 {
            cert.status = Status::Inconclusive;
        }
    }
    Ok(report(cert))
}

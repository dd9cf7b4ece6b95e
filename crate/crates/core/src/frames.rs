//! Finite frame sequences in `A^n`: synthesis, analysis and frame operators,
//! *-Bessel and *-K-frame certification, atomic-system coefficients, dual
//! atoms, local atoms and frame transforms.
//!
//! A *-K-frame with bounds `A, B` satisfies, for every `f`,
//!
//! ```text
//! A <K^* f, K^* f> A^*  <=  sum_j <f, f_j><f_j, f>  <=  B <f, f> B^*
//! ```
//!
//! The middle term is `<U^* f, U^* f>` for the analysis operator `U^*`. For
//! central `A, B` both sides are operator inequalities
//! (`K M_{A^*} M_A K^* ⪯ U U^* ⪯ M_B M_{B^*}`) and are decided exactly on the
//! flattening. Non-central bounds are only sampled, so a pass there is
//! reported as inconclusive.

use crate::algebra::AlgElement;
use crate::algebra::AlgebraSpec;
use crate::certificate::{Certificate, CheckConfig, Status};
use crate::douglas;
use crate::error::{input, Error, Result};
use crate::hilbmod::{witness_from_flat, ModuleOperator, ModuleVector};
use crate::linalg::{self, CMat};
use crate::rng::StreamRng;

#[derive(Clone, Debug)]
pub struct FrameSeq {
    spec: AlgebraSpec,
    rank: usize,
    members: Vec<ModuleVector>,
    synthesis: ModuleOperator,
    analysis: ModuleOperator,
    frame_op: ModuleOperator,
}

impl FrameSeq {
    pub fn new(spec: &AlgebraSpec, rank: usize, members: Vec<ModuleVector>) -> Result<Self> {
        for (j, f) in members.iter().enumerate() {
            if f.spec() != spec || f.rank() != rank {
                return input(format!(
                    "frame member {j} lives in {:?}^{}, expected {spec:?}^{rank}",
                    f.spec(),
                    f.rank()
                ));
            }
        }
        // t[j][i] = (f_j)_i
        let synthesis = ModuleOperator::from_fn(spec, members.len(), rank, |j, i| {
            members[j].entry(i).clone()
        });
        let analysis = synthesis.adjoint();
        let frame_op = synthesis.compose(&analysis)?;
        Ok(FrameSeq {
            spec: spec.clone(),
            rank,
            members,
            synthesis,
            analysis,
            frame_op,
        })
    }

    /// `{e_1, …, e_n}`, the coordinate frame of `A^n`.
    pub fn coordinate(spec: &AlgebraSpec, n: usize) -> Self {
        let members = (0..n).map(|k| ModuleVector::unit(spec, n, k)).collect();
        Self::new(spec, n, members).expect("coordinate frame is well formed")
    }

    pub fn random(spec: &AlgebraSpec, n: usize, count: usize, rng: &mut StreamRng) -> Self {
        let members = (0..count)
            .map(|_| ModuleVector::random(spec, n, rng))
            .collect();
        Self::new(spec, n, members).expect("random frame is well formed")
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[ModuleVector] {
        &self.members
    }

    /// `U: A^J -> A^n`, `g ↦ sum_j g_j f_j`.
    pub fn synthesis_op(&self) -> &ModuleOperator {
        &self.synthesis
    }

    /// `U^*: A^n -> A^J`, `f ↦ (<f, f_j>)_j`.
    pub fn analysis_op(&self) -> &ModuleOperator {
        &self.analysis
    }

    /// `S = U U^*`.
    pub fn frame_operator(&self) -> &ModuleOperator {
        &self.frame_op
    }

    pub fn analysis(&self, f: &ModuleVector) -> Result<Vec<AlgElement>> {
        Ok(self.analysis.apply(f)?.entries().to_vec())
    }

    pub fn synthesis(&self, coeffs: &[AlgElement]) -> Result<ModuleVector> {
        let g = ModuleVector::new(&self.spec, coeffs.to_vec())?;
        self.synthesis.apply(&g)
    }

    /// `{L f_j}`.
    pub fn transform(&self, l: &ModuleOperator) -> Result<FrameSeq> {
        if l.in_rank() != self.rank {
            return input(format!(
                "transform expects rank {}, frame has {}",
                l.in_rank(),
                self.rank
            ));
        }
        let members = self
            .members
            .iter()
            .map(|f| l.apply(f))
            .collect::<Result<Vec<_>>>()?;
        FrameSeq::new(&self.spec, l.out_rank(), members)
    }

    /// Frame with one member appended.
    pub fn with_member(&self, f: ModuleVector) -> Result<FrameSeq> {
        let mut members = self.members.clone();
        members.push(f);
        FrameSeq::new(&self.spec, self.rank, members)
    }

    pub fn scaled(&self, z: num_complex::Complex64) -> FrameSeq {
        let members = self.members.iter().map(|f| f.scale(z)).collect();
        FrameSeq::new(&self.spec, self.rank, members).expect("same shape")
    }
}

pub fn frame_operator(frame: &FrameSeq) -> ModuleOperator {
    frame.frame_operator().clone()
}

pub fn transform_frame(frame: &FrameSeq, l: &ModuleOperator) -> Result<FrameSeq> {
    frame.transform(l)
}

fn ensure_strictly_nonzero(name: &str, a: &AlgElement, cfg: &CheckConfig) -> Result<()> {
    if !a.is_strictly_nonzero(cfg.tol) {
        return input(format!("bound {name} is not strictly nonzero"));
    }
    Ok(())
}

/// `big - small ⪰ 0` as algebra elements, with the tolerance scaled by the
/// magnitude of both sides.
pub(crate) fn dominates(big: &AlgElement, small: &AlgElement, tol: f64) -> bool {
    let gap = big - small;
    let scale = big.norm().max(small.norm()).max(1.0);
    gap.distance(&gap.adjoint()) <= tol * scale && gap.min_hermitian_eigenvalue() >= -tol * scale
}

/// PSD check of `gap` on the flattening; on failure falsifies `cert` with the
/// eigenvector of the most negative eigenvalue.
fn certify_psd(
    cert: &mut Certificate,
    key: &str,
    gap: &CMat,
    rank: usize,
    spec: &AlgebraSpec,
    tol: f64,
) {
    let (ok, lo, scale) = linalg::psd_check(gap, tol);
    cert.value(&format!("{key}.min_eig"), lo);
    cert.value(&format!("{key}.scale"), scale);
    if !ok {
        let v = linalg::min_eig(gap)
            .map(|(_, v)| v)
            .unwrap_or_else(|| linalg::CVec::zeros(gap.nrows()));
        cert.falsify(witness_from_flat(spec, rank, &v));
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Lower,
    Upper,
}

struct KFrameParts<'a> {
    frame: &'a FrameSeq,
    k: Option<&'a ModuleOperator>,
    lower: Option<&'a AlgElement>,
    upper: &'a AlgElement,
}

fn check_kframe(parts: KFrameParts<'_>, claim: &str, cfg: &CheckConfig) -> Result<Certificate> {
    let frame = parts.frame;
    let spec = frame.spec().clone();
    let n = frame.rank();
    let mut cert = Certificate::new(claim, cfg);
    let s_flat = frame.frame_operator().flatten();
    let mut sampled_sides = Vec::new();

    // upper side
    let b = parts.upper;
    if b.is_central(cfg.tol) {
        let bb = ModuleOperator::central_mult(&(b * &b.adjoint()), n, cfg.tol)?;
        certify_psd(
            &mut cert,
            "upper",
            &(bb.flatten() - &s_flat),
            n,
            &spec,
            cfg.tol,
        );
    } else {
        sampled_sides.push(Side::Upper);
    }

    // lower side
    if let (Some(k), Some(a)) = (parts.k, parts.lower) {
        if a.is_central(cfg.tol) {
            let m = ModuleOperator::central_mult(&a.adjoint(), k.in_rank(), cfg.tol)?;
            let t = k.compose(&m)?;
            let tf = t.flatten();
            certify_psd(
                &mut cert,
                "lower",
                &(&s_flat - &tf * tf.adjoint()),
                n,
                &spec,
                cfg.tol,
            );
        } else {
            sampled_sides.push(Side::Lower);
        }
    }

    if !sampled_sides.is_empty() && cert.status != Status::Falsified {
        let mut rng = StreamRng::new(cfg.seed, 0);
        let k_adj = parts.k.map(|k| k.adjoint());
        for _ in 0..cfg.samples {
            let f = ModuleVector::random(&spec, n, &mut rng);
            let uf = frame.analysis_op().apply(&f)?;
            let mid = uf.inner(&uf)?;
            let mut bad = false;
            for side in &sampled_sides {
                match side {
                    Side::Upper => {
                        let rhs = &(b * &f.inner(&f)?) * &b.adjoint();
                        bad |= !dominates(&rhs, &mid, cfg.tol);
                    }
                    Side::Lower => {
                        let a = parts.lower.expect("lower bound present");
                        let kf = k_adj.as_ref().expect("K present").apply(&f)?;
                        let lhs = &(a * &kf.inner(&kf)?) * &a.adjoint();
                        bad |= !dominates(&mid, &lhs, cfg.tol);
                    }
                }
            }
            if bad {
                cert.falsify(f);
                break;
            }
        }
        cert.sampled(cfg.samples, cfg.seed);
        if cert.status != Status::Falsified {
            cert.note("non-central bound checked by sampling only");
            cert.downgrade(Status::Inconclusive);
        }
    }
    Ok(cert)
}

/// `sum_j <f, f_j><f_j, f> <= B <f, f> B^*` for all `f`.
pub fn certify_star_bessel(
    frame: &FrameSeq,
    b: &AlgElement,
    cfg: &CheckConfig,
) -> Result<Certificate> {
    frame.spec().ensure_same(b.spec())?;
    ensure_strictly_nonzero("B", b, cfg)?;
    check_kframe(
        KFrameParts {
            frame,
            k: None,
            lower: None,
            upper: b,
        },
        "star-bessel",
        cfg,
    )
}

pub fn certify_kframe(
    frame: &FrameSeq,
    k: &ModuleOperator,
    a: &AlgElement,
    b: &AlgElement,
    cfg: &CheckConfig,
) -> Result<Certificate> {
    frame.spec().ensure_same(k.spec())?;
    frame.spec().ensure_same(a.spec())?;
    frame.spec().ensure_same(b.spec())?;
    if k.out_rank() != frame.rank() {
        return input(format!(
            "K maps into rank {}, frame has rank {}",
            k.out_rank(),
            frame.rank()
        ));
    }
    ensure_strictly_nonzero("A", a, cfg)?;
    ensure_strictly_nonzero("B", b, cfg)?;
    check_kframe(
        KFrameParts {
            frame,
            k: Some(k),
            lower: Some(a),
            upper: b,
        },
        "star-k-frame",
        cfg,
    )
}

/// A *-frame is a *-K-frame for `K = I`.
pub fn certify_star_frame(
    frame: &FrameSeq,
    a: &AlgElement,
    b: &AlgElement,
    cfg: &CheckConfig,
) -> Result<Certificate> {
    let id = ModuleOperator::identity(frame.spec(), frame.rank());
    let mut cert = certify_kframe(frame, &id, a, b, cfg)?;
    cert.claim = "star-frame".into();
    Ok(cert)
}

/// `(λ*, μ*)`: the largest `λ` with `λ K K^* ⪯ U U^*` and `μ* = ||U U^*||`.
/// `λ* = 0` exactly when `R(K) ⊄ R(U)`.
pub fn optimal_scalar_bounds(frame: &FrameSeq, k: &ModuleOperator) -> Result<(f64, f64)> {
    let lambda = douglas::pencil_lower_bound(k, frame.synthesis_op())?;
    Ok((lambda, frame.frame_operator().norm()))
}

#[derive(Clone, Debug)]
pub struct AtomicSystem {
    /// Coefficient operator `Q: A^n -> A^J` with `K = U Q`.
    pub q: ModuleOperator,
    /// `||Q|| 1_A`.
    pub c: AlgElement,
    pub q_norm: f64,
    /// `||U Q - K||`.
    pub residual: f64,
}

impl AtomicSystem {
    /// `a_f = Q f`.
    pub fn coefficients(&self, f: &ModuleVector) -> Result<ModuleVector> {
        self.q.apply(f)
    }
}

/// Minimal-norm coefficient operator for `K f = sum_j (Q f)_j f_j`.
pub fn atomic_coefficients(
    frame: &FrameSeq,
    k: &ModuleOperator,
    cfg: &CheckConfig,
) -> Result<AtomicSystem> {
    let rep = douglas::douglas_solve_with(k, frame.synthesis_op(), cfg.tol, cfg.rtol)?;
    match rep.q {
        Some(q) if rep.inclusion_ok => Ok(AtomicSystem {
            c: AlgElement::one(frame.spec()).scale_real(rep.q_norm),
            q,
            q_norm: rep.q_norm,
            residual: rep.residual,
        }),
        _ => Err(Error::NotAtomic {
            residual: rep.residual,
        }),
    }
}

/// `h_j = Q^* e_j`, so that `K f = sum_j <f, h_j> f_j`.
pub fn dual_atoms(
    frame: &FrameSeq,
    k: &ModuleOperator,
    cfg: &CheckConfig,
) -> Result<Vec<ModuleVector>> {
    let sys = atomic_coefficients(frame, k, cfg)?;
    let q_adj = sys.q.adjoint();
    (0..frame.len())
        .map(|j| q_adj.apply(&ModuleVector::unit(frame.spec(), frame.len(), j)))
        .collect()
}

/// Largest `||K f - sum_j <f, h_j> f_j|| / ||f||` over random `f`.
pub fn reconstruction_residual(
    frame: &FrameSeq,
    k: &ModuleOperator,
    duals: &[ModuleVector],
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if duals.len() != frame.len() {
        return input("one dual atom per frame member required");
    }
    let mut rng = StreamRng::new(seed, 0);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let f = ModuleVector::random(frame.spec(), frame.rank(), &mut rng);
        let mut acc = ModuleVector::zero(frame.spec(), frame.rank());
        for (h, fj) in duals.iter().zip(frame.members()) {
            acc = acc.try_add(&fj.left_mul(&f.inner(h)?)?)?;
        }
        let err = k.apply(&f)?.try_sub(&acc)?.norm();
        worst = worst.max(err / f.norm().max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

/// Checks that `{f_j}` with functionals `c_j(f) = <f, g_j>` is a family of
/// local *-atoms for the submodule `R(P)` with coefficient bound `C`, and
/// that `{P f_j}` is a *-frame on `R(P)` with lower bound `1 / ||C||`.
pub fn local_atoms_check(
    frame: &FrameSeq,
    p: &ModuleOperator,
    functionals: &[ModuleVector],
    c_bound: &AlgElement,
    cfg: &CheckConfig,
) -> Result<Certificate> {
    let spec = frame.spec().clone();
    let n = frame.rank();
    spec.ensure_same(p.spec())?;
    spec.ensure_same(c_bound.spec())?;
    if p.in_rank() != n || p.out_rank() != n {
        return input("P must act on the frame's module");
    }
    if !p.is_projection(cfg.tol.max(1e-12)) {
        return input("P is not an orthogonal projection");
    }
    ensure_strictly_nonzero("C", c_bound, cfg)?;
    if functionals.len() != frame.len() {
        return input("one functional per frame member required");
    }
    let g_frame = FrameSeq::new(&spec, n, functionals.to_vec())?;
    let mut cert = Certificate::new("local-atoms", cfg);

    let pf = p.flatten();
    if linalg::spectral_norm(&pf) <= cfg.tol {
        cert.value("degenerate", 1.0);
        cert.note("P = 0: empty submodule, vacuously satisfied");
        return Ok(cert);
    }

    let uf = frame.synthesis_op().flatten();
    let gf = g_frame.analysis_op().flatten();

    // reconstruction f = sum_j c_j(f) f_j on R(P), as an operator identity
    let recon = &uf * &gf * &pf - &pf;
    let recon_err = linalg::spectral_norm(&recon);
    cert.value("reconstruction.residual", recon_err);
    if recon_err > cfg.tol * linalg::spectral_norm(&pf).max(1.0) {
        let (_, vecs) = linalg::eigh(&(recon.adjoint() * &recon));
        let v = vecs.column(vecs.ncols() - 1).into_owned();
        cert.falsify(witness_from_flat(&spec, n, &v));
    }

    // coefficient bound sum_j c_j c_j^* <= C <f,f> C^*
    if c_bound.is_central(cfg.tol) {
        let cc =
            ModuleOperator::central_mult(&(c_bound * &c_bound.adjoint()), n, cfg.tol)?.flatten();
        let gap = pf.adjoint() * (cc - gf.adjoint() * &gf) * &pf;
        certify_psd(&mut cert, "coefficients", &gap, n, &spec, cfg.tol);
    }

    // lower frame bound of {P f_j} on R(P)
    let inv_c2 = 1.0 / c_bound.norm().powi(2);
    let s_p = &pf * &uf * uf.adjoint() * &pf;
    let gap = s_p - &pf * linalg::c(inv_c2);
    certify_psd(&mut cert, "projected_lower", &gap, n, &spec, cfg.tol);
    cert.value("lower_bound", 1.0 / c_bound.norm());

    // sampled checks on f = P f0
    if cert.status != Status::Falsified {
        let mut rng = StreamRng::new(cfg.seed, 0);
        for _ in 0..cfg.samples {
            let f0 = ModuleVector::random(&spec, n, &mut rng);
            let f = p.apply(&f0)?;
            let coeffs = g_frame.analysis_op().apply(&f)?;
            let lhs = coeffs.inner(&coeffs)?;
            let rhs = &(c_bound * &f.inner(&f)?) * &c_bound.adjoint();
            let recon = frame.synthesis_op().apply(&coeffs)?;
            let err = recon.try_sub(&f)?.norm();
            if !dominates(&rhs, &lhs, cfg.tol) || err > cfg.tol * f.norm().max(1.0) {
                cert.falsify(f);
                break;
            }
        }
        cert.sampled(cfg.samples, cfg.seed);
        if !c_bound.is_central(cfg.tol) && cert.status == Status::Certified {
            cert.note("non-central C: coefficient bound sampled only");
            cert.downgrade(Status::Inconclusive);
        }
    }
    Ok(cert)
}

#[derive(Clone, Debug)]
pub struct ConjugationAudit {
    /// `||S' - L S L^*|| / ||S'||` for the directly assembled `S'` of `{L f_j}`.
    pub lsl_adj: f64,
    /// `||S' - L^* S L|| / ||S'||`, only for square `L`.
    pub ladj_sl: Option<f64>,
}

impl ConjugationAudit {
    /// Which identity holds within `tol`: `"LSL*"`, `"L*SL"`, `"both"` or `"neither"`.
    pub fn matching(&self, tol: f64) -> &'static str {
        let a = self.lsl_adj <= tol;
        let b = self.ladj_sl.is_some_and(|x| x <= tol);
        match (a, b) {
            (true, true) => "both",
            (true, false) => "LSL*",
            (false, true) => "L*SL",
            (false, false) => "neither",
        }
    }
}

/// Compares the frame operator of `{L f_j}` with `L S L^*` and `L^* S L`.
pub fn conjugation_audit(frame: &FrameSeq, l: &ModuleOperator) -> Result<ConjugationAudit> {
    let moved = frame.transform(l)?;
    let direct = moved.frame_operator().flatten();
    let denom = linalg::spectral_norm(&direct).max(f64::MIN_POSITIVE);
    let s = frame.frame_operator().flatten();
    let lf = l.flatten();
    let lsl = &lf * &s * lf.adjoint();
    let lsl_adj = linalg::spectral_norm(&(&direct - lsl)) / denom;
    let ladj_sl = l.is_square().then(|| {
        let other = lf.adjoint() * &s * &lf;
        linalg::spectral_norm(&(&direct - other)) / denom
    });
    Ok(ConjugationAudit { lsl_adj, ladj_sl })
}

/// If `{f_j}` is a *-K-frame with bounds `(A, B)`, certifies `{L f_j}` as a
/// *-LK-frame with bounds `(A, B ||L||)`.
pub fn transform_audit(
    frame: &FrameSeq,
    k: &ModuleOperator,
    l: &ModuleOperator,
    a: &AlgElement,
    b: &AlgElement,
    cfg: &CheckConfig,
) -> Result<Certificate> {
    let base = certify_kframe(frame, k, a, b, cfg)?;
    if !base.is_certified() {
        return Err(Error::Hypothesis(format!(
            "frame is not a *-K-frame with the given bounds ({})",
            base.status
        )));
    }
    let moved = frame.transform(l)?;
    let lk = l.compose(k)?;
    let b_l = b.scale_real(l.norm());
    let mut cert = certify_kframe(&moved, &lk, a, &b_l, cfg)?;
    cert.claim = "transform-lk-frame".into();
    cert.value("l_norm", l.norm());
    Ok(cert)
}

/// For a co-isometry `T` commuting with `K`, the optimal scalar bounds of
/// `{T f_j}` against `K` match those of `{f_j}`.
pub fn coisometry_audit(
    frame: &FrameSeq,
    k: &ModuleOperator,
    t: &ModuleOperator,
    cfg: &CheckConfig,
) -> Result<Certificate> {
    let n = frame.rank();
    if !t.is_square() || t.in_rank() != n || !k.is_square() || k.in_rank() != n {
        return input("K and T must act on the frame's module");
    }
    let id = ModuleOperator::identity(frame.spec(), n);
    let coiso = t.compose(&t.adjoint())?.distance(&id);
    let comm = k.compose(t)?.distance(&t.compose(k)?);
    if coiso > cfg.tol.max(1e-10) * 10.0 {
        return Err(Error::Hypothesis(format!(
            "T is not a co-isometry (||TT* - I|| = {coiso:.3e})"
        )));
    }
    if comm > cfg.tol.max(1e-10) * 10.0 * k.norm().max(1.0) * t.norm().max(1.0) {
        return Err(Error::Hypothesis(format!("KT != TK (defect {comm:.3e})")));
    }
    let (l0, m0) = optimal_scalar_bounds(frame, k)?;
    let moved = frame.transform(t)?;
    let (l1, m1) = optimal_scalar_bounds(&moved, k)?;
    let mut cert = Certificate::new("coisometry-invariance", cfg);
    cert.value("lambda.original", l0)
        .value("lambda.transformed", l1)
        .value("mu.original", m0)
        .value("mu.transformed", m1)
        .value("coisometry_defect", coiso)
        .value("commutator_defect", comm);
    let close = |x: f64, y: f64| (x == y) || (x - y).abs() <= 1e-8 * x.abs().max(1.0);
    if !close(l0, l1) || !close(m0, m1) {
        let gap =
            moved.frame_operator().flatten() - k.flatten() * k.flatten().adjoint() * linalg::c(l0);
        let v = linalg::min_eig(&gap)
            .map(|(_, v)| v)
            .unwrap_or_else(|| linalg::CVec::zeros(gap.nrows()));
        cert.falsify(witness_from_flat(frame.spec(), n, &v));
    }
    Ok(cert)
}

fn frame_operator_inverse(frame: &FrameSeq, cfg: &CheckConfig) -> Result<ModuleOperator> {
    let s = frame.frame_operator().flatten();
    let lo = linalg::min_eig(&s).map(|(v, _)| v).unwrap_or(0.0);
    if lo <= cfg.tol * linalg::spectral_norm(&s).max(1.0) {
        return Err(Error::SingularFrameOperator { min_eig: lo });
    }
    let inv = s
        .try_inverse()
        .ok_or(Error::SingularFrameOperator { min_eig: lo })?;
    ModuleOperator::from_flat(
        frame.spec(),
        frame.rank(),
        frame.rank(),
        &crate::linalg::hermitian_part(&inv),
    )
}

/// `{K S^{-1} f_j}`.
pub fn ks_inverse_frame(
    frame: &FrameSeq,
    k: &ModuleOperator,
    cfg: &CheckConfig,
) -> Result<FrameSeq> {
    let s_inv = frame_operator_inverse(frame, cfg)?;
    frame.transform(&k.compose(&s_inv)?)
}

/// Certifies `K f = sum_j <f, f_j> K S^{-1} f_j` as an operator identity and
/// that `{K S^{-1} f_j}` is *-Bessel with bound `||S^{-1}|| ||K|| B`.
pub fn ks_inverse_audit(
    frame: &FrameSeq,
    k: &ModuleOperator,
    b: &AlgElement,
    cfg: &CheckConfig,
) -> Result<Certificate> {
    let s_inv = frame_operator_inverse(frame, cfg)?;
    let moved = frame.transform(&k.compose(&s_inv)?)?;
    let mut cert = Certificate::new("ks-inverse-frame", cfg);
    let recon = moved.synthesis_op().compose(frame.analysis_op())?;
    let err = recon.distance(k);
    cert.value("reconstruction.residual", err);
    if err > 1e-10 * k.norm().max(1.0) {
        let d = recon.try_sub(k)?.flatten();
        let (_, vecs) = linalg::eigh(&(d.adjoint() * &d));
        let v = vecs.column(vecs.ncols() - 1).into_owned();
        cert.falsify(witness_from_flat(frame.spec(), frame.rank(), &v));
    }
    let bound = b.scale_real(s_inv.norm() * k.norm());
    let bessel = certify_star_bessel(&moved, &bound, cfg)?;
    cert.absorb("bessel", &bessel);
    Ok(cert)
}

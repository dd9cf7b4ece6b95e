mod oracles;

use std::time::Instant;

use proptest::prelude::*;
use starframe::douglas::pencil_lower_bound;
use starframe::frames::{certify_kframe, optimal_scalar_bounds};
use starframe::harness::profiles::{example_truncation, planted_abg_family};
use starframe::harness::{trial_instance, Profile};
use starframe::hilbmod::central_mult;
use starframe::linalg::{c, polar_unitary};
use starframe::perturb::{
    difference_frame, difference_quadratic, exact_branch_m, pertur1_audit, pertur1_converse_audit,
    pertur2_audit, Abg,
};
use starframe::rng::StreamRng;
use starframe::tensorprod::{
    tensor_element, tensor_frame, tensor_frame_audit, tensor_operator, tensor_vector, FactorBounds,
    TensorWitness,
};
use starframe::{
    AlgElement, AlgebraSpec, CheckConfig, Error, FrameSeq, ModuleOperator, ModuleVector, Status,
    DEFAULT_TOL,
};

fn spec21() -> AlgebraSpec {
    AlgebraSpec::new(vec![2, 1]).unwrap()
}

fn pair() -> (AlgebraSpec, AlgebraSpec) {
    (
        AlgebraSpec::full(2).unwrap(),
        AlgebraSpec::diagonal(2).unwrap(),
    )
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

#[test]
fn tensor_elements_are_blockwise_kronecker_products() {
    let left = spec21();
    let right = AlgebraSpec::new(vec![1, 2]).unwrap();
    let w = TensorWitness::new(&left, &right);
    let mut rng = StreamRng::new(1, 0);
    for _ in 0..20 {
        let a = AlgElement::random(&left, &mut rng);
        let b = AlgElement::random(&right, &mut rng);
        let ab = tensor_element(&a, &b).unwrap();
        for i in 0..left.num_blocks() {
            for k in 0..right.num_blocks() {
                let expect =
                    oracles::kron(&oracles::dense(a.block(i)), &oracles::dense(b.block(k)));
                let got = oracles::dense(ab.block(w.block_index(i, k)));
                assert!(oracles::dense_distance(&got, &expect) <= 1e-15);
            }
        }
        assert!(rel(oracles::norm(&ab), oracles::norm(&a) * oracles::norm(&b)) <= 1e-10);
        assert!(rel(ab.norm(), a.norm() * b.norm()) <= 1e-10);
        let a2 = AlgElement::random(&left, &mut rng);
        let b2 = AlgElement::random(&right, &mut rng);
        let lhs = &ab * &tensor_element(&a2, &b2).unwrap();
        let rhs = tensor_element(&(&a * &a2), &(&b * &b2)).unwrap();
        assert!(lhs.distance(&rhs) <= 1e-11 * rhs.norm().max(1.0));
    }
    let unit = tensor_element(&AlgElement::one(&left), &AlgElement::one(&right)).unwrap();
    assert_eq!(unit, AlgElement::one(w.product()));
}

#[test]
fn tensor_order_preservation() {
    let (l, r) = pair();
    let mut rng = StreamRng::new(2, 0);
    for _ in 0..20 {
        let x = AlgElement::random(&l, &mut rng);
        let y = AlgElement::random(&l, &mut rng);
        let z = AlgElement::random(&r, &mut rng);
        let a = &x * &x.adjoint();
        let b = &a + &(&y * &y.adjoint());
        let cpos = &z * &z.adjoint();
        assert!(tensor_element(&a, &cpos).unwrap().is_positive(DEFAULT_TOL));
        let gap = &tensor_element(&b, &cpos).unwrap() - &tensor_element(&a, &cpos).unwrap();
        assert!(gap.is_positive(1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tensor_module_laws(seed in any::<u64>(), n in 1usize..3, m in 1usize..3) {
        let (ls, rs) = pair();
        let w = TensorWitness::new(&ls, &rs);
        let mut rng = StreamRng::new(seed, 0);
        let f = ModuleVector::random(&ls, n, &mut rng);
        let f2 = ModuleVector::random(&ls, n, &mut rng);
        let h = ModuleVector::random(&rs, m, &mut rng);
        let h2 = ModuleVector::random(&rs, m, &mut rng);
        let lhs = tensor_vector(&f, &h).unwrap().inner(&tensor_vector(&f2, &h2).unwrap()).unwrap();
        let rhs = tensor_element(&f.inner(&f2).unwrap(), &h.inner(&h2).unwrap()).unwrap();
        prop_assert!(lhs.distance(&rhs) <= 1e-11 * rhs.norm().max(1.0));

        let k = ModuleOperator::random(&ls, n, n, &mut rng);
        let l = ModuleOperator::random(&rs, m, m, &mut rng);
        let kl = tensor_operator(&k, &l).unwrap();
        prop_assert!(kl.adjoint().distance(&tensor_operator(&k.adjoint(), &l.adjoint()).unwrap()) <= 1e-12);
        let applied = kl.apply(&tensor_vector(&f, &h).unwrap()).unwrap();
        let expect = tensor_vector(&k.apply(&f).unwrap(), &l.apply(&h).unwrap()).unwrap();
        prop_assert!(applied.try_sub(&expect).unwrap().norm() <= 1e-11 * expect.norm().max(1.0));

        let perm = w.flat_permutation(n, m);
        let flat = oracles::dense(&kl.flatten());
        let kr = oracles::kron(&oracles::dense(&k.flatten()), &oracles::dense(&l.flatten()));
        let mut worst = 0.0_f64;
        for (x, &px) in perm.iter().enumerate() {
            for (y, &py) in perm.iter().enumerate() {
                worst = worst.max((flat[px][py] - kr[x][y]).norm());
            }
        }
        prop_assert!(worst <= 1e-11 * oracles::max_abs(&kr).max(1.0));
    }
}

#[test]
fn unit_factor_leaves_certificates_unchanged() {
    let s = spec21();
    let one_spec = AlgebraSpec::new(vec![1]).unwrap();
    let cfg = CheckConfig::default();
    let mut rng = StreamRng::new(3, 0);
    let fr = FrameSeq::random(&s, 2, 4, &mut rng);
    let k = ModuleOperator::random(&s, 2, 2, &mut rng);
    let unit = FrameSeq::coordinate(&one_spec, 1);
    let tf = tensor_frame(&fr, &unit).unwrap();
    assert_eq!(tf.spec(), fr.spec());
    for (x, y) in tf.members().iter().zip(fr.members()) {
        assert!(x.try_sub(y).unwrap().norm() == 0.0);
    }
    let id1 = ModuleOperator::identity(&one_spec, 1);
    let k1 = tensor_operator(&k, &id1).unwrap();
    assert!(k1.distance(&k) == 0.0);
    let (l, m) = optimal_scalar_bounds(&fr, &k).unwrap();
    let a = AlgElement::one(&s).scale_real(0.9 * l.sqrt());
    let b = AlgElement::one(&s).scale_real(1.1 * m.sqrt());
    let c0 = certify_kframe(&fr, &k, &a, &b, &cfg).unwrap();
    let c1 = certify_kframe(&tf, &k1, &a, &b, &cfg).unwrap();
    assert_eq!(c0.status, c1.status);
    assert_eq!(c0.values, c1.values);
}

#[test]
fn coordinate_frames_tensor_to_a_coordinate_frame() {
    let (ls, rs) = pair();
    let w = TensorWitness::new(&ls, &rs);
    let tf = tensor_frame(&FrameSeq::coordinate(&ls, 2), &FrameSeq::coordinate(&rs, 3)).unwrap();
    let coord = FrameSeq::coordinate(w.product(), 6);
    assert_eq!(tf.len(), 6);
    for (x, y) in tf.members().iter().zip(coord.members()) {
        assert!(x.try_sub(y).unwrap().norm() == 0.0);
    }
    let mut rng = StreamRng::new(4, 0);
    let f = FrameSeq::random(&ls, 2, 3, &mut rng);
    let h = FrameSeq::random(&rs, 1, 2, &mut rng);
    assert_eq!(tensor_frame(&f, &h).unwrap().len(), 6);
    let diag = w
        .diagonal_frame(&f, &FrameSeq::random(&rs, 1, 3, &mut rng))
        .unwrap();
    assert_eq!(diag.len(), 3);
}

#[test]
fn example_truncation_tensor_coordinate_frame() {
    let inst = example_truncation(10);
    let right = AlgebraSpec::diagonal(2).unwrap();
    let h = FrameSeq::coordinate(&right, 2);
    let tf = tensor_frame(&inst.frame, &h).unwrap();
    let s_f = inst.frame.frame_operator();
    let expect = tensor_operator(s_f, &ModuleOperator::identity(&right, 2)).unwrap();
    assert!(tf.frame_operator().distance(&expect) <= 1e-12);
    let xs: Vec<f64> = (1..=10)
        .map(|i| (1.0 / 3.0 + 1.0 / i as f64).powi(2))
        .collect();
    let sq = central_mult(
        &AlgElement::real_diagonal(inst.spec(), &xs).unwrap(),
        1,
        DEFAULT_TOL,
    )
    .unwrap();
    assert!(s_f.distance(&sq) <= 1e-15);
}

#[test]
fn tensor_audit_trivial_and_random() {
    let (ls, rs) = pair();
    let cfg = CheckConfig::default();
    let one_l = AlgElement::one(&ls);
    let one_r = AlgElement::one(&rs);
    let id_l = ModuleOperator::identity(&ls, 2);
    let id_r = ModuleOperator::identity(&rs, 2);
    let cert = tensor_frame_audit(
        &FrameSeq::coordinate(&ls, 2),
        &FrameSeq::coordinate(&rs, 2),
        FactorBounds {
            k: &id_l,
            lower: &one_l,
            upper: &one_l,
        },
        FactorBounds {
            k: &id_r,
            lower: &one_r,
            upper: &one_r,
        },
        &cfg,
    )
    .unwrap();
    assert!(cert.is_certified());

    let start = Instant::now();
    for trial in 0..20u64 {
        let inst = trial_instance(5, trial, Profile::TensorPair);
        let right = inst.right.as_ref().unwrap();
        let cert = tensor_frame_audit(
            &inst.frame,
            &right.frame,
            FactorBounds {
                k: inst.k.as_ref().unwrap(),
                lower: inst.bounds.a.as_ref().unwrap(),
                upper: inst.bounds.b.as_ref().unwrap(),
            },
            FactorBounds {
                k: right.k.as_ref().unwrap(),
                lower: right.bounds.a.as_ref().unwrap(),
                upper: right.bounds.b.as_ref().unwrap(),
            },
            &cfg,
        )
        .unwrap();
        assert!(cert.is_certified(), "trial {trial}");
        let st = tensor_frame(&inst.frame, &right.frame)
            .unwrap()
            .frame_operator()
            .clone();
        let sfsh =
            tensor_operator(inst.frame.frame_operator(), right.frame.frame_operator()).unwrap();
        assert!(st.distance(&sfsh) <= 1e-10 * sfsh.norm());
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn noncentral_tensor_bounds_are_rejected() {
    let (ls, rs) = pair();
    let mut rng = StreamRng::new(6, 0);
    let a = AlgElement::random(&ls, &mut rng);
    let one_l = AlgElement::one(&ls);
    let one_r = AlgElement::one(&rs);
    let id_l = ModuleOperator::identity(&ls, 1);
    let id_r = ModuleOperator::identity(&rs, 1);
    let res = tensor_frame_audit(
        &FrameSeq::coordinate(&ls, 1),
        &FrameSeq::coordinate(&rs, 1),
        FactorBounds {
            k: &id_l,
            lower: &a,
            upper: &one_l,
        },
        FactorBounds {
            k: &id_r,
            lower: &one_r,
            upper: &one_r,
        },
        &CheckConfig::default(),
    );
    assert!(matches!(res, Err(Error::Precondition(_))));
}

#[test]
fn difference_quadratic_matches_direct_summation() {
    let s = spec21();
    let mut rng = StreamRng::new(7, 0);
    for _ in 0..20 {
        let f = FrameSeq::random(&s, 2, 4, &mut rng);
        let h = FrameSeq::random(&s, 2, 4, &mut rng);
        let d = difference_frame(&f, &h).unwrap();
        let x = ModuleVector::random(&s, 2, &mut rng);
        let q = difference_quadratic(&f, &h, &x).unwrap();
        let direct = oracles::norm(&oracles::direct_quadratic(&x, d.members()));
        assert!(rel(q, direct) <= 1e-11, "{q} vs {direct}");
        assert_eq!(difference_quadratic(&f, &f, &x).unwrap(), 0.0);
        let zero = FrameSeq::new(&s, 2, vec![ModuleVector::zero(&s, 2); 4]).unwrap();
        let ux = f.analysis_op().apply(&x).unwrap().norm();
        assert!(rel(difference_quadratic(&f, &zero, &x).unwrap(), ux * ux) <= 1e-12);
    }
    let short = FrameSeq::random(&s, 2, 3, &mut rng);
    let f = FrameSeq::random(&s, 2, 4, &mut rng);
    let x = ModuleVector::random(&s, 2, &mut rng);
    assert!(matches!(
        difference_quadratic(&f, &short, &x),
        Err(Error::Input(_))
    ));
}

#[test]
fn branch_constants_match_the_bisection_pencil() {
    let s = spec21();
    let mut rng = StreamRng::new(8, 0);
    for _ in 0..20 {
        let f = FrameSeq::random(&s, 2, 5, &mut rng);
        let h = FrameSeq::random(&s, 2, 5, &mut rng);
        let d = difference_frame(&f, &h).unwrap();
        let (mf, mh) = exact_branch_m(&f, &h).unwrap();
        let of = 1.0 / oracles::pencil_bisect(d.synthesis_op(), f.synthesis_op());
        let oh = 1.0 / oracles::pencil_bisect(d.synthesis_op(), h.synthesis_op());
        assert!(rel(mf, of) <= 1e-8, "{mf} vs {of}");
        assert!(rel(mh, oh) <= 1e-8, "{mh} vs {oh}");
    }
    let f = FrameSeq::random(&s, 2, 4, &mut rng);
    assert_eq!(exact_branch_m(&f, &f).unwrap(), (0.0, 0.0));
}

#[test]
fn scaled_copy_has_closed_form_branches_and_the_min_form_constant_is_their_max() {
    let s = spec21();
    let mut rng = StreamRng::new(9, 0);
    let f = FrameSeq::random(&s, 2, 5, &mut rng);
    let k = ModuleOperator::identity(&s, 2);
    let (l, m) = optimal_scalar_bounds(&f, &k).unwrap();
    let a = AlgElement::one(&s).scale_real(0.99 * l.sqrt());
    let b = AlgElement::one(&s).scale_real(1.01 * m.sqrt());
    for eps in [1e-3, 0.05, 0.3] {
        let h = f.scaled(c(1.0 + eps));
        let (mf, mh) = exact_branch_m(&f, &h).unwrap();
        assert!((mf - eps * eps).abs() <= 1e-9);
        assert!((mh - eps * eps / (1.0 + eps).powi(2)).abs() <= 1e-9);
        let rep =
            pertur1_audit(&f, &h, &k, &k, &a, &b, &CheckConfig::default().samples(200)).unwrap();
        assert!((rep.m - mf.max(mh)).abs() <= 1e-15);
        assert!(rep.sampled_m <= rep.m + 1e-9);
        // every sample attains the f-branch value here, above the smaller branch
        assert!((rep.sampled_m - eps * eps).abs() <= 1e-9);
    }
}

#[test]
fn pertur1_examples() {
    let s = spec21();
    let cfg = CheckConfig::default().samples(300);
    let mut rng = StreamRng::new(10, 0);
    let f = FrameSeq::random(&s, 2, 5, &mut rng);
    let k = ModuleOperator::random(&s, 2, 2, &mut rng);
    let (l, m) = optimal_scalar_bounds(&f, &k).unwrap();
    let a = AlgElement::one(&s).scale_real(0.99 * l.sqrt());
    let b = AlgElement::one(&s).scale_real(1.01 * m.sqrt());
    let same = pertur1_audit(&f, &f, &k, &k, &a, &b, &cfg).unwrap();
    assert_eq!(same.m, 0.0);
    assert_eq!(same.status(), Status::Certified);

    let rank1 = ModuleOperator::coordinate_projection(&s, 2, &[0]);
    let no_incl = pertur1_audit(&f, &f, &rank1, &k, &a, &b, &cfg);
    assert!(matches!(no_incl, Err(Error::Hypothesis(_))));
}

#[test]
fn pertur1_conclusions_survive_an_independent_check() {
    let cfg = CheckConfig::default().samples(200);
    for trial in 0..30u64 {
        let inst = trial_instance(21, trial, Profile::Perturbation);
        let k = inst.k.as_ref().unwrap();
        let (a, b) = (
            inst.bounds.a.as_ref().unwrap(),
            inst.bounds.b.as_ref().unwrap(),
        );
        let h = inst.perturbed.as_ref().unwrap();
        let rep = pertur1_audit(&inst.frame, h, k, k, a, b, &cfg).unwrap();
        assert_eq!(rep.status(), Status::Certified, "trial {trial}");
        assert!(rep.m.is_finite() && rep.m < 1e-3);
        assert!(rep.sampled_m <= rep.m + 1e-9);
        let lo = rep.conclusion.get("lower_bound").unwrap();
        let hi = rep.conclusion.get("upper_bound").unwrap();
        let one = AlgElement::one(inst.spec());
        let direct = certify_kframe(
            h,
            k,
            &one.scale_real(lo),
            &one.scale_real(hi),
            &CheckConfig::default(),
        )
        .unwrap();
        assert!(direct.is_certified(), "trial {trial}");
        assert!(
            rep.conclusion.get("bessel.norm").unwrap() <= (1.0 + rep.m.sqrt()) * b.norm() + 1e-9
        );
    }
}

#[test]
fn converse_with_identity() {
    let s = spec21();
    let mut rng = StreamRng::new(11, 0);
    let cfg = CheckConfig::default().samples(200);
    let id = ModuleOperator::identity(&s, 2);
    for _ in 0..10 {
        let f = FrameSeq::random(&s, 2, 5, &mut rng);
        let members = f
            .members()
            .iter()
            .map(|x| {
                x.try_add(&ModuleVector::random(&s, 2, &mut rng).scale(c(0.01)))
                    .unwrap()
            })
            .collect();
        let h = FrameSeq::new(&s, 2, members).unwrap();
        let (lf, mf) = optimal_scalar_bounds(&f, &id).unwrap();
        let (lh, mh) = optimal_scalar_bounds(&h, &id).unwrap();
        let one = AlgElement::one(&s);
        let (a, b) = (
            one.scale_real(0.99 * lf.sqrt()),
            one.scale_real(1.01 * mf.sqrt()),
        );
        let (cc, dd) = (
            one.scale_real(0.99 * lh.sqrt()),
            one.scale_real(1.01 * mh.sqrt()),
        );
        let rep = pertur1_converse_audit(&f, &h, &id, &id, &a, &b, &cc, &dd, &cfg).unwrap();
        let m1 = (1.0 + dd.norm() / a.norm()).powi(2);
        let m2 = (1.0 + b.norm() / cc.norm()).powi(2);
        assert!(rep.m <= m1.min(m2) + 1e-9);
        assert_eq!(rep.status(), Status::Certified);
    }
}

#[test]
fn pertur2_examples() {
    let s = spec21();
    let cfg = CheckConfig::default().samples(300);
    let mut rng = StreamRng::new(12, 0);
    let f = FrameSeq::random(&s, 2, 5, &mut rng);
    let k = ModuleOperator::identity(&s, 2);
    let (l, m) = optimal_scalar_bounds(&f, &k).unwrap();
    let a = AlgElement::one(&s).scale_real(0.99 * l.sqrt());
    let b = AlgElement::one(&s).scale_real(1.01 * m.sqrt());
    let exact = pertur2_audit(&f, &f, &k, &k, Abg::new(0.0, 0.0, 0.0), &a, &b, &cfg).unwrap();
    assert_eq!(exact.status(), Status::Certified);
    let shrunk = f.scaled(c(0.9));
    let scaled = pertur2_audit(&f, &shrunk, &k, &k, Abg::new(0.1, 0.0, 0.0), &a, &b, &cfg).unwrap();
    assert_eq!(scaled.status(), Status::Certified);
    assert_eq!(scaled.conclusion.claim, "pertur2-l-frame");
    let bad = pertur2_audit(&f, &f, &k, &k, Abg::new(0.5, 1.0, 0.0), &a, &b, &cfg);
    assert!(matches!(bad, Err(Error::Input(_))));
    let far = f.scaled(c(0.5));
    let falsified = pertur2_audit(&f, &far, &k, &k, Abg::new(0.1, 0.0, 0.0), &a, &b, &cfg).unwrap();
    assert_eq!(falsified.status(), Status::Falsified);
    assert_eq!(falsified.conclusion.claim, "pertur2-hypothesis");
    let w = falsified.conclusion.witness.as_ref().unwrap();
    let lhs = difference_quadratic(&f, &far, w).unwrap().sqrt();
    let rhs = 0.1 * f.analysis_op().apply(w).unwrap().norm();
    assert!(lhs > rhs);
}

#[test]
fn pertur2_planted_families_certify() {
    let cfg = CheckConfig::default().samples(200);
    for trial in 0..30u64 {
        let inst = trial_instance(23, trial, Profile::Perturbation);
        let k = inst.k.as_ref().unwrap();
        let (a, b) = (
            inst.bounds.a.as_ref().unwrap(),
            inst.bounds.b.as_ref().unwrap(),
        );
        let abg = inst.abg.unwrap();
        let mut rng = StreamRng::new(23, 1000 + trial);
        let h = planted_abg_family(&inst.frame, abg.alpha, &mut rng);
        let d = difference_frame(&inst.frame, &h).unwrap();
        for _ in 0..20 {
            let x = ModuleVector::random(inst.spec(), inst.rank(), &mut rng);
            let lhs = d.analysis_op().apply(&x).unwrap().norm();
            let ux = inst.frame.analysis_op().apply(&x).unwrap().norm();
            assert!(lhs <= 0.9 * abg.alpha * ux * (1.0 + 1e-12) + 1e-15);
        }
        let rep = pertur2_audit(&inst.frame, &h, k, k, abg, a, b, &cfg).unwrap();
        assert_eq!(rep.status(), Status::Certified, "trial {trial}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn triangle_consistency(seed in any::<u64>(), n in 1usize..3, j in 1usize..5) {
        let s = spec21();
        let mut rng = StreamRng::new(seed, 0);
        let f = FrameSeq::random(&s, n, j, &mut rng);
        let h = FrameSeq::random(&s, n, j, &mut rng);
        for _ in 0..10 {
            let x = ModuleVector::random(&s, n, &mut rng);
            let uf = f.analysis_op().apply(&x).unwrap().norm();
            let uh = h.analysis_op().apply(&x).unwrap().norm();
            let dx = difference_quadratic(&f, &h, &x).unwrap().sqrt();
            prop_assert!((uh - uf).abs() <= dx + 1e-10);
        }
    }

    #[test]
    fn branch_constants_are_unitarily_invariant(seed in any::<u64>()) {
        let s = spec21();
        let mut rng = StreamRng::new(seed, 0);
        let f = FrameSeq::random(&s, 2, 4, &mut rng);
        let h = FrameSeq::random(&s, 2, 4, &mut rng);
        let x = ModuleOperator::random(&s, 2, 2, &mut rng);
        let u = ModuleOperator::from_flat(&s, 2, 2, &polar_unitary(&x.flatten())).unwrap();
        let (mf, mh) = exact_branch_m(&f, &h).unwrap();
        let (uf, uh) = exact_branch_m(&f.transform(&u).unwrap(), &h.transform(&u).unwrap()).unwrap();
        prop_assert!(rel(mf, uf) <= 1e-9 && rel(mh, uh) <= 1e-9);
        let lam = pencil_lower_bound(&u, &ModuleOperator::identity(&s, 2)).unwrap();
        prop_assert!((lam - 1.0).abs() <= 1e-9);
    }
}

//! Seeded random ensembles.
//!
//! Trial `t` of a run with seed `s` draws from `StreamRng::new(s, t)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::algebra::{AlgElement, AlgebraSpec};
use crate::error::{input, Error, Result};
use crate::frames::{optimal_scalar_bounds, FrameSeq};
use crate::harness::instance::{Bounds, Instance};
use crate::hilbmod::{ModuleOperator, ModuleVector};
use crate::linalg::{self, c};
use crate::perturb::Abg;
use crate::rng::StreamRng;

pub const EXAMPLE_N: usize = 10;
pub const PERTURBATION_EPS: f64 = 1e-3;
pub const PERTURBATION_ABG: (f64, f64, f64) = (0.2, 0.1, 0.05);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Generic,
    RankDeficientK,
    CoisometryCommuting,
    ExampleTruncation(usize),
    /// `K`-frame with `λ* = 1` and a perturbed copy `h = f + εΔ`.
    Perturbation,
    /// Factor pair over `M_2` and `C ⊕ C`.
    TensorPair,
    /// Alternating planted range inclusion (even trials) and violation.
    DouglasPlanted,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("paper-example-truncation") {
            let n = match rest {
                "" => EXAMPLE_N,
                _ => rest
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| rest.strip_prefix(':'))
                    .and_then(|r| r.trim().parse::<usize>().ok())
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| Error::Input(format!("bad truncation size in profile {s:?}")))?,
            };
            return Ok(Profile::ExampleTruncation(n));
        }
        match s {
            "generic" => Ok(Profile::Generic),
            "rank-deficient-K" | "rank-deficient-k" => Ok(Profile::RankDeficientK),
            "co-isometry-commuting" => Ok(Profile::CoisometryCommuting),
            "perturbation" => Ok(Profile::Perturbation),
            "tensor-pair" => Ok(Profile::TensorPair),
            "douglas-planted" => Ok(Profile::DouglasPlanted),
            _ => input(format!("unknown profile {s:?}")),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Generic => f.write_str("generic"),
            Profile::RankDeficientK => f.write_str("rank-deficient-K"),
            Profile::CoisometryCommuting => f.write_str("co-isometry-commuting"),
            Profile::ExampleTruncation(n) => write!(f, "paper-example-truncation({n})"),
            Profile::Perturbation => f.write_str("perturbation"),
            Profile::TensorPair => f.write_str("tensor-pair"),
            Profile::DouglasPlanted => f.write_str("douglas-planted"),
        }
    }
}

fn spec21() -> AlgebraSpec {
    AlgebraSpec::new(vec![2, 1]).expect("valid spec")
}

/// Stream 0 of `seed`.
pub fn random_instance(seed: u64, profile: Profile) -> Instance {
    trial_instance(seed, 0, profile)
}

pub fn trial_instance(seed: u64, trial: u64, profile: Profile) -> Instance {
    let mut rng = StreamRng::new(seed, trial);
    let mut inst = match profile {
        Profile::Generic => generic(&mut rng),
        Profile::RankDeficientK => rank_deficient(&mut rng),
        Profile::CoisometryCommuting => coisometry(&mut rng),
        Profile::ExampleTruncation(n) => example_truncation(n),
        Profile::Perturbation => perturbation(&mut rng),
        Profile::TensorPair => tensor_pair(&mut rng),
        Profile::DouglasPlanted => douglas_planted(&mut rng, trial.is_multiple_of(2)),
    };
    inst.seed = Some(seed);
    inst
}

/// `A = 0.5 √λ* 1` (or `0.1 · 1` when `λ* <= 1e-8`), `B = (1.01 √μ* + 1e-3) 1`.
pub fn equivalence_bounds(frame: &FrameSeq, k: &ModuleOperator) -> (AlgElement, AlgElement) {
    let (lam, mu) = optimal_scalar_bounds(frame, k).expect("shapes agree");
    let one = AlgElement::one(frame.spec());
    let a = if lam > 1e-8 { 0.5 * lam.sqrt() } else { 0.1 };
    (one.scale_real(a), one.scale_real(1.01 * mu.sqrt() + 1e-3))
}

/// `(0.99 √λ*, 1.01 √μ*)`, for families known to be K-frames.
pub fn tight_bounds(frame: &FrameSeq, k: &ModuleOperator) -> (AlgElement, AlgElement) {
    let (lam, mu) = optimal_scalar_bounds(frame, k).expect("shapes agree");
    let one = AlgElement::one(frame.spec());
    (
        one.scale_real(0.99 * lam.sqrt()),
        one.scale_real(1.01 * mu.sqrt()),
    )
}

fn with_bounds(mut inst: Instance, a: AlgElement, b: AlgElement) -> Instance {
    inst.bounds.a = Some(a);
    inst.bounds.b = Some(b);
    inst
}

fn generic(rng: &mut StreamRng) -> Instance {
    let s = spec21();
    let n = rng.range(1, 3);
    let count = rng.range(1, 6);
    let frame = FrameSeq::random(&s, n, count, rng);
    let k = ModuleOperator::random(&s, n, n, rng);
    let l = ModuleOperator::random(&s, n, n, rng);
    let (a, b) = equivalence_bounds(&frame, &k);
    let mut inst = with_bounds(Instance::new(frame), a, b);
    inst.k = Some(k);
    inst.l = Some(l);
    inst
}

fn rank_deficient(rng: &mut StreamRng) -> Instance {
    let s = spec21();
    let n = rng.range(2, 3);
    let keep: Vec<usize> = (0..n - 1).collect();
    let x = ModuleOperator::random(&s, n, n, rng);
    let k = x
        .compose(&ModuleOperator::coordinate_projection(&s, n, &keep))
        .expect("square");
    let covered = rng.range(0, 1) == 1;
    let mut members = Vec::new();
    if covered {
        for _ in 0..n - 1 {
            let g = ModuleVector::random(&s, n, rng);
            members.push(k.apply(&g).expect("rank n"));
        }
    }
    let extra = rng.range(if covered { 0 } else { 1 }, 6 - members.len());
    for _ in 0..extra {
        members.push(ModuleVector::random(&s, n, rng));
    }
    let frame = FrameSeq::new(&s, n, members).expect("rank n members");
    let (a, b) = equivalence_bounds(&frame, &k);
    let mut inst = with_bounds(Instance::new(frame), a, b);
    inst.k = Some(k);
    inst
}

fn coisometry(rng: &mut StreamRng) -> Instance {
    let s = spec21();
    let n = rng.range(1, 3);
    let count = rng.range(n, 6);
    let frame = FrameSeq::random(&s, n, count, rng);
    let zs: Vec<Complex64> = (0..s.num_blocks())
        .map(|_| rng.complex_normal() + c(0.5))
        .collect();
    let z = AlgElement::block_scalars(&s, &zs).expect("one scalar per block");
    let k =
        ModuleOperator::central_mult(&z, n, crate::DEFAULT_TOL).expect("block scalars are central");
    let x = ModuleOperator::random(&s, n, n, rng);
    let t = ModuleOperator::from_flat(&s, n, n, &linalg::polar_unitary(&x.flatten()))
        .expect("module map");
    let (a, b) = tight_bounds(&frame, &k);
    let mut inst = with_bounds(Instance::new(frame), a, b);
    inst.k = Some(k);
    inst.t = Some(t);
    inst
}

/// `f_j = c_j e_j` in `C^N` over `C ⊕ … ⊕ C` with `c_j = 1/3 + 1/j`;
/// `K = S`, `C = diag(c)`, `B = C` and `A = ||C||^{-1} 1`.
pub fn example_truncation(n: usize) -> Instance {
    let s = AlgebraSpec::diagonal(n).expect("n >= 1");
    let cs: Vec<f64> = (1..=n).map(|i| 1.0 / 3.0 + 1.0 / i as f64).collect();
    let members = (0..n)
        .map(|j| {
            let mut x = vec![0.0; n];
            x[j] = cs[j];
            ModuleVector::new(
                &s,
                vec![AlgElement::real_diagonal(&s, &x).expect("n entries")],
            )
            .expect("rank one")
        })
        .collect();
    let frame = FrameSeq::new(&s, 1, members).expect("rank one members");
    let cc = AlgElement::real_diagonal(&s, &cs).expect("n entries");
    let k = frame.frame_operator().clone();
    let mut inst = Instance::new(frame);
    inst.k = Some(k);
    inst.bounds = Bounds {
        a: Some(AlgElement::one(&s).scale_real(1.0 / cc.norm())),
        b: Some(cc.clone()),
        c: Some(cc),
        d: None,
    };
    inst
}

fn perturbation(rng: &mut StreamRng) -> Instance {
    let s = spec21();
    let n = rng.range(1, 2);
    let count = rng.range(n + 2, n + 3);
    let frame = FrameSeq::random(&s, n, count, rng);
    let k0 = ModuleOperator::random(&s, n, n, rng);
    let (lam, _) = optimal_scalar_bounds(&frame, &k0).expect("shapes agree");
    let k = k0.scale(c(lam.sqrt()));
    let members = frame
        .members()
        .iter()
        .map(|f| {
            f.try_add(&ModuleVector::random(&s, n, rng).scale(c(PERTURBATION_EPS)))
                .expect("same shape")
        })
        .collect();
    let h = FrameSeq::new(&s, n, members).expect("same shape");
    let (a, b) = tight_bounds(&frame, &k);
    let mut inst = with_bounds(Instance::new(frame), a, b);
    inst.k = Some(k);
    inst.perturbed = Some(h);
    let (al, be, ga) = PERTURBATION_ABG;
    inst.abg = Some(Abg::new(al, be, ga));
    inst
}

/// `h_j = f_j - (U R)(e_j)` with `||R|| = 0.9 α`, so
/// `||D^* f|| <= 0.9 α ||U^* f||` for every `f`.
pub fn planted_abg_family(frame: &FrameSeq, alpha: f64, rng: &mut StreamRng) -> FrameSeq {
    let s = frame.spec();
    let count = frame.len();
    let r = ModuleOperator::random(s, count, count, rng);
    let r = r.scale(c(0.9 * alpha / r.norm()));
    let d = frame.synthesis_op().compose(&r).expect("J x J");
    let members = (0..count)
        .map(|j| {
            let dj = d.apply(&ModuleVector::unit(s, count, j)).expect("rank J");
            frame.members()[j].try_sub(&dj).expect("same shape")
        })
        .collect();
    FrameSeq::new(s, frame.rank(), members).expect("same shape")
}

fn tensor_factor(s: &AlgebraSpec, rng: &mut StreamRng) -> Instance {
    let n = rng.range(1, 2);
    let count = rng.range(n, 3);
    let frame = FrameSeq::random(s, n, count, rng);
    let k = ModuleOperator::random(s, n, n, rng);
    let (a, b) = tight_bounds(&frame, &k);
    let mut inst = with_bounds(Instance::new(frame), a, b);
    inst.k = Some(k);
    inst
}

fn tensor_pair(rng: &mut StreamRng) -> Instance {
    let left = AlgebraSpec::full(2).expect("d = 2");
    let right = AlgebraSpec::diagonal(2).expect("n = 2");
    let mut inst = tensor_factor(&left, rng);
    inst.right = Some(Box::new(tensor_factor(&right, rng)));
    inst
}

/// Frame members are the columns of `S`, `K` plays `T` in `R(T) ⊆ R(S)`.
fn douglas_planted(rng: &mut StreamRng, inclusion: bool) -> Instance {
    let s = spec21();
    let n = rng.range(1, 3);
    let p = rng.range(1, 3);
    let (sop, t) = if inclusion {
        let m = rng.range(1, 3);
        let sop = ModuleOperator::random(&s, m, n, rng);
        let q = ModuleOperator::random(&s, p, m, rng);
        let t = sop.compose(&q).expect("m matches");
        (sop, t)
    } else {
        let m = rng.range(1, n);
        let keep: Vec<usize> = (0..m - 1).collect();
        let x = ModuleOperator::random(&s, m, n, rng);
        let sop = x
            .compose(&ModuleOperator::coordinate_projection(&s, m, &keep))
            .expect("m matches");
        let t = ModuleOperator::random(&s, p, n, rng);
        (sop, t)
    };
    let members = (0..sop.in_rank())
        .map(|j| {
            sop.apply(&ModuleVector::unit(&s, sop.in_rank(), j))
                .expect("rank m")
        })
        .collect();
    let frame = FrameSeq::new(&s, n, members).expect("rank n");
    let mut inst = Instance::new(frame);
    inst.k = Some(t);
    inst
}

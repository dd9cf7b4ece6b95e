//! Spatial tensor products of block algebras, free modules, operators and
//! frames.
//!
//! For `A = ⊕_i M_{d_i}` and `B = ⊕_k M_{e_k}` the product algebra is
//! `⊕_{(i,k)} M_{d_i e_k}` with pairs ordered lexicographically (`i` outer).
//! Slot `(p, q)` of `(A⊗B)^{n m}` sits at index `p m + q`, and
//! `(a ⊗ b)` on block `(i, k)` is the Kronecker product `a_i ⊗ b_k`.

use crate::algebra::{AlgElement, AlgebraSpec};
use crate::certificate::{Certificate, CheckConfig};
use crate::error::{Error, Result};
use crate::frames::{certify_kframe, FrameSeq};
use crate::hilbmod::{ModuleOperator, ModuleVector};
use crate::linalg::{self, CMat};

/// Index bookkeeping for one pair of factor algebras.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorWitness {
    left: AlgebraSpec,
    right: AlgebraSpec,
    product: AlgebraSpec,
}

impl TensorWitness {
    pub fn new(left: &AlgebraSpec, right: &AlgebraSpec) -> Self {
        let dims = left
            .block_dims()
            .iter()
            .flat_map(|&d| right.block_dims().iter().map(move |&e| d * e))
            .collect();
        TensorWitness {
            left: left.clone(),
            right: right.clone(),
            product: AlgebraSpec::new(dims).expect("products of positive dims"),
        }
    }

    pub fn left(&self) -> &AlgebraSpec {
        &self.left
    }

    pub fn right(&self) -> &AlgebraSpec {
        &self.right
    }

    pub fn product(&self) -> &AlgebraSpec {
        &self.product
    }

    /// Product block holding the pair `(i, k)`.
    pub fn block_index(&self, i: usize, k: usize) -> usize {
        i * self.right.num_blocks() + k
    }

    pub fn element(&self, a: &AlgElement, b: &AlgElement) -> Result<AlgElement> {
        self.left.ensure_same(a.spec())?;
        self.right.ensure_same(b.spec())?;
        let mut blocks = Vec::with_capacity(self.product.num_blocks());
        for ab in a.blocks() {
            for bb in b.blocks() {
                blocks.push(ab.kronecker(bb));
            }
        }
        AlgElement::from_blocks(&self.product, blocks)
    }

    pub fn vector(&self, f: &ModuleVector, h: &ModuleVector) -> Result<ModuleVector> {
        let mut entries = Vec::with_capacity(f.rank() * h.rank());
        for fp in f.entries() {
            for hq in h.entries() {
                entries.push(self.element(fp, hq)?);
            }
        }
        ModuleVector::new(&self.product, entries)
    }

    /// `(K ⊗ L)[(j,l)][(i,k)] = K[j][i] ⊗ L[l][k]`.
    pub fn operator(&self, k: &ModuleOperator, l: &ModuleOperator) -> Result<ModuleOperator> {
        self.left.ensure_same(k.spec())?;
        self.right.ensure_same(l.spec())?;
        let (ki, ko, li, lo) = (k.in_rank(), k.out_rank(), l.in_rank(), l.out_rank());
        let mut rows = Vec::with_capacity(ki * li);
        for j in 0..ki {
            for jl in 0..li {
                let mut row = Vec::with_capacity(ko * lo);
                for i in 0..ko {
                    for il in 0..lo {
                        row.push(self.element(k.entry(j, i), l.entry(jl, il))?);
                    }
                }
                rows.push(row);
            }
        }
        ModuleOperator::new(&self.product, rows, ko * lo)
    }

    /// All pairs `f_j ⊗ h_i`, `j` outer.
    pub fn frame(&self, f: &FrameSeq, h: &FrameSeq) -> Result<FrameSeq> {
        let mut members = Vec::with_capacity(f.len() * h.len());
        for fj in f.members() {
            for hi in h.members() {
                members.push(self.vector(fj, hi)?);
            }
        }
        FrameSeq::new(&self.product, f.rank() * h.rank(), members)
    }

    /// The singly indexed family `f_j ⊗ h_j`; no claim is attached to it.
    pub fn diagonal_frame(&self, f: &FrameSeq, h: &FrameSeq) -> Result<FrameSeq> {
        if f.len() != h.len() {
            return Err(Error::Input(
                "diagonal tensor family needs equal member counts".into(),
            ));
        }
        let members = f
            .members()
            .iter()
            .zip(h.members())
            .map(|(a, b)| self.vector(a, b))
            .collect::<Result<Vec<_>>>()?;
        FrameSeq::new(&self.product, f.rank() * h.rank(), members)
    }

    /// `perm[x]` is the flat index in `(A⊗B)^{n m}` of coordinate `x` of the
    /// Kronecker product `C^{n dim A} ⊗ C^{m dim B}`, so that
    /// `flat(K⊗L)[perm[r], perm[c]] = (flat K ⊗ flat L)[r, c]`.
    pub fn flat_permutation(&self, n: usize, m: usize) -> Vec<usize> {
        let da = self.left.dim();
        let db = self.right.dim();
        let dp = self.product.dim();
        let off_a = self.left.offsets();
        let off_b = self.right.offsets();
        let off_p = self.product.offsets();
        // local (block, row, col) for each flat coordinate of one element
        let locate = |spec: &AlgebraSpec, offs: &[usize], x: usize| -> (usize, usize, usize) {
            for (bi, &d) in spec.block_dims().iter().enumerate() {
                if x < offs[bi] + d * d {
                    let r = (x - offs[bi]) / d;
                    return (bi, r, (x - offs[bi]) % d);
                }
            }
            unreachable!("coordinate inside element")
        };
        let mut perm = vec![0; n * da * m * db];
        for xa in 0..n * da {
            let (p, ra) = (xa / da, xa % da);
            let (i, r1, c1) = locate(&self.left, &off_a, ra);
            let d = self.left.block_dims()[i];
            for xb in 0..m * db {
                let (q, rb) = (xb / db, xb % db);
                let (k, r2, c2) = locate(&self.right, &off_b, rb);
                let e = self.right.block_dims()[k];
                let blk = self.block_index(i, k);
                let de = d * e;
                let within = (r1 * e + r2) * de + (c1 * e + c2);
                perm[xa * m * db + xb] = (p * m + q) * dp + off_p[blk] + within;
            }
        }
        perm
    }
}

pub fn tensor_element(a: &AlgElement, b: &AlgElement) -> Result<AlgElement> {
    TensorWitness::new(a.spec(), b.spec()).element(a, b)
}

pub fn tensor_vector(f: &ModuleVector, h: &ModuleVector) -> Result<ModuleVector> {
    TensorWitness::new(f.spec(), h.spec()).vector(f, h)
}

pub fn tensor_operator(k: &ModuleOperator, l: &ModuleOperator) -> Result<ModuleOperator> {
    TensorWitness::new(k.spec(), l.spec()).operator(k, l)
}

pub fn tensor_frame(f: &FrameSeq, h: &FrameSeq) -> Result<FrameSeq> {
    TensorWitness::new(f.spec(), h.spec()).frame(f, h)
}

/// Bounds of one factor: `(K, A, B)`.
pub struct FactorBounds<'a> {
    pub k: &'a ModuleOperator,
    pub lower: &'a AlgElement,
    pub upper: &'a AlgElement,
}

/// Given a *-K-frame `F` with bounds `(A, B)` and a *-L-frame `H` with
/// bounds `(C, D)`, all central, certifies that the tensor family has frame
/// operator `S_F ⊗ S_H` and is a *-(K⊗L)-frame with bounds `(A⊗C, B⊗D)`.
pub fn tensor_frame_audit(
    f: &FrameSeq,
    h: &FrameSeq,
    left: FactorBounds<'_>,
    right: FactorBounds<'_>,
    cfg: &CheckConfig,
) -> Result<Certificate> {
    for (name, x) in [
        ("A", left.lower),
        ("B", left.upper),
        ("C", right.lower),
        ("D", right.upper),
    ] {
        if !x.is_central(cfg.tol) {
            return Err(Error::Precondition(format!("bound {name} must be central")));
        }
    }
    let cf = certify_kframe(f, left.k, left.lower, left.upper, cfg)?;
    if !cf.is_certified() {
        return Err(Error::Hypothesis(format!(
            "left family is not a *-K-frame ({})",
            cf.status
        )));
    }
    let ch = certify_kframe(h, right.k, right.lower, right.upper, cfg)?;
    if !ch.is_certified() {
        return Err(Error::Hypothesis(format!(
            "right family is not a *-L-frame ({})",
            ch.status
        )));
    }
    let w = TensorWitness::new(f.spec(), h.spec());
    let tf = w.frame(f, h)?;
    let mut cert = Certificate::new("tensor-k-frame", cfg);

    let expected = w
        .operator(f.frame_operator(), h.frame_operator())?
        .flatten();
    let actual = tf.frame_operator().flatten();
    let rel = linalg::spectral_norm(&(&actual - &expected))
        / linalg::spectral_norm(&expected).max(f64::MIN_POSITIVE);
    cert.value("frame_operator.rel_error", rel);
    cert.value("members", tf.len() as f64);
    if rel > 1e-10 {
        let d = &actual - &expected;
        let (_, vecs) = linalg::eigh(&(d.adjoint() * &d));
        let v = vecs.column(vecs.ncols() - 1).into_owned();
        cert.falsify(crate::hilbmod::witness_from_flat(
            w.product(),
            tf.rank(),
            &v,
        ));
    }
    let kl = w.operator(left.k, right.k)?;
    let ac = w.element(left.lower, right.lower)?;
    let bd = w.element(left.upper, right.upper)?;
    let kc = certify_kframe(&tf, &kl, &ac, &bd, cfg)?;
    cert.absorb("kframe", &kc);
    Ok(cert)
}

/// `flat(K) ⊗ flat(L)` reindexed into the product module's flattening.
pub fn permuted_kron(w: &TensorWitness, k: &ModuleOperator, l: &ModuleOperator) -> CMat {
    let kr = k.flatten().kronecker(&l.flatten());
    let prow = w.flat_permutation(k.out_rank(), l.out_rank());
    let pcol = w.flat_permutation(k.in_rank(), l.in_rank());
    let mut out = CMat::zeros(kr.nrows(), kr.ncols());
    for r in 0..kr.nrows() {
        for col in 0..kr.ncols() {
            out[(prow[r], pcol[col])] = kr[(r, col)];
        }
    }
    out
}

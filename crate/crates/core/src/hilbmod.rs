//! The free Hilbert module `A^n`, adjointable operators on it, and the
//! faithful complex flattening used for every norm and positivity decision.
//!
//! Conventions: `A` acts on the left, `<f, g> = sum_k f_k g_k^*` is
//! `A`-linear in the first slot, and an operator `T: A^n -> A^m` is an
//! `n x m` array of algebra elements acting by right multiplication,
//! `(Tf)_i = sum_j f_j t[j][i]`. Such maps commute with the left action, so
//! they are exactly the `A`-linear maps.
//!
//! Flattening identifies `A^n` with `C^{n·dim A}` (slot-major, then block,
//! then row-major inside a block). The Euclidean inner product there is
//! `tr <f, g>`, and `T ↦ flat(T)` is an injective *-homomorphism.

use num_complex::Complex64;

use crate::algebra::{AlgElement, AlgebraSpec};
use crate::error::{input, Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::rng::StreamRng;

/// Complex matrix of an operator's action on the flattened module;
/// rows index the codomain.
pub type FlatMatrix = CMat;

#[derive(Clone, Debug, PartialEq)]
pub struct ModuleVector {
    spec: AlgebraSpec,
    entries: Vec<AlgElement>,
}

impl ModuleVector {
    pub fn new(spec: &AlgebraSpec, entries: Vec<AlgElement>) -> Result<Self> {
        for (k, e) in entries.iter().enumerate() {
            if e.spec() != spec {
                return input(format!(
                    "vector entry {k} is over {:?}, expected {spec:?}",
                    e.spec()
                ));
            }
        }
        Ok(ModuleVector {
            spec: spec.clone(),
            entries,
        })
    }

    pub fn zero(spec: &AlgebraSpec, n: usize) -> Self {
        ModuleVector {
            spec: spec.clone(),
            entries: vec![AlgElement::zero(spec); n],
        }
    }

    /// `1_A` in slot `k`, zero elsewhere.
    pub fn unit(spec: &AlgebraSpec, n: usize, k: usize) -> Self {
        let mut v = Self::zero(spec, n);
        v.entries[k] = AlgElement::one(spec);
        v
    }

    pub fn random(spec: &AlgebraSpec, n: usize, rng: &mut StreamRng) -> Self {
        let entries = (0..n).map(|_| AlgElement::random(spec, rng)).collect();
        ModuleVector {
            spec: spec.clone(),
            entries,
        }
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[AlgElement] {
        &self.entries
    }

    pub fn entry(&self, k: usize) -> &AlgElement {
        &self.entries[k]
    }

    fn ensure_compatible(&self, other: &Self) -> Result<()> {
        self.spec.ensure_same(&other.spec)?;
        if self.rank() != other.rank() {
            return input(format!(
                "rank mismatch: {} vs {}",
                self.rank(),
                other.rank()
            ));
        }
        Ok(())
    }

    /// `a · f`.
    pub fn left_mul(&self, a: &AlgElement) -> Result<Self> {
        self.spec.ensure_same(a.spec())?;
        Ok(ModuleVector {
            spec: self.spec.clone(),
            entries: self.entries.iter().map(|e| a * e).collect(),
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        Ok(ModuleVector {
            spec: self.spec.clone(),
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        Ok(ModuleVector {
            spec: self.spec.clone(),
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, z: Complex64) -> Self {
        ModuleVector {
            spec: self.spec.clone(),
            entries: self.entries.iter().map(|e| e.scale(z)).collect(),
        }
    }

    /// `<f, g> = sum_k f_k g_k^*`.
    pub fn inner(&self, other: &Self) -> Result<AlgElement> {
        self.ensure_compatible(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &Self) -> AlgElement {
        let mut acc = AlgElement::zero(&self.spec);
        for (a, b) in self.entries.iter().zip(&other.entries) {
            acc.add_assign_unchecked(&(a * &b.adjoint()));
        }
        acc
    }

    /// `||f|| = ||<f, f>||^{1/2}`.
    pub fn norm(&self) -> f64 {
        self.inner_unchecked(self).norm().sqrt()
    }

    pub fn to_flat(&self) -> CVec {
        let data: Vec<Complex64> = self.entries.iter().flat_map(|e| e.to_flat()).collect();
        CVec::from_vec(data)
    }

    pub fn from_flat(spec: &AlgebraSpec, n: usize, v: &CVec) -> Result<Self> {
        let dim = spec.dim();
        if v.len() != n * dim {
            return input(format!("flat vector length {} != {}", v.len(), n * dim));
        }
        let entries = (0..n)
            .map(|k| AlgElement::from_flat(spec, &v.as_slice()[k * dim..(k + 1) * dim]))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModuleVector {
            spec: spec.clone(),
            entries,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModuleOperator {
    spec: AlgebraSpec,
    in_rank: usize,
    out_rank: usize,
    /// `t[j][i]` stored at `j * out_rank + i`.
    entries: Vec<AlgElement>,
}

impl ModuleOperator {
    /// Build from `entries[j][i]` (input index `j`, output index `i`).
    pub fn new(spec: &AlgebraSpec, entries: Vec<Vec<AlgElement>>, out_rank: usize) -> Result<Self> {
        let in_rank = entries.len();
        let mut flat = Vec::with_capacity(in_rank * out_rank);
        for (j, row) in entries.into_iter().enumerate() {
            if row.len() != out_rank {
                return input(format!(
                    "operator row {j} has {} entries, expected {out_rank}",
                    row.len()
                ));
            }
            for (i, e) in row.into_iter().enumerate() {
                if e.spec() != spec {
                    return input(format!("operator entry [{j}][{i}] is over {:?}", e.spec()));
                }
                flat.push(e);
            }
        }
        Ok(ModuleOperator {
            spec: spec.clone(),
            in_rank,
            out_rank,
            entries: flat,
        })
    }

    pub(crate) fn from_fn(
        spec: &AlgebraSpec,
        in_rank: usize,
        out_rank: usize,
        mut f: impl FnMut(usize, usize) -> AlgElement,
    ) -> Self {
        let mut entries = Vec::with_capacity(in_rank * out_rank);
        for j in 0..in_rank {
            for i in 0..out_rank {
                entries.push(f(j, i));
            }
        }
        ModuleOperator {
            spec: spec.clone(),
            in_rank,
            out_rank,
            entries,
        }
    }

    pub fn zero(spec: &AlgebraSpec, in_rank: usize, out_rank: usize) -> Self {
        Self::from_fn(spec, in_rank, out_rank, |_, _| AlgElement::zero(spec))
    }

    pub fn identity(spec: &AlgebraSpec, n: usize) -> Self {
        Self::from_fn(spec, n, n, |j, i| {
            if i == j {
                AlgElement::one(spec)
            } else {
                AlgElement::zero(spec)
            }
        })
    }

    /// Orthogonal projection keeping the listed slots.
    pub fn coordinate_projection(spec: &AlgebraSpec, n: usize, keep: &[usize]) -> Self {
        Self::from_fn(spec, n, n, |j, i| {
            if i == j && keep.contains(&i) {
                AlgElement::one(spec)
            } else {
                AlgElement::zero(spec)
            }
        })
    }

    pub fn random(
        spec: &AlgebraSpec,
        in_rank: usize,
        out_rank: usize,
        rng: &mut StreamRng,
    ) -> Self {
        Self::from_fn(spec, in_rank, out_rank, |_, _| {
            AlgElement::random(spec, rng)
        })
    }

    /// `f ↦ a·f` on `A^n`; only `A`-linear (hence only an operator here) for
    /// central `a`. Its adjoint is `central_mult(a^*)`.
    pub fn central_mult(a: &AlgElement, n: usize, tol: f64) -> Result<Self> {
        if !a.is_central(tol) {
            return Err(Error::Precondition(
                "left multiplication by a non-central element is not A-linear".into(),
            ));
        }
        let spec = a.spec().clone();
        Ok(Self::from_fn(&spec, n, n, |j, i| {
            if i == j {
                a.clone()
            } else {
                AlgElement::zero(&spec)
            }
        }))
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn in_rank(&self) -> usize {
        self.in_rank
    }

    pub fn out_rank(&self) -> usize {
        self.out_rank
    }

    pub fn is_square(&self) -> bool {
        self.in_rank == self.out_rank
    }

    /// `t[j][i]`: contribution of input slot `j` to output slot `i`.
    pub fn entry(&self, j: usize, i: usize) -> &AlgElement {
        &self.entries[j * self.out_rank + i]
    }

    pub fn apply(&self, f: &ModuleVector) -> Result<ModuleVector> {
        self.spec.ensure_same(f.spec())?;
        if f.rank() != self.in_rank {
            return input(format!(
                "operator expects rank {}, got {}",
                self.in_rank,
                f.rank()
            ));
        }
        let mut out = Vec::with_capacity(self.out_rank);
        for i in 0..self.out_rank {
            let mut acc = AlgElement::zero(&self.spec);
            for j in 0..self.in_rank {
                acc.add_assign_unchecked(&(f.entry(j) * self.entry(j, i)));
            }
            out.push(acc);
        }
        ModuleVector::new(&self.spec, out)
    }

    /// `(T^*)[i][j] = t[j][i]^*`.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(&self.spec, self.out_rank, self.in_rank, |i, j| {
            self.entry(j, i).adjoint()
        })
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &ModuleOperator) -> Result<Self> {
        self.spec.ensure_same(&inner.spec)?;
        if inner.out_rank != self.in_rank {
            return input(format!(
                "cannot compose: inner maps to rank {}, outer expects {}",
                inner.out_rank, self.in_rank
            ));
        }
        Ok(Self::from_fn(
            &self.spec,
            inner.in_rank,
            self.out_rank,
            |j, i| {
                let mut acc = AlgElement::zero(&self.spec);
                for k in 0..self.in_rank {
                    acc.add_assign_unchecked(&(inner.entry(j, k) * self.entry(k, i)));
                }
                acc
            },
        ))
    }

    fn ensure_same_shape(&self, other: &Self) -> Result<()> {
        self.spec.ensure_same(&other.spec)?;
        if (self.in_rank, self.out_rank) != (other.in_rank, other.out_rank) {
            return input("operator shape mismatch");
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.ensure_same_shape(other)?;
        Ok(Self::from_fn(
            &self.spec,
            self.in_rank,
            self.out_rank,
            |j, i| self.entry(j, i) + other.entry(j, i),
        ))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.ensure_same_shape(other)?;
        Ok(Self::from_fn(
            &self.spec,
            self.in_rank,
            self.out_rank,
            |j, i| self.entry(j, i) - other.entry(j, i),
        ))
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self::from_fn(&self.spec, self.in_rank, self.out_rank, |j, i| {
            self.entry(j, i).scale(z)
        })
    }

    pub fn flatten(&self) -> FlatMatrix {
        let dim = self.spec.dim();
        let mut m = CMat::zeros(self.out_rank * dim, self.in_rank * dim);
        let offsets = self.spec.offsets();
        for j in 0..self.in_rank {
            for i in 0..self.out_rank {
                let t = self.entry(j, i);
                for (b, &d) in self.spec.block_dims().iter().enumerate() {
                    let blk = t.block(b);
                    let ob = offsets[b];
                    for r in 0..d {
                        let row0 = i * dim + ob + r * d;
                        let col0 = j * dim + ob + r * d;
                        for s in 0..d {
                            for col in 0..d {
                                m[(row0 + col, col0 + s)] = blk[(s, col)];
                            }
                        }
                    }
                }
            }
        }
        m
    }

    /// Read an operator back from a flat matrix that commutes with the
    /// module action (as produced by `flatten`, products, pseudo-inverses and
    /// Hermitian functional calculus of such matrices).
    pub fn from_flat(
        spec: &AlgebraSpec,
        in_rank: usize,
        out_rank: usize,
        m: &FlatMatrix,
    ) -> Result<Self> {
        let dim = spec.dim();
        if m.shape() != (out_rank * dim, in_rank * dim) {
            return input(format!(
                "flat matrix shape {:?} does not match ranks ({in_rank} -> {out_rank})",
                m.shape()
            ));
        }
        let offsets = spec.offsets();
        Ok(Self::from_fn(spec, in_rank, out_rank, |j, i| {
            let blocks = spec
                .block_dims()
                .iter()
                .enumerate()
                .map(|(b, &d)| {
                    let ob = offsets[b];
                    CMat::from_fn(d, d, |s, col| m[(i * dim + ob + col, j * dim + ob + s)])
                })
                .collect();
            AlgElement::from_blocks(spec, blocks).expect("block shapes follow spec")
        }))
    }

    /// Largest singular value of the flattening, which equals the operator
    /// norm for module norms.
    pub fn norm(&self) -> f64 {
        linalg::spectral_norm(&self.flatten())
    }

    /// `<Tf, f> >= 0` for all `f`, decided on the flattening.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.is_square() && linalg::psd_check(&self.flatten(), tol).0
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let p = self.flatten();
        linalg::spectral_norm(&(&p * &p - &p)) <= tol
            && linalg::spectral_norm(&(&p - p.adjoint())) <= tol
    }

    pub fn distance(&self, other: &Self) -> f64 {
        linalg::spectral_norm(&(self.flatten() - other.flatten()))
    }
}

/// `f ↦ a·f` (see [`ModuleOperator::central_mult`]).
pub fn central_mult(a: &AlgElement, n: usize, tol: f64) -> Result<ModuleOperator> {
    ModuleOperator::central_mult(a, n, tol)
}

pub fn inner_product(f: &ModuleVector, g: &ModuleVector) -> Result<AlgElement> {
    f.inner(g)
}

pub fn vector_norm(f: &ModuleVector) -> f64 {
    f.norm()
}

pub fn op_is_positive(t: &ModuleOperator, tol: f64) -> bool {
    t.is_positive(tol)
}

pub fn op_norm(t: &ModuleOperator) -> f64 {
    t.norm()
}

/// Unit-trace-norm flat vector lifted to a module vector; used to turn an
/// extremal eigenvector into a witness.
pub(crate) fn witness_from_flat(spec: &AlgebraSpec, n: usize, v: &CVec) -> ModuleVector {
    ModuleVector::from_flat(spec, n, v).expect("flat witness has module shape")
}

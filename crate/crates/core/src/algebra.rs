//! Finite-dimensional C*-algebras `A = M_{d_1}(C) ⊕ … ⊕ M_{d_B}(C)`.
//!
//! Every finite-dimensional C*-algebra is of this form. Elements are stored
//! blockwise; the involution is blockwise conjugate transpose and the norm is
//! the largest singular value over all blocks.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{input, Error, Result};
use crate::linalg::{self, c, CMat};
use crate::rng::StreamRng;

/// Default relative tolerance for positivity and related tests.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AlgebraSpec {
    dims: Arc<[usize]>,
}

impl AlgebraSpec {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return input("algebra spec needs at least one block");
        }
        if block_dims.contains(&0) {
            return input("block dimensions must be positive");
        }
        Ok(AlgebraSpec {
            dims: block_dims.into(),
        })
    }

    /// The commutative algebra `C^n` (n one-dimensional blocks).
    pub fn diagonal(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    /// The full matrix algebra `M_d(C)`.
    pub fn full(d: usize) -> Result<Self> {
        Self::new(vec![d])
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.len()
    }

    /// Complex dimension `sum d_i^2`.
    pub fn dim(&self) -> usize {
        self.dims.iter().map(|d| d * d).sum()
    }

    /// Offsets of each block inside the flattened element (row-major per block).
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.dims.len());
        let mut acc = 0;
        for d in self.dims.iter() {
            off.push(acc);
            acc += d * d;
        }
        off
    }

    pub fn is_commutative(&self) -> bool {
        self.dims.iter().all(|&d| d == 1)
    }

    pub(crate) fn ensure_same(&self, other: &AlgebraSpec) -> Result<()> {
        if self != other {
            return input(format!("algebra spec mismatch: {self:?} vs {other:?}"));
        }
        Ok(())
    }
}

impl fmt::Debug for AlgebraSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraSpec{:?}", &self.dims[..])
    }
}

#[derive(Clone, PartialEq)]
pub struct AlgElement {
    spec: AlgebraSpec,
    blocks: Vec<CMat>,
}

impl fmt::Debug for AlgElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlgElement")
            .field("spec", &self.spec)
            .field("blocks", &self.blocks)
            .finish()
    }
}

impl AlgElement {
    pub fn from_blocks(spec: &AlgebraSpec, blocks: Vec<CMat>) -> Result<Self> {
        if blocks.len() != spec.num_blocks() {
            return input(format!(
                "expected {} blocks, got {}",
                spec.num_blocks(),
                blocks.len()
            ));
        }
        for (i, (b, &d)) in blocks.iter().zip(spec.block_dims()).enumerate() {
            if b.shape() != (d, d) {
                return input(format!(
                    "block {i} has shape {:?}, expected ({d}, {d})",
                    b.shape()
                ));
            }
        }
        Ok(AlgElement {
            spec: spec.clone(),
            blocks,
        })
    }

    pub fn zero(spec: &AlgebraSpec) -> Self {
        let blocks = spec
            .block_dims()
            .iter()
            .map(|&d| CMat::zeros(d, d))
            .collect();
        AlgElement {
            spec: spec.clone(),
            blocks,
        }
    }

    pub fn one(spec: &AlgebraSpec) -> Self {
        Self::scalar(spec, c(1.0))
    }

    pub fn scalar(spec: &AlgebraSpec, z: Complex64) -> Self {
        let blocks = spec
            .block_dims()
            .iter()
            .map(|&d| CMat::identity(d, d) * z)
            .collect();
        AlgElement {
            spec: spec.clone(),
            blocks,
        }
    }

    /// Central element with scalar `zs[i]` on block `i`.
    pub fn block_scalars(spec: &AlgebraSpec, zs: &[Complex64]) -> Result<Self> {
        if zs.len() != spec.num_blocks() {
            return input("one scalar per block required");
        }
        let blocks = spec
            .block_dims()
            .iter()
            .zip(zs)
            .map(|(&d, &z)| CMat::identity(d, d) * z)
            .collect();
        Ok(AlgElement {
            spec: spec.clone(),
            blocks,
        })
    }

    /// Real diagonal element of a commutative spec, e.g. `diag(4/3, 5/6, 2/3)`.
    pub fn real_diagonal(spec: &AlgebraSpec, xs: &[f64]) -> Result<Self> {
        let zs: Vec<Complex64> = xs.iter().map(|&x| c(x)).collect();
        Self::block_scalars(spec, &zs)
    }

    pub fn random(spec: &AlgebraSpec, rng: &mut StreamRng) -> Self {
        let blocks = spec
            .block_dims()
            .iter()
            .map(|&d| rng.complex_matrix(d, d))
            .collect();
        AlgElement {
            spec: spec.clone(),
            blocks,
        }
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &CMat {
        &self.blocks[i]
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Result<Self> {
        self.spec.ensure_same(&other.spec)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| f(a, b))
            .collect();
        Ok(AlgElement {
            spec: self.spec.clone(),
            blocks,
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn adjoint(&self) -> Self {
        AlgElement {
            spec: self.spec.clone(),
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        AlgElement {
            spec: self.spec.clone(),
            blocks: self.blocks.iter().map(|b| b * z).collect(),
        }
    }

    pub fn scale_real(&self, x: f64) -> Self {
        self.scale(c(x))
    }

    pub(crate) fn add_assign_unchecked(&mut self, other: &Self) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a += b;
        }
    }

    /// C*-norm: the largest singular value over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::spectral_norm)
            .fold(0.0, f64::max)
    }

    /// Union of the eigenvalue multisets of the blocks, block by block.
    pub fn spectrum(&self) -> Vec<Complex64> {
        self.blocks.iter().flat_map(linalg::eigenvalues).collect()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.distance(&self.adjoint()) <= tol * self.norm().max(1.0)
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        let scale = self.norm().max(1.0);
        if self.distance(&self.adjoint()) > tol * scale {
            return false;
        }
        self.min_hermitian_eigenvalue() >= -tol * scale
    }

    /// Smallest eigenvalue of the Hermitian part over all blocks.
    pub fn min_hermitian_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .filter_map(|b| linalg::min_eig(b).map(|(v, _)| v))
            .fold(f64::INFINITY, f64::min)
    }

    /// `min |λ|` over the spectrum.
    pub fn min_spectral_modulus(&self) -> f64 {
        self.spectrum()
            .iter()
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// `0 ∉ σ(a)`, tested as `min |λ| > tol * max(1, ||a||)`.
    pub fn is_strictly_nonzero(&self, tol: f64) -> bool {
        self.min_spectral_modulus() > tol * self.norm().max(1.0)
    }

    /// Each block is within `tol * max(1, ||a||)` of a scalar multiple of the
    /// identity, which for a direct sum of full matrix blocks is exactly the
    /// center.
    pub fn is_central(&self, tol: f64) -> bool {
        let bound = tol * self.norm().max(1.0);
        self.blocks.iter().all(|b| {
            let d = b.nrows();
            let mean = b.trace() / c(d as f64);
            linalg::spectral_norm(&(b - CMat::identity(d, d) * mean)) <= bound
        })
    }

    /// Positive square root computed blockwise; negative eigenvalues of the
    /// Hermitian part are clamped to zero.
    pub fn sqrt_positive(&self, tol: f64) -> Result<Self> {
        if !self.is_positive(tol) {
            return Err(Error::Precondition("sqrt of a non-positive element".into()));
        }
        Ok(AlgElement {
            spec: self.spec.clone(),
            blocks: self.blocks.iter().map(linalg::psd_sqrt).collect(),
        })
    }

    /// Blockwise inverse of a strictly nonzero element.
    pub fn inverse(&self, tol: f64) -> Result<Self> {
        if !self.is_strictly_nonzero(tol) {
            return Err(Error::Precondition(
                "element is not strictly nonzero".into(),
            ));
        }
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let inv = b
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Precondition("singular block".into()))?;
            blocks.push(inv);
        }
        Ok(AlgElement {
            spec: self.spec.clone(),
            blocks,
        })
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| linalg::spectral_norm(&(a - b)))
            .fold(0.0, f64::max)
    }

    /// `tr(a)` summed over blocks; this is the trace of the tracial
    /// representation used for flattening.
    pub fn trace(&self) -> Complex64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    /// Row-major concatenation of the blocks, length `spec.dim()`.
    pub fn to_flat(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.spec.dim());
        for b in &self.blocks {
            for r in 0..b.nrows() {
                for col in 0..b.ncols() {
                    out.push(b[(r, col)]);
                }
            }
        }
        out
    }

    pub fn from_flat(spec: &AlgebraSpec, data: &[Complex64]) -> Result<Self> {
        if data.len() != spec.dim() {
            return input(format!(
                "flat element length {} != {}",
                data.len(),
                spec.dim()
            ));
        }
        let mut blocks = Vec::with_capacity(spec.num_blocks());
        let mut k = 0;
        for &d in spec.block_dims() {
            blocks.push(CMat::from_row_slice(d, d, &data[k..k + d * d]));
            k += d * d;
        }
        Ok(AlgElement {
            spec: spec.clone(),
            blocks,
        })
    }
}

fn expect_same(a: &AlgElement, b: &AlgElement) {
    assert!(
        a.spec == b.spec,
        "algebra spec mismatch: {:?} vs {:?}",
        a.spec,
        b.spec
    );
}

impl Add for &AlgElement {
    type Output = AlgElement;
    fn add(self, rhs: &AlgElement) -> AlgElement {
        expect_same(self, rhs);
        self.try_add(rhs).unwrap()
    }
}

impl Sub for &AlgElement {
    type Output = AlgElement;
    fn sub(self, rhs: &AlgElement) -> AlgElement {
        expect_same(self, rhs);
        self.try_sub(rhs).unwrap()
    }
}

impl Mul for &AlgElement {
    type Output = AlgElement;
    fn mul(self, rhs: &AlgElement) -> AlgElement {
        expect_same(self, rhs);
        self.try_mul(rhs).unwrap()
    }
}

impl Neg for &AlgElement {
    type Output = AlgElement;
    fn neg(self) -> AlgElement {
        self.scale_real(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: &[usize]) -> AlgebraSpec {
        AlgebraSpec::new(d.to_vec()).unwrap()
    }

    fn m2(rows: [[f64; 2]; 2]) -> CMat {
        CMat::from_fn(2, 2, |r, col| c(rows[r][col]))
    }

    #[test]
    fn spec_validation() {
        assert!(AlgebraSpec::new(vec![]).is_err());
        assert!(AlgebraSpec::new(vec![2, 0]).is_err());
        assert_eq!(spec(&[2, 1, 3]).dim(), 4 + 1 + 9);
    }

    #[test]
    fn unit_law_and_involution() {
        let s = spec(&[2, 1]);
        let mut rng = StreamRng::new(1, 0);
        let a = AlgElement::random(&s, &mut rng);
        let b = AlgElement::random(&s, &mut rng);
        assert_eq!(&AlgElement::one(&s) * &a, a);
        let lhs = (&a * &b).adjoint();
        let rhs = &b.adjoint() * &a.adjoint();
        assert!(lhs.distance(&rhs) <= 1e-13 * lhs.norm());
        assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn nilpotent_squares_to_zero() {
        let s = spec(&[2]);
        let a = AlgElement::from_blocks(&s, vec![m2([[0.0, 1.0], [0.0, 0.0]])]).unwrap();
        assert_eq!((&a * &a).norm(), 0.0);
    }

    #[test]
    fn mismatched_specs_are_input_errors() {
        let a = AlgElement::one(&spec(&[2]));
        let b = AlgElement::one(&spec(&[1, 1]));
        assert!(matches!(a.try_mul(&b), Err(Error::Input(_))));
        assert!(AlgElement::from_blocks(&spec(&[2]), vec![CMat::zeros(3, 3)]).is_err());
    }

    #[test]
    fn norms() {
        let s = spec(&[1, 1, 1]);
        assert_eq!(AlgElement::one(&s).norm(), 1.0);
        let d = AlgElement::real_diagonal(&s, &[4.0 / 3.0, 5.0 / 6.0, 2.0 / 3.0]).unwrap();
        assert!((d.norm() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn spectra() {
        let mut sp = AlgElement::one(&spec(&[2, 1])).spectrum();
        sp.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert_eq!(sp.len(), 3);
        assert!(sp.iter().all(|z| (z - c(1.0)).norm() < 1e-14));
        let d = AlgElement::real_diagonal(&spec(&[1, 1]), &[4.0 / 3.0, 5.0 / 6.0]).unwrap();
        let sp = d.spectrum();
        assert!((sp[0].re - 4.0 / 3.0).abs() < 1e-15 && (sp[1].re - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn positivity() {
        let s = spec(&[2]);
        assert!(AlgElement::zero(&s).is_positive(DEFAULT_TOL));
        let d = AlgElement::from_blocks(&s, vec![m2([[1.0, 0.0], [0.0, -1.0]])]).unwrap();
        assert!(!d.is_positive(DEFAULT_TOL));
        let mut rng = StreamRng::new(2, 0);
        let a = AlgElement::random(&spec(&[3, 2]), &mut rng);
        assert!((&a.adjoint() * &a).is_positive(DEFAULT_TOL));
    }

    #[test]
    fn strict_nonzeroness() {
        let s = spec(&[2, 1]);
        assert!(AlgElement::one(&s).is_strictly_nonzero(DEFAULT_TOL));
        let z =
            AlgElement::from_blocks(&s, vec![m2([[1.0, 5.0], [0.0, 0.0]]), CMat::identity(1, 1)])
                .unwrap();
        assert!(!z.is_strictly_nonzero(DEFAULT_TOL));
        for n in 1..=40 {
            let ds = AlgebraSpec::diagonal(n).unwrap();
            let xs: Vec<f64> = (1..=n).map(|i| 1.0 / 3.0 + 1.0 / i as f64).collect();
            let cc = AlgElement::real_diagonal(&ds, &xs).unwrap();
            assert!(cc.is_strictly_nonzero(DEFAULT_TOL));
            assert!(cc.min_spectral_modulus() > 1.0 / 3.0);
        }
    }

    #[test]
    fn centrality() {
        assert!(AlgElement::one(&spec(&[2, 3])).is_central(DEFAULT_TOL));
        let d = AlgElement::from_blocks(&spec(&[2]), vec![m2([[1.0, 0.0], [0.0, 2.0]])]).unwrap();
        assert!(!d.is_central(DEFAULT_TOL));
        let mut rng = StreamRng::new(4, 0);
        let x = AlgElement::random(&spec(&[1, 1, 1]), &mut rng);
        assert!(x.is_central(DEFAULT_TOL));
    }

    #[test]
    fn square_roots() {
        let s = spec(&[1, 1]);
        let one = AlgElement::one(&spec(&[2, 1]));
        assert!(one.sqrt_positive(DEFAULT_TOL).unwrap().distance(&one) < 1e-14);
        let d = AlgElement::real_diagonal(&s, &[4.0, 9.0]).unwrap();
        let r = d.sqrt_positive(DEFAULT_TOL).unwrap();
        assert!(r.distance(&AlgElement::real_diagonal(&s, &[2.0, 3.0]).unwrap()) < 1e-14);
        let neg = AlgElement::real_diagonal(&s, &[1.0, -1.0]).unwrap();
        assert!(matches!(
            neg.sqrt_positive(DEFAULT_TOL),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn flat_round_trip() {
        let s = spec(&[2, 1, 3]);
        let mut rng = StreamRng::new(6, 0);
        let a = AlgElement::random(&s, &mut rng);
        assert_eq!(AlgElement::from_flat(&s, &a.to_flat()).unwrap(), a);
    }
}

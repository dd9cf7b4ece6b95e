//! Certified computations with *-frames, *-K-frames and *-atomic systems on
//! finite-dimensional Hilbert C*-modules.
//!
//! The algebra is a finite direct sum of full matrix blocks, the module is
//! the free module `A^n`, and every operator inequality is decided on a
//! faithful complex flattening, so "certified" means an eigenvalue check at
//! an explicit relative tolerance rather than a sampled guess.

pub mod algebra;
pub mod certificate;
pub mod douglas;
pub mod error;
pub mod frames;
pub mod harness;
pub mod hilbmod;
pub mod linalg;
pub mod perturb;
pub mod rng;
pub mod tensorprod;

pub use algebra::{AlgElement, AlgebraSpec, DEFAULT_TOL};
pub use certificate::{Certificate, CheckConfig, Status};
pub use error::{Error, Result};
pub use frames::FrameSeq;
pub use hilbmod::{FlatMatrix, ModuleOperator, ModuleVector};

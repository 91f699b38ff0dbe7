//! Matrix-valued positive definite kernels under semigroup symmetries.
//!
//! The crate builds `2 x 2` kernels `[[k(phi x, phi y), k(phi x, y)], [k(x, phi y), k(x, y)]]`
//! from a scalar kernel `k` and a map `phi`. These kernels are positive
//! definite but never strictly so, while each of their scalar projections
//! `<K(x, y) v, v>` is strictly positive definite. The crate also verifies
//! these claims numerically:
//!
//! * [`numcore`]: Hermitian matrices, PD verdicts with null vectors.
//! * [`spaces`]: circle, Euclidean space, complex sphere, finite abelian groups.
//! * [`symmetry`]: maps, aperiodicity and center evidence, orbit decomposition.
//! * [`kernels`]: scalar and matrix kernels, projections, blocked Gram matrices.
//! * [`counterexample`]: the constructors, embedding and degeneracy witnesses.
//! * [`abelian`]: characters, analysis, synthesis and the strictness criterion.
//! * [`harness`]: seeded suites with JSON or text reports.
//!
//! Everything numeric is generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abelian;
pub mod counterexample;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod numcore;
pub mod rng;
pub mod scalar;
pub mod spaces;
pub mod symmetry;

pub use error::{Error, Result};
pub use scalar::Real;

pub type HermitianMatrix64 = numcore::HermitianMatrix<f64>;
pub type PdVerdict64 = numcore::PdVerdict<f64>;
pub type Tolerances64 = numcore::Tolerances<f64>;
pub type Space64 = spaces::Space<f64>;
pub type Point64 = spaces::Point<f64>;
pub type SymmetryMap64 = symmetry::SymmetryMap<f64>;
pub type OrbitDecomposition64 = symmetry::OrbitDecomposition<f64>;
pub type ScalarKernel64 = kernels::ScalarKernel<f64>;
pub type MatrixKernel64 = kernels::MatrixKernel<f64>;
pub type CounterexampleKernel64 = counterexample::CounterexampleKernel<f64>;
pub type DegeneracyWitness64 = counterexample::DegeneracyWitness<f64>;
pub type FourierSpectrum64 = abelian::FourierSpectrum<f64>;

pub type HermitianMatrix32 = numcore::HermitianMatrix<f32>;
pub type ScalarKernel32 = kernels::ScalarKernel<f32>;
pub type MatrixKernel32 = kernels::MatrixKernel<f32>;

//! Semidefinite lower bounds on matrix factorization ranks of quantum states.
//!
//! This crate computes moment-hierarchy lower bounds on the separable rank of
//! bipartite states (complex and real variants), strengthened bounds on the
//! completely positive rank, and feasibility tests for moment relaxations of
//! the separable set, with entanglement witnesses extracted from dual
//! solutions.
//!
//! The numeric core is generic over the scalar type (`f32`/`f64`) through the
//! [`Scalar`] trait; the crate root exposes `f64` aliases which are what the
//! CLI and most callers want.

pub mod bench;
pub mod cprank;
pub mod dps;
pub mod error;
pub mod functional;
pub mod hermitian;
pub mod moment;
pub mod monomial;
pub mod program;
pub mod scalar;
pub mod sdpa;
pub mod seprank;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default real scalar used by the CLI and the concrete aliases below.
pub type Real = f64;
/// Complex scalar over [`Real`].
pub type Cplx = num_complex::Complex<Real>;

pub type ComplexMatrix64 = hermitian::ComplexMatrix<Real>;
pub type HermitianState64 = hermitian::HermitianState<Real>;
pub type RealEmbedding64 = hermitian::RealEmbedding<Real>;
pub type ConicProgram64 = program::ConicProgram<Real>;
pub type SolveReport64 = program::SolveReport<Real>;
pub type SepBoundRequest64 = seprank::SepBoundRequest<Real>;
pub type SepBoundResult64 = seprank::SepBoundResult<Real>;
pub type CpBoundRequest64 = cprank::CpBoundRequest<Real>;
pub type DpsRequest64 = dps::DpsRequest<Real>;



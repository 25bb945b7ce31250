//! Exact double-coset Hecke rings at a prime, and their global Dirichlet layer.
//!
//! Two coset systems are implemented over the monoid of integer matrices with
//! nonzero p-power determinant:
//!
//! * the lattice system: Γ = GL_r(Z_p) acting on Δ = M_r(Z_p) ∩ GL_r(Q_p),
//!   with double cosets labelled by ascending elementary-divisor exponents;
//! * the Heisenberg system: endomorphisms (A, a) of the Heisenberg Lie algebra
//!   (basis x, y, z with [x, y] = z), composed by (A,a)(B,b) = (AB, aB + det(A)·b).
//!
//! The Hecke ring of a system is the free abelian group on double cosets ΓαΓ,
//! multiplied by left-coset tallies: decompose both factors into left cosets,
//! canonicalize all pairwise products, and read the (provably uniform) tally on
//! each output double coset.  All arithmetic is exact; there is no floating
//! point anywhere and no p-adic approximation — every coset is represented by
//! an integer matrix, which is lossless because coset data is determined
//! modulo a p-power.
//!
//! On top of the local rings sit truncated power series (`coset::TruncSeries`)
//! with identities like f_{2,p}(X)·P(X) = 1, the maps between the two systems
//! (`heis::s_map`, `heis::phi_map`, `heis::theta_map`), and a restricted-product
//! global layer (`global`) with formal Dirichlet series, Euler products and the
//! square-index identities they satisfy.  The `cli` module exposes all of it as
//! a deterministic command-line verifier with a persistent product cache.

pub mod cache;
pub mod cli;
pub mod coset;
pub mod doc;
pub mod gl;
pub mod global;
pub mod heis;
pub mod linalg;
pub mod report;

pub use coset::{degree, element_degree, hecke_mul, hecke_series, pushforward, series_mul, t_index};
pub use coset::{CosetSystem, HeckeElement, TruncSeries};
pub use gl::{f_poly, gl_system, t_elementary, verify_rationality, GLKey, GlSystem};
pub use heis::{
    heis_canonical_left, heis_double_orbit, heis_mul, heis_system, module_action, phi_map, s_map,
    theta_map, verify_heis_identity, HeisElt, HeisKey, HeisSystem, ThetaPoly,
};
pub use linalg::{
    enumerate_hnf, gaussian_binomial, hnf_p, lattice_reduce, snf_exponents, valuation, ExpVector,
    PInt, PMatrix,
};
pub use report::{Check, Report};

/// Errors shared by every layer of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// `valuation(0, p)` is undefined.
    #[error("valuation of zero is undefined")]
    ZeroValuation,
    /// A coset operation met a singular matrix.
    #[error("matrix is singular")]
    SingularMatrix,
    /// A canonical form was requested for a determinant that is not ±p^m.
    #[error("|det| = {det} is not a power of p = {p}")]
    NotPPower { det: linalg::PInt, p: u64 },
    /// Invalid parameters (CLI exit code 2).
    #[error("{0}")]
    Usage(String),
    /// A tally or fiber that must be uniform was not (CLI exit code 3).
    /// This indicates a broken invariant and must never fire.
    #[error("ill-defined product: {0}")]
    IllDefined(String),
    /// A truncated series is too short for the requested operation.
    #[error("truncation degree {have} is too small, need at least {need}")]
    Truncation { have: u32, need: u32 },
    /// Operands belong to different systems, bounds or truncation degrees.
    #[error("mismatched operands: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Exact numerics for the Kitaev honeycomb spin model on a torus.
//!
//! The model couples spin-1/2 particles on a periodic honeycomb lattice with
//! bond-direction-dependent Ising interactions. Its plaquette operators are
//! conserved, so the Hilbert space splits into vortex sectors, and each sector
//! reduces to free Majorana fermions governed by an antisymmetric coupling
//! matrix. This crate provides:
//!
//! - [`lattice`]: periodic honeycomb geometry, Z2 gauge configurations, and
//!   plaquette fluxes;
//! - [`majorana`]: the quadratic Majorana form for an arbitrary gauge sector
//!   and its exact single-particle spectrum;
//! - [`analytic`]: closed-form dispersions, ground-state energy densities,
//!   gaps and gapless-phase predicates for the vortex-free and vortex-lattice
//!   sectors, plus Brillouin-zone quadrature;
//! - [`spin_ed`]: a brute-force spin-basis diagonalization oracle (Pauli
//!   string algebra, matrix-free Lanczos, flux-sector classification);
//! - [`interference`]: the six-spin hexagon experiment that exposes the pi
//!   statistical phase of a vortex through a loop-and-rotate protocol.

pub mod analytic;
pub mod interference;
pub mod lattice;
pub mod majorana;
pub mod pauli;
pub mod spin_ed;

use lattice::LinkRef;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("lattice dimensions must both be at least 1 (got {n1}x{n2})")]
    EmptyLattice { n1: usize, n2: usize },
    #[error("the staggered z-link pattern only closes on an even number of columns (got n1 = {n1})")]
    OddColumnCount { n1: usize },
    #[error("link {0:?} does not belong to this lattice")]
    UnknownLink(LinkRef),
    #[error("gauge config belongs to a {found_n1}x{found_n2} lattice, expected {expected_n1}x{expected_n2}")]
    LatticeMismatch {
        expected_n1: usize,
        expected_n2: usize,
        found_n1: usize,
        found_n2: usize,
    },
    #[error("couplings must be non-negative (got jx={jx}, jy={jy}, jz={jz})")]
    NegativeCoupling { jx: f64, jy: f64, jz: f64 },
    #[error("quadrature grid must have at least {min} points per axis (got {mx}x{my})")]
    GridTooCoarse { mx: usize, my: usize, min: usize },
    #[error("{n_spins} spins exceed the {max}-spin diagonalization guard")]
    TooManySpins { n_spins: usize, max: usize },
    #[error("eigensolver did not converge: worst residual {residual:.3e} (target {target:.3e})")]
    NoConvergence { residual: f64, target: f64 },
    #[error("state is not a flux eigenstate: |<w_{plaquette}>| = {magnitude:.6} (needs degeneracy resolution)")]
    NotFluxEigenstate { plaquette: usize, magnitude: f64 },
    #[error("site index {site} out of range for {n_sites} sites")]
    UnknownSite { site: usize, n_sites: usize },
    #[error("malformed gauge JSON: {0}")]
    MalformedGauge(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

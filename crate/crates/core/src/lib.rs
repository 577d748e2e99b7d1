//! Desk-scale checks of the deep-hole extremal property of the hexagonal
//! lattice.
//!
//! - [`moduli`]: unit-density lattices, the modular group, reduction to the
//!   fundamental domain, and the distance between bases.
//! - [`shells`]: lattice points at fixed distance from the deep hole and their
//!   rotation triples.
//! - [`perturbation`]: per-triple energies, closed-form and finite-difference
//!   Hessians, and the shell-gap sweep.
//! - [`kernel`], [`variational`]: radial kernels, lattice sums, and the local
//!   maximality scan.
//! - [`config`], [`report`], [`cli`]: the command-line surface.

pub mod cli;
pub mod config;
pub mod error;
pub mod kernel;
pub mod moduli;
pub mod perturbation;
pub mod report;
pub mod shells;
pub mod variational;

pub use error::{Error, Result};
pub use kernel::RadialKernel;
pub use moduli::{basis_from_params, deep_hole, hex_lattice, lattice_distance, reduce_to_fundamental_domain, Basis, DeepHole, HalfPlanePoint, UnimodularMatrix};
pub use shells::{enumerate_shells, partition_into_triples, rotate_index, IndexPair, ShellIndexSet, Triple};

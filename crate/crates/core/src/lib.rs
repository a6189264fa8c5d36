//! PT-symmetric tight-binding chains and their Hermitian scattering
//! counterparts.
//!
//! The crate builds the finite PT chain with balanced gain and loss, finds
//! its real-energy eigenstates both by dense diagonalization and by the
//! plane-wave (Bethe) quantization condition, and checks each of them
//! against the zero-reflection scattering state of the Hermitian lattice
//! obtained by replacing every imaginary potential with a real potential
//! and an attached semi-infinite lead.

// Negated float comparisons are deliberate: they send NaN down the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bethe;
pub mod correspondence;
pub mod dynamics;
pub mod error;
pub mod lattice;
pub mod scattering;
pub mod spectral;

pub use error::{Error, Result};
pub use lattice::{
    build_device_with_drain, build_hermitian_device, build_pt_chain, HamiltonianMatrix, LatticeSpec, Side, SiteLabel,
    SiteRole, SubNetwork,
};

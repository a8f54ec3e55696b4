//! Master-equation simulation of electron transport through tunnel-coupled
//! phosphorus donors in silicon, including the donor nuclear spins.
//!
//! The crate is organized bottom-up:
//!
//! * [`spin`] builds the electron ⊗ nuclear basis, the Hamiltonian, the ESR
//!   drive and its rotating-frame form.
//! * [`liouville`] vectorizes density operators, assembles coherent and
//!   dissipative generators, and propagates states with a Padé matrix
//!   exponential or solves for steady states.
//! * [`observables`] turns states into currents and spin projections.
//! * [`experiments`] packages the transport protocols (spin funnel, Pauli
//!   blockade with ESR, nuclear readout, Stark sweep, donor cluster) and the
//!   parameter-sweep engine.
//! * [`io`] parses run manifests and writes CSV data with JSON sidecars.

pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod liouville;
pub mod observables;
pub mod results;
pub mod spin;

pub use error::{Error, Result};

//! Basis, Hamiltonian terms, ESR drive and rotating-frame transformation.

pub mod basis;
pub mod config;
pub mod hamiltonian;
pub mod operator;
pub mod spectrum;

pub use basis::{build_basis, Basis, ChargeSector, ElectronState, NuclearConfig};
pub use config::{Direction, SystemConfig, BULK_HYPERFINE, GAMMA_E, GAMMA_N};
pub use hamiltonian::{
    apply_rwa, build_esr_drive, build_hamiltonian, electron_spin_x, electron_spin_z,
    hamiltonian_terms, resonance_frequency, rotating_frame_hamiltonian, total_spin_z,
    HamiltonianTerms,
};
pub use operator::Operator;
pub use spectrum::{
    dominant_esr_frequency, eigenspectrum, nearest_triplet_transition, triplet_transitions,
    EsrTransition, Spectrum,
};

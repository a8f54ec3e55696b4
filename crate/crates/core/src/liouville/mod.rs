//! Liouville-space master equation: vectorized states, generators,
//! propagation and steady states.
//!
//! Vectorization stacks columns, so ρ_jk sits at index j + k·n.

pub mod generator;
pub mod propagate;
pub mod state;
pub mod steady;

pub use generator::{
    dissipator, generator, liouvillian, tunnel_jumps, Generator, Superoperator, TunnelJump,
};
pub use propagate::{
    evolve_trace, propagate, time_average, Evolution, Propagator, Stage, Subspace, WindowAverage,
};
pub use state::{devectorize, liouville_index, vectorize, DensityState};
pub use steady::{steady_state, SteadyState};

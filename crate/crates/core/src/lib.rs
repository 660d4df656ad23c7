//! Simulation toolkit for a two-level system driven by a single external
//! pulse: exact time-ordered propagation, closed-form limiting propagators,
//! regime classification on the (field phase, splitting phase) map, and an
//! empirical atlas of how well each closed form holds across that map.

pub mod error;
pub mod harness;
pub mod map;
pub mod propagator;
pub mod pulse;
pub mod quad;
pub mod qubit;
pub mod regimes;

pub use error::{Error, Result};
pub use propagator::{propagate, refine_to_tolerance, EvolutionRecord, PropagationSettings};
pub use pulse::{PulseSpec, Slope};
pub use qubit::{apply, decompose_pauli, populations, Complex2State, PauliDecomposition, SystemParams, Unitary2};
pub use regimes::RegimeKind;

//! Exact dynamics of three-wave mixing devices with a quantized pump, and
//! their comparison with the classical-pump (parametric) approximation.
//!
//! Devices: beam splitter (`bs`), degenerate amplifier (`dpa`) and
//! non-degenerate amplifier (`npa`). Every Hamiltonian conserves a photon
//! number combination, so evolution runs block by block on exact
//! tridiagonal spectra.

pub mod error;
pub mod experiments;
pub mod fock_space;
pub mod hamiltonian;
pub mod observables;
pub mod propagator;
pub mod state_prep;
pub mod theory;
pub mod tridiag;

pub use error::{Error, Result};
pub use fock_space::{decompose, BasisVector, BlockCharge, BlockDecomposition, DeviceKind, InvariantBlock};
pub use hamiltonian::BlockOperator;
pub use observables::{PhotonStats, PureState, ReducedDensity, Reference};
pub use propagator::{evolve, EvolutionPlan, PreparedEvolution};
pub use state_prep::{product_state, MultiModeState, SignalInput, SingleModeSpec};
pub use theory::TargetStateSpec;

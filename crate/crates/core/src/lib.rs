//! Quantum speed limits for open systems in the Davies weak-coupling regime.
//!
//! The crate evolves `∂ρ = -(i/ħ)[H(t), ρ] + λ D_t[ρ]`, tracks quantum
//! stochastic thermodynamics along the trajectory, and evaluates the
//! three-term speed limit together with its dissipationless and
//! quasi-adiabatic limits.

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod limits;
pub mod model;
pub mod numerics;
pub mod random;
pub mod speedlimit;
pub mod thermo;

pub use dynamics::{evolve, lindbladian_apply, step, DensityMatrix, Trajectory};
pub use error::{QslError, Result};
pub use harness::{simulate, verify_corpus, verify_scenario, SimulationOutput, VerifySummary};
pub use limits::{classical_speed_limit, counter_diabatic, mt_bound, quasi_adiabatic_check};
pub use model::{
    build_jump_operators, gibbs_state, load_scenario, Coupling, HamiltonianProtocol, JumpOperator, JumpOperatorSet,
    RateKind, RateModel, Scenario, TimeGrid, Tolerances,
};
pub use numerics::{trace_distance, trace_norm, CMatrix, EigenSystem, C64};
pub use speedlimit::{qsl_bound, SpeedLimitReport, VelocityTerms};
pub use thermo::{ThermoSample, TransitionMatrix};

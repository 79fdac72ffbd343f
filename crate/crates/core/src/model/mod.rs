//! Scenario definition: Hamiltonian protocols, detailed-balance rates and
//! the Bohr-frequency decomposition of bath couplings.

mod jumps;
mod protocol;
mod rates;
mod scenario;

pub use jumps::{build_jump_operators, channel_sum, commutation_defect, Coupling, JumpOperator, JumpOperatorSet};
pub use protocol::HamiltonianProtocol;
pub use rates::{RateKind, RateModel};
pub use scenario::{load_scenario, InitialState, Scenario, Slice, TimeGrid, Tolerances};

use crate::dynamics::DensityMatrix;
use crate::error::Result;
use crate::numerics::{eigh, CMatrix, EigenSystem};

/// `exp(-βH) / Z`, built in the eigenbasis of `H` with the ground energy
/// shifted out for stability.
pub fn gibbs_state(hamiltonian: &CMatrix, beta: f64, herm_tol: f64) -> Result<DensityMatrix> {
    let energies = eigh(hamiltonian, herm_tol)?;
    let ground = energies.values[0];
    let weights: Vec<f64> = energies.values.iter().map(|e| (-beta * (e - ground)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let spectrum = EigenSystem {
        values: weights.iter().map(|w| w / z).collect(),
        vectors: energies.vectors,
    };
    Ok(DensityMatrix::from_spectrum(spectrum))
}

//! Bohr-frequency resolved jump operators `L_{ω,α}`.

use super::rates::RateModel;
use crate::error::{QslError, Result};
use crate::numerics::{eigh, hermitize, max_abs, CMatrix, EigenSystem, C64};

const DROP_TOL: f64 = 1e-14;

/// A system coupling operator `L_α` and the rate model of its bath channel.
#[derive(Clone, Debug)]
pub struct Coupling {
    pub matrix: CMatrix,
    pub rate: RateModel,
}

#[derive(Clone, Debug)]
pub struct JumpOperator {
    /// Energy handed to the bath by the jump.
    pub omega: f64,
    pub coupling: usize,
    pub matrix: CMatrix,
    pub rate: f64,
    /// Index of `L_{-ω,α}` within the owning set.
    pub mirror: usize,
}

/// All `L_{ω,α}` at one instant, built from the spectrum of `H(t)`.
#[derive(Clone, Debug)]
pub struct JumpOperatorSet {
    pub t: f64,
    pub ops: Vec<JumpOperator>,
    pub energies: EigenSystem,
}

impl JumpOperatorSet {
    pub fn dim(&self) -> usize {
        self.energies.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Copy with every rate multiplied by `lambda`, i.e. the channels of the
    /// rescaled dissipator `λ D`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        for op in &mut out.ops {
            op.rate *= lambda;
        }
        out
    }

    pub fn max_rate(&self) -> f64 {
        self.ops.iter().fold(0.0, |acc, op| acc.max(op.rate))
    }

    /// Mutable rate access, for building deliberately broken generators in
    /// mutation tests.
    pub fn set_rate(&mut self, index: usize, rate: f64) {
        self.ops[index].rate = rate;
    }
}

/// Build `L_{ω,α} = Σ_{ε_m - ε_n = ω} |ε_n⟩⟨ε_n|L_α|ε_m⟩⟨ε_m|` for every
/// Bohr-frequency cluster and coupling.
///
/// Frequencies closer than `omega_tol * max(1, ‖H‖_max)` are merged into one
/// channel whose label is the cluster midpoint. The cluster set is
/// symmetric under `ω -> -ω`, and `L_{-ω,α}` is stored as the exact adjoint
/// of `L_{ω,α}`.
pub fn build_jump_operators(
    hamiltonian: &CMatrix,
    couplings: &[Coupling],
    omega_tol: f64,
    herm_tol: f64,
    t: f64,
) -> Result<JumpOperatorSet> {
    let energies = eigh(hamiltonian, herm_tol)?;
    let dim = energies.dim();
    for coupling in couplings {
        if coupling.matrix.nrows() != dim {
            return Err(QslError::DimensionMismatch {
                expected: dim,
                found: coupling.matrix.nrows(),
            });
        }
    }
    let tol = omega_tol * max_abs(hamiltonian).max(1.0);

    // (ω, n, m) for the jump m -> n
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(dim * dim);
    for n in 0..dim {
        for m in 0..dim {
            pairs.push((energies.values[m] - energies.values[n], n, m));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut clusters: Vec<Vec<(f64, usize, usize)>> = Vec::new();
    for p in pairs {
        match clusters.last_mut() {
            Some(last) if p.0 - last.last().unwrap().0 <= tol => last.push(p),
            _ => clusters.push(vec![p]),
        }
    }
    let n_clusters = clusters.len();
    let labels: Vec<f64> = clusters
        .iter()
        .map(|cl| 0.5 * (cl.first().unwrap().0 + cl.last().unwrap().0))
        .collect();

    let in_energy_basis: Vec<CMatrix> = couplings.iter().map(|c| energies.to_basis(&c.matrix)).collect();

    let mut ops = Vec::new();
    for (alpha, (coupling, l_e)) in couplings.iter().zip(&in_energy_basis).enumerate() {
        // clusters k and n_clusters-1-k are mirror images
        for k in 0..n_clusters {
            let mirror_k = n_clusters - 1 - k;
            if k > mirror_k {
                continue;
            }
            let mut block = CMatrix::zeros(dim, dim);
            for &(_, n, m) in &clusters[k] {
                block[(n, m)] = l_e[(n, m)];
            }
            let mut op_matrix = energies.from_basis(&block);
            if k == mirror_k {
                op_matrix = hermitize(&op_matrix);
            }
            if max_abs(&op_matrix) < DROP_TOL {
                continue;
            }
            let omega = labels[k];
            let idx = ops.len();
            if k == mirror_k {
                ops.push(JumpOperator {
                    omega: 0.0,
                    coupling: alpha,
                    matrix: op_matrix,
                    rate: coupling.rate.rate(0.0),
                    mirror: idx,
                });
            } else {
                let adjoint = op_matrix.adjoint();
                ops.push(JumpOperator {
                    omega,
                    coupling: alpha,
                    matrix: op_matrix,
                    rate: coupling.rate.rate(omega),
                    mirror: idx + 1,
                });
                ops.push(JumpOperator {
                    omega: -omega,
                    coupling: alpha,
                    matrix: adjoint,
                    rate: coupling.rate.rate(-omega),
                    mirror: idx,
                });
            }
        }
    }

    Ok(JumpOperatorSet { t, ops, energies })
}

/// Sum over Bohr channels of a coupling, which telescopes back to `L_α`.
pub fn channel_sum(set: &JumpOperatorSet, coupling: usize) -> CMatrix {
    let dim = set.dim();
    set.ops
        .iter()
        .filter(|op| op.coupling == coupling)
        .fold(CMatrix::zeros(dim, dim), |acc, op| acc + &op.matrix)
}

/// `max_k ‖[L_k, H] - ω_k L_k‖_max / (‖H‖_max ‖L_k‖_max)` over the set.
pub fn commutation_defect(set: &JumpOperatorSet, hamiltonian: &CMatrix) -> f64 {
    let h_norm = max_abs(hamiltonian).max(f64::MIN_POSITIVE);
    set.ops
        .iter()
        .map(|op| {
            let comm = &op.matrix * hamiltonian - hamiltonian * &op.matrix;
            let defect = comm - op.matrix.map(|z| z * C64::new(op.omega, 0.0));
            max_abs(&defect) / (h_norm * max_abs(&op.matrix))
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RateModel;
    use crate::numerics::{pauli, DEFAULT_HERM_TOL};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn flat(gamma0: f64) -> RateModel {
        RateModel::flat(gamma0, 1.0)
    }

    #[test]
    fn qubit_sigma_x_splits_into_lowering_and_raising() {
        let eps = 1.3;
        let h = pauli::z().scale(eps / 2.0);
        let couplings = vec![Coupling {
            matrix: pauli::x(),
            rate: flat(1.0),
        }];
        let set = build_jump_operators(&h, &couplings, 1e-9, DEFAULT_HERM_TOL, 0.0).unwrap();
        assert_eq!(set.ops.len(), 2);
        // |g⟩ = index 1 (energy -ε/2), |e⟩ = index 0
        let lower = set.ops.iter().find(|op| op.omega > 0.0).unwrap();
        let raise = set.ops.iter().find(|op| op.omega < 0.0).unwrap();
        assert!((lower.omega - eps).abs() < 1e-14);
        assert!(max_abs(&(&lower.matrix - pauli::ket_bra(2, 1, 0))) < 1e-14);
        assert!(max_abs(&(&raise.matrix - pauli::ket_bra(2, 0, 1))) < 1e-14);
        assert_eq!(lower.rate, 1.0);
        assert!((raise.rate - (-eps).exp()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_hamiltonian_gives_single_zero_channel() {
        let h = pauli::identity(3).scale(0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l = random::hermitian(&mut rng, 3, 1.0);
        let couplings = vec![Coupling {
            matrix: l.clone(),
            rate: flat(0.5),
        }];
        let set = build_jump_operators(&h, &couplings, 1e-9, DEFAULT_HERM_TOL, 0.0).unwrap();
        assert_eq!(set.ops.len(), 1);
        assert_eq!(set.ops[0].omega, 0.0);
        assert!(max_abs(&(&set.ops[0].matrix - l)) < 1e-12);
    }

    #[test]
    fn random_sets_satisfy_construction_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for dim in 2..=4 {
            let h = random::hermitian(&mut rng, dim, 1.0);
            let couplings: Vec<Coupling> = (0..2)
                .map(|_| Coupling {
                    matrix: random::hermitian(&mut rng, dim, 1.0),
                    rate: RateModel::ohmic(0.8, 1.2),
                })
                .collect();
            let tol = 1e-9;
            let set = build_jump_operators(&h, &couplings, tol, DEFAULT_HERM_TOL, 0.0).unwrap();
            for (alpha, coupling) in couplings.iter().enumerate() {
                let sum = channel_sum(&set, alpha);
                assert!(max_abs(&(sum - &coupling.matrix)) < 1e-10);
            }
            for op in &set.ops {
                let mirror = &set.ops[op.mirror];
                assert_eq!(mirror.omega, -op.omega);
                assert!(max_abs(&(&mirror.matrix - op.matrix.adjoint())) < 1e-10);
            }
            assert!(commutation_defect(&set, &h) <= 10.0 * tol);
        }
    }

    #[test]
    fn near_degenerate_frequencies_merge() {
        // Equally spaced ladder: both ladder steps share one channel.
        let h = crate::numerics::real_diagonal(&[0.0, 1.0, 2.0 + 1e-12]);
        let couplings = vec![Coupling {
            matrix: pauli::ket_bra(3, 0, 1)
                + pauli::ket_bra(3, 1, 0)
                + pauli::ket_bra(3, 1, 2)
                + pauli::ket_bra(3, 2, 1),
            rate: flat(1.0),
        }];
        let set = build_jump_operators(&h, &couplings, 1e-9, DEFAULT_HERM_TOL, 0.0).unwrap();
        assert_eq!(set.ops.len(), 2);
    }

    #[test]
    fn rejects_mismatched_coupling() {
        let couplings = vec![Coupling {
            matrix: pauli::identity(3),
            rate: flat(1.0),
        }];
        assert!(matches!(
            build_jump_operators(&pauli::z(), &couplings, 1e-9, DEFAULT_HERM_TOL, 0.0),
            Err(QslError::DimensionMismatch { .. })
        ));
    }
}
